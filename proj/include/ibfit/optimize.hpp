#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace ibfit {

struct SimplexOptions {
  double rel_tol = 1e-8;   // on the objective spread across the simplex
  int max_evaluations = 10000;
  int restarts = 1;        // fresh simplex around the optimum after convergence
};

struct SimplexResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free Nelder-Mead minimization. Non-finite objective values
// are treated as +inf so the simplex retreats from invalid regions.
template <typename F>
SimplexResult minimize_simplex(F&& objective, std::vector<double> start,
                               std::vector<double> step,
                               const SimplexOptions& opts = {}) {
  const std::size_t dim = start.size();
  int evaluations = 0;
  auto eval = [&](const std::vector<double>& p) {
    ++evaluations;
    const double v = objective(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  SimplexResult result;
  result.x = start;
  result.value = eval(start);

  for (int round = 0; round <= opts.restarts; ++round) {
    std::vector<std::vector<double>> pts(dim + 1, result.x);
    std::vector<double> vals(dim + 1, result.value);
    for (std::size_t i = 0; i < dim; ++i) {
      pts[i + 1][i] += step[i];
      vals[i + 1] = eval(pts[i + 1]);
    }

    bool converged = false;
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    while (evaluations < opts.max_evaluations) {
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t lo = order.front();
      const std::size_t hi = order.back();
      const std::size_t next_hi = order[dim - 1];

      const double spread = std::abs(vals[hi] - vals[lo]);
      if (std::isfinite(vals[hi]) &&
          2.0 * spread <= opts.rel_tol * (std::abs(vals[hi]) + std::abs(vals[lo])) + 1e-300) {
        converged = true;
        break;
      }

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t i = 0; i <= dim; ++i) {
        if (i == hi) continue;
        for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d] / dim;
      }
      auto along = [&](double t, std::vector<double>& out) {
        for (std::size_t d = 0; d < dim; ++d)
          out[d] = centroid[d] + t * (pts[hi][d] - centroid[d]);
        return eval(out);
      };

      const double reflected = along(-1.0, trial);
      if (reflected < vals[lo]) {
        const double expanded = along(-2.0, trial2);
        if (expanded < reflected) {
          pts[hi] = trial2;
          vals[hi] = expanded;
        } else {
          pts[hi] = trial;
          vals[hi] = reflected;
        }
      } else if (reflected < vals[next_hi]) {
        pts[hi] = trial;
        vals[hi] = reflected;
      } else {
        const bool outside = reflected < vals[hi];
        const double contracted = along(outside ? -0.5 : 0.5, trial2);
        if (contracted < std::min(reflected, vals[hi])) {
          pts[hi] = trial2;
          vals[hi] = contracted;
        } else {
          for (std::size_t i = 0; i <= dim; ++i) {
            if (i == lo) continue;
            for (std::size_t d = 0; d < dim; ++d)
              pts[i][d] = pts[lo][d] + 0.5 * (pts[i][d] - pts[lo][d]);
            vals[i] = eval(pts[i]);
          }
        }
      }
    }

    const auto best = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    if (vals[best] <= result.value) {
      result.x = pts[best];
      result.value = vals[best];
    }
    result.converged = converged;
    if (!converged) break;
    // Restart with a smaller simplex to escape premature collapse.
    for (auto& s : step) s *= 0.1;
  }
  result.evaluations = evaluations;
  return result;
}

}  // namespace ibfit

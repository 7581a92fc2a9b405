// Draws a truncated power law, finds the tail with the KS scan and ranks
// the five candidate families on it.
#include <cstdio>
#include <cstdlib>

#include "ibfit/ibfit.hpp"

using namespace ibfit;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 5000;
  const auto truth = DistributionSpec::truncated_power_law(2.02, 3.13e-4, 10.0);
  const SortedSample s(sample(truth, n, 42));

  const auto sel = select_xmin(s);
  std::printf("n = %zu, x_min_hat = %.4g, alpha_hat = %.4f, KS = %.4f, tail %zu (%.1f%%)\n", n,
              sel.x_min_hat, sel.alpha_hat, sel.z, sel.n_tail, 100.0 * sel.tail_fraction);

  const auto r = rank_candidates(s, sel.x_min_hat);
  for (auto k : kAllKinds) {
    const auto i = index_of(k);
    std::printf("  %-4s", std::string(short_name(k)).c_str());
    if (!r.fits[i]) {
      std::printf("  excluded: %s\n", r.fit_errors[i].c_str());
      continue;
    }
    const auto names = parameter_names(k);
    const auto v = r.fits[i]->spec.values();
    for (std::size_t p = 0; p < v.size(); ++p)
      std::printf("  %s=%-10.4g", std::string(names[p]).c_str(), v[p]);
    if (r.g_scores[i]) std::printf("  g=%+.2f", *r.g_scores[i]);
    std::printf("\n");
  }
  std::printf("best: %s", r.best ? std::string(short_name(*r.best)).c_str() : "none");
  for (auto k : r.alternates) std::printf(", alternate %s", std::string(short_name(k)).c_str());
  std::printf("\n");
}

#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "ibfit/error.hpp"

namespace ibfit {

using Date = std::chrono::sys_days;
using YearMonth = std::chrono::year_month;

enum class Granularity { Week, Month, Quarter, Year };

constexpr const char* to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::Week: return "week";
    case Granularity::Month: return "month";
    case Granularity::Quarter: return "quarter";
    case Granularity::Year: return "year";
  }
  return "?";
}

inline std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "week") return Granularity::Week;
  if (s == "month") return Granularity::Month;
  if (s == "quarter") return Granularity::Quarter;
  if (s == "year") return Granularity::Year;
  return std::nullopt;
}

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

// Strict ISO-8601 calendar date, YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view s) {
  int y, m, d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m) ||
      !detail::parse_int(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

// YYYY-MM.
inline std::optional<YearMonth> parse_year_month(std::string_view s) {
  int y, m;
  if (s.size() != 7 || s[4] != '-') return std::nullopt;
  if (!detail::parse_int(s.substr(0, 4), y) || !detail::parse_int(s.substr(5, 2), m))
    return std::nullopt;
  const YearMonth ym{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)}};
  if (!ym.ok()) return std::nullopt;
  return ym;
}

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_year_month(YearMonth ym) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04d-%02u", static_cast<int>(ym.year()),
                static_cast<unsigned>(ym.month()));
  return buf;
}

// A half-open calendar interval [start, end) of one granularity. Weeks
// start on Monday; quarters are calendar quarters.
struct TimeBin {
  Granularity granularity = Granularity::Month;
  Date start{};
  Date end{};

  bool operator==(const TimeBin&) const = default;
  bool operator<(const TimeBin& o) const {
    if (start != o.start) return start < o.start;
    if (end != o.end) return end < o.end;
    return granularity < o.granularity;
  }
  bool contains(Date d) const { return start <= d && d < end; }
  int days() const { return (end - start).count(); }

  std::string label() const {
    const std::chrono::year_month_day ymd{start};
    const int y = static_cast<int>(ymd.year());
    const unsigned m = static_cast<unsigned>(ymd.month());
    char buf[32];
    switch (granularity) {
      case Granularity::Week: return format_date(start);
      case Granularity::Month: std::snprintf(buf, sizeof buf, "%04d-%02u", y, m); break;
      case Granularity::Quarter: std::snprintf(buf, sizeof buf, "%04d-Q%u", y, (m - 1) / 3 + 1); break;
      case Granularity::Year: std::snprintf(buf, sizeof buf, "%04d", y); break;
    }
    return buf;
  }
};

// The bin of the given granularity that contains `d`.
inline TimeBin bin_of(Date d, Granularity g) {
  using namespace std::chrono;
  const year_month_day ymd{d};
  switch (g) {
    case Granularity::Week: {
      const unsigned iso = weekday{d}.iso_encoding();  // Monday = 1
      const Date start = d - days{iso - 1};
      return {g, start, start + days{7}};
    }
    case Granularity::Month: {
      const year_month ym{ymd.year(), ymd.month()};
      return {g, Date{ym / 1}, Date{(ym + months{1}) / 1}};
    }
    case Granularity::Quarter: {
      const unsigned first = (static_cast<unsigned>(ymd.month()) - 1) / 3 * 3 + 1;
      const year_month ym{ymd.year(), month{first}};
      return {g, Date{ym / 1}, Date{(ym + months{3}) / 1}};
    }
    case Granularity::Year:
      return {g, Date{ymd.year() / January / 1}, Date{(ymd.year() + years{1}) / January / 1}};
  }
  throw ValidationError("unknown granularity");
}

// The bin immediately after `b`.
inline TimeBin next_bin(const TimeBin& b) { return bin_of(b.end, b.granularity); }

// Accepts a bin label (YYYY-MM-DD, YYYY-MM, YYYY-Qn, YYYY) or any date; a
// label is interpreted at the given granularity.
inline std::optional<TimeBin> parse_bin(std::string_view s, Granularity g) {
  using namespace std::chrono;
  if (auto d = parse_date(s)) return bin_of(*d, g);
  if (auto ym = parse_year_month(s)) return bin_of(Date{*ym / 1}, g);
  int y, q;
  if (s.size() == 7 && s[4] == '-' && s[5] == 'Q' && detail::parse_int(s.substr(0, 4), y) &&
      detail::parse_int(s.substr(6, 1), q) && q >= 1 && q <= 4)
    return bin_of(Date{year{y} / month{static_cast<unsigned>(3 * q - 2)} / 1}, g);
  if (s.size() == 4 && detail::parse_int(s, y)) return bin_of(Date{year{y} / January / 1}, g);
  return std::nullopt;
}

}  // namespace ibfit

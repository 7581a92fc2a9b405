#pragma once

#include <zlib.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibfit/calendar.hpp"
#include "ibfit/error.hpp"

namespace ibfit {

using BankId = std::string;

// Loans spanning more than this many days are long-term and dropped.
inline constexpr int kMaxMaturityDays = 7;

inline constexpr std::string_view kLoanHeader =
    "issuer,receiver,size,rate,reporting_date,maturity_date";
inline constexpr std::string_view kBalanceHeader = "bank,month,assets,capital";

struct LoanRecord {
  BankId issuer;
  BankId receiver;
  double size = 0.0;
  double interest_rate = 0.0;  // percent; carried through, not used by measures
  Date reporting_date{};
  Date maturity_date{};

  int maturity_days() const { return (maturity_date - reporting_date).count(); }
  bool operator==(const LoanRecord&) const = default;
};

struct BalanceSheetRecord {
  BankId bank;
  YearMonth month{};
  double total_assets = 0.0;
  double capital = 0.0;

  bool operator==(const BalanceSheetRecord&) const = default;
};

struct RejectedRow {
  std::size_t line = 0;
  std::string reason;
};

struct LoanParseResult {
  std::vector<LoanRecord> loans;
  std::size_t dropped_long_term = 0;
  std::vector<RejectedRow> rejected;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Reads lines, skipping blank ones, and checks the header. Calls
// `row(fields, line_number)` for every data line.
template <typename Row>
void read_csv(std::istream& in, std::string_view header, std::size_t columns, Row&& row) {
  std::string line;
  std::size_t number = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view = trim(line);
    if (number == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    if (!seen_header) {
      if (view != header)
        throw ParseError("expected header '" + std::string(header) + "'", number);
      seen_header = true;
      continue;
    }
    const auto fields = split_fields(view);
    if (fields.size() != columns)
      throw ParseError("expected " + std::to_string(columns) + " fields, found " +
                           std::to_string(fields.size()),
                       number);
    row(fields, number);
  }
}

inline std::string format_number(double v) {
  std::array<char, 32> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace detail

// Parses the loan CSV. Malformed rows throw ParseError; rows violating a
// record invariant are skipped and listed in `rejected`; loans longer than
// kMaxMaturityDays are dropped and counted.
inline LoanParseResult parse_loans(std::istream& in) {
  LoanParseResult result;
  detail::read_csv(in, kLoanHeader, 6, [&](const auto& f, std::size_t line) {
    LoanRecord r;
    r.issuer = std::string(f[0]);
    r.receiver = std::string(f[1]);
    if (r.issuer.empty() || r.receiver.empty()) throw ParseError("empty bank id", line);
    if (!detail::parse_double(f[2], r.size)) throw ParseError("bad size '" + std::string(f[2]) + "'", line);
    if (!detail::parse_double(f[3], r.interest_rate))
      throw ParseError("bad rate '" + std::string(f[3]) + "'", line);
    const auto rep = parse_date(f[4]);
    if (!rep) throw ParseError("bad reporting_date '" + std::string(f[4]) + "'", line);
    const auto mat = parse_date(f[5]);
    if (!mat) throw ParseError("bad maturity_date '" + std::string(f[5]) + "'", line);
    r.reporting_date = *rep;
    r.maturity_date = *mat;

    if (!(r.size > 0.0)) {
      result.rejected.push_back({line, "size must be positive"});
    } else if (r.issuer == r.receiver) {
      result.rejected.push_back({line, "issuer equals receiver"});
    } else if (r.maturity_date < r.reporting_date) {
      result.rejected.push_back({line, "maturity_date precedes reporting_date"});
    } else if (r.maturity_days() > kMaxMaturityDays) {
      ++result.dropped_long_term;
    } else {
      result.loans.push_back(std::move(r));
    }
  });
  return result;
}

// Parses the balance-sheet CSV. Negative assets or capital are kept here;
// the nodal-attribute measures filter them.
inline std::vector<BalanceSheetRecord> parse_balance_sheets(std::istream& in) {
  std::vector<BalanceSheetRecord> out;
  std::set<std::pair<BankId, YearMonth>> seen;
  detail::read_csv(in, kBalanceHeader, 4, [&](const auto& f, std::size_t line) {
    BalanceSheetRecord r;
    r.bank = std::string(f[0]);
    if (r.bank.empty()) throw ParseError("empty bank id", line);
    const auto ym = parse_year_month(f[1]);
    if (!ym) throw ParseError("bad month '" + std::string(f[1]) + "'", line);
    r.month = *ym;
    if (!detail::parse_double(f[2], r.total_assets))
      throw ParseError("bad assets '" + std::string(f[2]) + "'", line);
    if (!detail::parse_double(f[3], r.capital))
      throw ParseError("bad capital '" + std::string(f[3]) + "'", line);
    if (!seen.emplace(r.bank, r.month).second)
      throw ParseError("duplicate record for bank '" + r.bank + "' month " +
                           format_year_month(r.month),
                       line);
    out.push_back(std::move(r));
  });
  return out;
}

inline void write_loans(std::ostream& out, std::span<const LoanRecord> loans) {
  out << kLoanHeader << '\n';
  for (const auto& r : loans)
    out << r.issuer << ',' << r.receiver << ',' << detail::format_number(r.size) << ','
        << detail::format_number(r.interest_rate) << ',' << format_date(r.reporting_date) << ','
        << format_date(r.maturity_date) << '\n';
}

inline void write_balance_sheets(std::ostream& out, std::span<const BalanceSheetRecord> rows) {
  out << kBalanceHeader << '\n';
  for (const auto& r : rows)
    out << r.bank << ',' << format_year_month(r.month) << ','
        << detail::format_number(r.total_assets) << ',' << detail::format_number(r.capital)
        << '\n';
}

// Whole file as text; paths ending in ".gz" are decompressed.
inline std::string read_text_file(const std::string& path) {
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    gzFile gz = gzopen(path.c_str(), "rb");
    if (!gz) throw Error("cannot open " + path);
    std::string text;
    std::array<char, 1 << 16> buf;
    int got;
    while ((got = gzread(gz, buf.data(), static_cast<unsigned>(buf.size()))) > 0)
      text.append(buf.data(), static_cast<std::size_t>(got));
    int err = Z_OK;
    const char* msg = gzerror(gz, &err);
    gzclose(gz);
    if (got < 0 || (err != Z_OK && err != Z_STREAM_END))
      throw Error("cannot decompress " + path + ": " + msg);
    return text;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LoanParseResult load_loans(const std::string& path) {
  std::istringstream in(read_text_file(path));
  try {
    return parse_loans(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

inline std::vector<BalanceSheetRecord> load_balance_sheets(const std::string& path) {
  std::istringstream in(read_text_file(path));
  try {
    return parse_balance_sheets(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

// Assigns each loan to the bin containing its reporting date. Bins come out
// in chronological order; loans keep their input order within a bin.
inline std::map<TimeBin, std::vector<LoanRecord>> bin_records(std::span<const LoanRecord> loans,
                                                              Granularity g) {
  std::map<TimeBin, std::vector<LoanRecord>> out;
  for (const auto& r : loans) out[bin_of(r.reporting_date, g)].push_back(r);
  return out;
}

}  // namespace ibfit

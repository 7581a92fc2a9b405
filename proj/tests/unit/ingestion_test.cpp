#include <gtest/gtest.h>
#include <zlib.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ibfit/ibfit.hpp"
#include "support/oracles.hpp"

using namespace ibfit;
using namespace std::chrono;

namespace {

const std::string kHeader = "issuer,receiver,size,rate,reporting_date,maturity_date\n";

LoanParseResult parse(const std::string& text) {
  std::istringstream in(text);
  return parse_loans(in);
}

std::vector<BalanceSheetRecord> parse_sheets(const std::string& text) {
  std::istringstream in(text);
  return parse_balance_sheets(in);
}

Date ymd(int y, unsigned m, unsigned d) { return Date{year{y} / m / d}; }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ibfit_unit_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(ParseLoans, MaturityFilter) {
  const auto r = parse(kHeader +
                       "A,B,10.5,3.2,2003-01-15,2003-01-16\n"
                       "A,B,10.5,3.2,2003-01-15,2003-02-14\n"
                       "B,C,1,3,2003-01-15,2003-01-22\n"
                       "B,C,1,3,2003-01-15,2003-01-23\n");
  ASSERT_EQ(r.loans.size(), 2u);
  EXPECT_EQ(r.loans[0].maturity_days(), 1);
  EXPECT_EQ(r.loans[1].maturity_days(), 7);
  EXPECT_EQ(r.dropped_long_term, 2u);
  EXPECT_TRUE(r.rejected.empty());
  EXPECT_EQ(r.loans[0], (LoanRecord{"A", "B", 10.5, 3.2, ymd(2003, 1, 15), ymd(2003, 1, 16)}));
}

TEST(ParseLoans, InvalidRowsRejectedWithLines) {
  const auto r = parse(kHeader +
                       "A,B,0,3,2003-01-15,2003-01-16\n"
                       "\n"
                       "A,A,5,3,2003-01-15,2003-01-16\n"
                       "A,B,-1,3,2003-01-15,2003-01-16\n"
                       "A,B,2,3,2003-01-15,2003-01-14\n"
                       "A,B,2,3,2003-01-15,2003-01-15\n");
  ASSERT_EQ(r.rejected.size(), 4u);
  EXPECT_EQ(r.rejected[0].line, 2u);
  EXPECT_EQ(r.rejected[1].line, 4u);
  EXPECT_EQ(r.rejected[2].line, 5u);
  EXPECT_EQ(r.rejected[3].line, 6u);
  EXPECT_EQ(r.loans.size(), 1u);  // same-day maturity is kept
}

TEST(ParseLoans, MalformedRowsThrowWithLine) {
  const std::vector<std::string> bad = {
      "A,B,1,3,2003-01-15\n",            "A,B,x,3,2003-01-15,2003-01-16\n",
      "A,B,1,3,2003-13-15,2003-01-16\n", "A,B,1,3,2003-01-15,16/01/2003\n",
      ",B,1,3,2003-01-15,2003-01-16\n",  "A,B,1,3,2003-02-30,2003-03-01\n",
      "A,B,1,3,2003-01-15,2003-01-16,x\n"};
  for (const auto& row : bad) {
    try {
      parse(kHeader + "A,B,1,3,2003-01-15,2003-01-16\n" + row);
      ADD_FAILURE() << row;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), 3u) << row;
      EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
  }
}

TEST(ParseLoans, HeaderAndEmpty) {
  EXPECT_TRUE(parse("").loans.empty());
  EXPECT_TRUE(parse("\n\n").loans.empty());
  EXPECT_TRUE(parse(kHeader).loans.empty());
  EXPECT_THROW(parse("issuer,receiver,size\nA,B,1\n"), ParseError);
  EXPECT_THROW(parse("A,B,1,3,2003-01-15,2003-01-16\n"), ParseError);
  // BOM and CRLF line endings
  EXPECT_EQ(parse("\xEF\xBB\xBF" + std::string("issuer,receiver,size,rate,reporting_date,maturity_date\r\n"
                                                 "A,B,1,3,2003-01-15,2003-01-16\r\n"))
                .loans.size(),
            1u);
}

TEST(ParseBalanceSheets, Examples) {
  const auto two = parse_sheets("bank,month,assets,capital\nA,2003-01,100,20\nB,2003-01,50,-5\n");
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].capital, -5.0);
  EXPECT_EQ(two[0].month, year{2003} / January);
  try {
    parse_sheets("bank,month,assets,capital\nA,2003-01,100,20\nB,2003-01,1,1\nA,2003-01,7,7\n");
    ADD_FAILURE();
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(msg.find("'A'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("2003-01"), std::string::npos) << msg;
  }
  EXPECT_THROW(parse_sheets("bank,month,assets,capital\nA,2003-01,abc,20\n"), ParseError);
  EXPECT_THROW(parse_sheets("bank,month,assets,capital\nA,2003-1x,1,20\n"), ParseError);
}

TEST(RoundTrip, LoansAndBalances) {
  const TimeBin bin = bin_of(ymd(2004, 3, 1), Granularity::Month);
  auto loans = oracle::random_loans(4, 20, 300, bin);
  for (std::size_t i = 0; i < loans.size(); ++i) {
    loans[i].size = loans[i].size * 0.1 + 1e-7 * static_cast<double>(i);  // non-trivial decimals
    loans[i].interest_rate = 3.0 + 0.01 * static_cast<double>(i);
  }
  std::ostringstream out;
  write_loans(out, loans);
  const auto back = parse(out.str());
  EXPECT_EQ(back.loans, loans);

  const std::vector<BalanceSheetRecord> sheets{{"A", year{2004} / 3, 1e9 / 3.0, -2.5},
                                               {"B", year{2004} / 4, 0.1, 0.3}};
  std::ostringstream s;
  write_balance_sheets(s, sheets);
  EXPECT_EQ(parse_sheets(s.str()), sheets);
}

TEST(RoundTrip, GzipInput) {
  const TimeBin bin = bin_of(ymd(2004, 3, 1), Granularity::Month);
  const auto loans = oracle::random_loans(8, 10, 50, bin);
  std::ostringstream out;
  write_loans(out, loans);
  const auto path = temp_path("loans.csv.gz");
  gzFile gz = gzopen(path.c_str(), "wb");
  ASSERT_NE(gz, nullptr);
  gzwrite(gz, out.str().data(), static_cast<unsigned>(out.str().size()));
  gzclose(gz);
  EXPECT_EQ(load_loans(path.string()).loans, loans);
  std::filesystem::remove(path);
  EXPECT_THROW(load_loans(path.string()), Error);
}

TEST(LoadLoans, ParseErrorNamesFile) {
  const auto path = temp_path("bad.csv");
  {
    std::ofstream f(path);
    f << kHeader << "A,B,oops,1,2003-01-01,2003-01-02\n";
  }
  try {
    load_loans(path.string());
    ADD_FAILURE();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find(path.string()), std::string::npos);
  }
  std::filesystem::remove(path);
}

TEST(Binning, MonthExamples) {
  const std::vector<LoanRecord> loans{{"A", "B", 1, 1, ymd(2003, 1, 15), ymd(2003, 1, 16)},
                                      {"A", "B", 1, 1, ymd(2003, 1, 30), ymd(2003, 1, 31)},
                                      {"A", "B", 1, 1, ymd(2003, 1, 31), ymd(2003, 2, 1)},
                                      {"A", "B", 1, 1, ymd(2003, 2, 1), ymd(2003, 2, 2)}};
  const auto bins = bin_records(loans, Granularity::Month);
  ASSERT_EQ(bins.size(), 2u);
  EXPECT_EQ(bins.begin()->second.size(), 3u);
  EXPECT_EQ(bins.begin()->first.label(), "2003-01");
  EXPECT_EQ(next_bin(bins.begin()->first), std::next(bins.begin())->first);
}

TEST(Binning, WeeksStartMonday) {
  // 2003-01-01 was a Wednesday.
  const auto w = bin_of(ymd(2003, 1, 1), Granularity::Week);
  EXPECT_EQ(w.start, ymd(2002, 12, 30));
  EXPECT_EQ(w.end, ymd(2003, 1, 6));
  EXPECT_EQ(weekday{w.start}, Monday);
  EXPECT_EQ(w.label(), "2002-12-30");
  EXPECT_EQ(bin_of(ymd(2003, 1, 5), Granularity::Week), w);
  EXPECT_NE(bin_of(ymd(2003, 1, 6), Granularity::Week), w);
}

TEST(Binning, QuartersAndYears) {
  const auto q = bin_of(ymd(2003, 5, 20), Granularity::Quarter);
  EXPECT_EQ(q.start, ymd(2003, 4, 1));
  EXPECT_EQ(q.end, ymd(2003, 7, 1));
  EXPECT_EQ(q.label(), "2003-Q2");
  const auto y = bin_of(ymd(2003, 5, 20), Granularity::Year);
  EXPECT_EQ(y.start, ymd(2003, 1, 1));
  EXPECT_EQ(y.end, ymd(2004, 1, 1));
  EXPECT_EQ(y.label(), "2003");
  EXPECT_EQ(parse_bin("2003-Q2", Granularity::Quarter), q);
  EXPECT_EQ(parse_bin("2003", Granularity::Year), y);
  EXPECT_EQ(parse_bin("2003-05", Granularity::Month)->label(), "2003-05");
  EXPECT_EQ(parse_bin("2003-05-21", Granularity::Week)->start, ymd(2003, 5, 19));
  EXPECT_FALSE(parse_bin("2003-Q5", Granularity::Quarter).has_value());
  EXPECT_FALSE(parse_bin("May", Granularity::Month).has_value());
}

TEST(Binning, PartitionAtEveryGranularity) {
  const TimeBin year_bin = bin_of(ymd(2004, 1, 1), Granularity::Year);
  const auto loans = oracle::random_loans(12, 40, 2000, year_bin);
  for (auto g : {Granularity::Week, Granularity::Month, Granularity::Quarter, Granularity::Year}) {
    const auto bins = bin_records(loans, g);
    std::size_t total = 0;
    std::optional<TimeBin> prev;
    for (const auto& [bin, members] : bins) {
      EXPECT_LT(bin.start, bin.end);
      if (prev) EXPECT_LE(prev->end, bin.start);
      for (const auto& l : members) EXPECT_TRUE(bin.contains(l.reporting_date));
      total += members.size();
      prev = bin;
    }
    EXPECT_EQ(total, loans.size()) << to_string(g);
  }
  // Consecutive bins tile the calendar without gaps.
  for (auto g : {Granularity::Week, Granularity::Month, Granularity::Quarter, Granularity::Year}) {
    TimeBin b = bin_of(ymd(1999, 12, 27), g);
    for (int i = 0; i < 60; ++i) {
      const TimeBin n = next_bin(b);
      EXPECT_EQ(n.start, b.end);
      b = n;
    }
  }
}

TEST(Binning, OrderPreservedWithinBin) {
  const TimeBin bin = bin_of(ymd(2004, 3, 1), Granularity::Month);
  const auto loans = oracle::random_loans(2, 10, 100, bin);
  EXPECT_EQ(bin_records(loans, Granularity::Month).at(bin), loans);
}

TEST(Calendar, ParsingAndNames) {
  EXPECT_EQ(parse_date("2003-01-15"), ymd(2003, 1, 15));
  EXPECT_FALSE(parse_date("2003-1-15").has_value());
  EXPECT_FALSE(parse_date("2003-02-29").has_value());
  EXPECT_TRUE(parse_date("2004-02-29").has_value());
  EXPECT_EQ(format_date(ymd(2004, 2, 9)), "2004-02-09");
  EXPECT_EQ(format_year_month(year{2004} / 2), "2004-02");
  for (auto g : {Granularity::Week, Granularity::Month, Granularity::Quarter, Granularity::Year})
    EXPECT_EQ(parse_granularity(to_string(g)), g);
  EXPECT_FALSE(parse_granularity("day").has_value());
}

#include <gtest/gtest.h>

#include <lacunary/counting.hpp>

#include "oracles.hpp"

using namespace lacunary;

namespace {

bool squarefree(std::uint64_t n)
{
  if (n == 0)
    return false;
  for (std::uint64_t d = 2; d * d <= n; ++d)
    if (n % (d * d) == 0)
      return false;
  return true;
}

} // namespace

TEST(Counting, PiMatchesNaiveCount)
{
  auto tau = oracle::tau_mod(3, 10'000);
  auto t = coefficient_table("delta", 3, 10'000);
  auto rep = count_pi_sf(t, {10, 100, 1000, 5000, 10'000}, true);
  for (auto& row : rep.rows) {
    std::uint64_t pi = 0, sf = 0, ones = 0;
    for (std::uint64_t n = 0; n < row.x; ++n) {
      pi += tau[n] != 0;
      sf += tau[n] != 0 && squarefree(n);
      ones += tau[n] == 1;
    }
    EXPECT_EQ(row.pi, pi) << row.x;
    EXPECT_EQ(*row.pi_sf, sf) << row.x;
    EXPECT_EQ(row.by_value[1], ones) << row.x;
    EXPECT_EQ(row.by_value[1] + row.by_value[2], row.pi);
  }
}

TEST(Counting, ThreadCountDoesNotChangeResults)
{
  auto t = coefficient_table("delta^2 - delta", 7, 300'000);
  unsigned saved = max_threads();
  max_threads() = 1;
  auto a = count_pi_sf(t, {1000, 299'999}, true);
  max_threads() = 8;
  auto b = count_pi_sf(t, {1000, 299'999}, true);
  max_threads() = saved;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].pi, b.rows[i].pi);
    EXPECT_EQ(a.rows[i].pi_sf, b.rows[i].pi_sf);
    EXPECT_EQ(a.rows[i].by_value, b.rows[i].by_value);
  }
}

TEST(Counting, TableLimits)
{
  EXPECT_THROW(coefficient_table("delta", 3, 2000, 1000), InputError);
  auto t = coefficient_table("delta", 3, 100);
  EXPECT_THROW(count_pi(t, {101}), InputError);
}

TEST(Counting, OracleMatchesEveryCoefficient)
{
  const std::pair<const char*, std::uint32_t> cases[] = {{"delta", 3}, {"delta^2", 3}, {"delta^5", 3}, {"delta^3", 3},
                                                         {"delta^4 + delta^6", 3}, {"delta", 7}, {"delta^2 - delta", 7},
                                                         {"delta^2", 7}, {"delta^7", 7}, {"delta", 5}};
  for (auto [text, p] : cases) {
    GradedForm f = evaluate_form(text, p, 10'000);
    auto s = oracle_check(f, 10'000);
    EXPECT_EQ(s.matches, s.total) << text << " mod " << p;
    EXPECT_EQ(s.total, 10'000u);
  }
}

TEST(Counting, OracleTriplesCarryHeights)
{
  GradedForm f = evaluate_form("delta^2", 3, 1000);
  auto entries = decomposition_oracle(f, 1000);
  // n = 2 is a prime in the nilpotent class 2 mod 3: height 1.
  ASSERT_EQ(entries[2].triples.size(), 1u);
  EXPECT_EQ(entries[2].triples[0].h, 1u);
  EXPECT_EQ(entries[7].triples[0].h, 0u);
  EXPECT_THROW(decomposition_oracle(f, 200'000), InputError);
}

TEST(Counting, CompareReportRatios)
{
  auto t = coefficient_table("delta", 3, 100'000);
  auto counts = count_pi_sf(t, {1000, 100'000}, true);
  auto prof = leading_constants_sf(evaluate_form("delta", 3, 100));
  auto rep = compare_report(counts, prof);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (auto& r : rep.rows) {
    EXPECT_NEAR(r.ratio, static_cast<double>(*r.pi_sf) / r.predicted, 1e-12);
    EXPECT_GT(r.ratio, 0.5);
    EXPECT_LT(r.ratio, 2.0);
  }
  auto plain = count_pi(t, {1000}, false);
  EXPECT_THROW(compare_report(plain, prof), InputError);
}

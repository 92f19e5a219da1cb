#include <random>

#include <gtest/gtest.h>

#include <lacunary/arith.hpp>
#include <lacunary/hecke_ops.hpp>
#include <lacunary/weight_basis.hpp>

#include "oracles.hpp"

using namespace lacunary;

namespace {

GradedForm random_form(std::uint32_t p, std::mt19937_64& rng, std::size_t prec)
{
  std::uniform_int_distribution<int> kd(1, 10);
  int k = 12 * kd(rng);
  auto b = weight_basis(p, k, prec);
  Vec c(b.dim());
  std::uniform_int_distribution<std::uint32_t> v(0, p - 1);
  for (auto& x : c)
    x = v(rng);
  c[b.dim() - 1] = 1;
  return {from_coordinates(c, b, prec), k};
}

std::uint64_t random_coprime(std::uint32_t p, std::uint64_t hi, std::mt19937_64& rng)
{
  std::uniform_int_distribution<std::uint64_t> d(1, hi);
  while (true) {
    auto m = d(rng);
    if (m % p)
      return m;
  }
}

} // namespace

TEST(HeckeOps, DeltaIsAnEigenform)
{
  for (std::uint32_t p : {3u, 5u, 7u, 11u}) {
    auto tau = oracle::tau_mod(p, 6000);
    GradedForm d{delta_power(p, 1, 6000), 12};
    for (std::uint64_t l : {2u, 3u, 5u, 7u, 11u, 13u, 29u}) {
      if (l == p)
        continue;
      GradedForm t = apply_T_ell(d, l);
      for (std::size_t n = 0; n < t.precision(); ++n)
        ASSERT_EQ(t.series[n], tau[l] * d.series[n] % p) << "p=" << p << " l=" << l << " n=" << n;
    }
  }
}

TEST(HeckeOps, FirstCoefficientRandomized)
{
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    std::uint32_t p = t % 2 ? 7 : 3;
    auto f = random_form(p, rng, 4000);
    auto m = random_coprime(p, 1000, rng);
    ASSERT_EQ(apply_T_m(f, m).series[1], f.series[m]) << "m=" << m;
  }
}

TEST(HeckeOps, MultiplicativityRandomized)
{
  std::mt19937_64 rng(2);
  int done = 0;
  while (done < 100) {
    std::uint32_t p = done % 2 ? 5 : 3;
    auto f = random_form(p, rng, 20'000);
    auto m = random_coprime(p, 60, rng), n = random_coprime(p, 60, rng);
    if (std::gcd(m, n) != 1)
      continue;
    auto a = apply_T_m(f, m * n), b = apply_T_m(apply_T_m(f, n), m);
    auto len = std::min(a.precision(), b.precision());
    ASSERT_EQ(a.series.truncated(len), b.series.truncated(len)) << "m=" << m << " n=" << n;
    ++done;
  }
}

TEST(HeckeOps, PrimePowerRecurrenceRandomized)
{
  std::mt19937_64 rng(3);
  auto primes = primes_up_to(40);
  for (int t = 0; t < 100; ++t) {
    std::uint32_t p = t % 2 ? 7 : 3;
    auto f = random_form(p, rng, 30'000);
    std::uint64_t l;
    do
      l = primes[rng() % primes.size()];
    while (l == p);
    unsigned e = 1 + static_cast<unsigned>(rng() % 2);
    if (l > 10)
      e = 1;
    // T_{l^{e+1}} = T_l T_{l^e} - l^{k-1} T_{l^{e-1}}
    auto lhs = apply_T_prime_power(f, l, e + 1);
    auto tl = apply_T_ell(apply_T_prime_power(f, l, e), l);
    auto low = apply_T_prime_power(f, l, e - 1);
    QSeries rhs = sub(tl.series, scale(low.series.truncated(tl.precision()), ell_s_ell(l, f.weight, p)));
    auto len = std::min(lhs.precision(), rhs.precision());
    ASSERT_EQ(lhs.series.truncated(len), rhs.truncated(len)) << "l=" << l << " e=" << e;
  }
}

TEST(HeckeOps, CommutativityRandomized)
{
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    std::uint32_t p = t % 2 ? 7 : 3;
    auto f = random_form(p, rng, 20'000);
    auto m = random_coprime(p, 100, rng), n = random_coprime(p, 100, rng);
    auto a = apply_T_m(apply_T_m(f, m), n), b = apply_T_m(apply_T_m(f, n), m);
    auto len = std::min(a.precision(), b.precision());
    ASSERT_EQ(a.series.truncated(len), b.series.truncated(len)) << "m=" << m << " n=" << n;
  }
}

TEST(HeckeOps, WIdempotentRandomized)
{
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    std::uint32_t p = t % 2 ? 7 : 3;
    auto f = random_form(p, rng, 3000);
    QSeries w = apply_W(f.series);
    ASSERT_EQ(apply_W(w), w);
    for (std::size_t n = 0; n < w.precision(); ++n)
      ASSERT_EQ(w[n], n % p ? f.series[n] : 0u);
  }
}

TEST(HeckeOps, UInvertsV)
{
  QSeries d = delta_power(5, 2, 1000);
  EXPECT_EQ(apply_U_m(apply_V_m(d, 25), 25), d);
  EXPECT_EQ(apply_V_m(d, 5).precision(), 5000u);
  EXPECT_EQ(apply_V_m(d, 5).truncated(1000), pow(d, 5));
  EXPECT_THROW(apply_U_m(d, 6), InputError);
}

TEST(HeckeOps, TOutputStaysInWeightSpace)
{
  GradedForm f{delta_power(7, 3, 2000), 36};
  auto t = apply_T_ell(f, 13);
  EXPECT_NO_THROW(to_coordinates(t, weight_basis(7, 36, t.precision())));
}

TEST(HeckeOps, OperatorSpecs)
{
  auto t = HeckeOpSpec::parse("T:5");
  EXPECT_EQ(t.kind, OpKind::T);
  EXPECT_EQ(t.index, 5u);
  EXPECT_EQ(t.to_string(), "T:5");
  EXPECT_EQ(HeckeOpSpec::parse("W").to_string(), "W");
  EXPECT_EQ(HeckeOpSpec::parse("S:2").to_string(), "S:2");
  EXPECT_THROW(HeckeOpSpec::parse("X:3"), InputError);
  EXPECT_THROW(HeckeOpSpec::parse("T:"), InputError);
  EXPECT_THROW(HeckeOpSpec::parse("T:0"), InputError);
  EXPECT_THROW(HeckeOpSpec::parse("T5"), InputError);
  GradedForm f{delta_power(3, 1, 100), 12};
  EXPECT_THROW(apply_op(f, HeckeOpSpec::parse("T:3")), InputError);
  EXPECT_THROW(apply_T_ell(f, 4), InputError);
  EXPECT_EQ(apply_op(f, HeckeOpSpec::parse("V:3")).weight, 36);
  EXPECT_EQ(apply_op(f, HeckeOpSpec::parse("W")).weight, 36);
}

TEST(HeckeOps, DiamondScalar)
{
  GradedForm f{delta_power(7, 1, 50), 12};
  auto s = apply_op(f, HeckeOpSpec::parse("S:3"));
  // 3^10 mod 7 = 4
  EXPECT_EQ(s.series, scale(f.series, 4));
  EXPECT_EQ(ell_s_ell(3, 12, 7), 3u * 4u % 7u);
}

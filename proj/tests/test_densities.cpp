#include <gtest/gtest.h>

#include <lacunary/asymptotics.hpp>
#include <lacunary/densities.hpp>
#include <lacunary/form_expr.hpp>

#include "oracles.hpp"

using namespace lacunary;

TEST(Densities, RationalArithmetic)
{
  Rational a(1, 6), b(1, 3);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(b - a, a);
  EXPECT_EQ((a * b).to_string(), "1/18");
  EXPECT_EQ(Rational(4, 2).to_string(), "2");
  EXPECT_EQ(Rational(2, -4), Rational(-1, 2));
  EXPECT_TRUE(a < b);
  EXPECT_DOUBLE_EQ(Rational(3, 8).to_double(), 0.375);
}

TEST(Densities, ClassDensities)
{
  EXPECT_EQ(class_density({2}, 3), Rational(1, 2));
  EXPECT_EQ(class_density({2, 5}, 9), Rational(1, 3));
  EXPECT_EQ(class_density({6}, 7), Rational(1, 6));
  EXPECT_THROW(class_density({3}, 9), InputError);
}

TEST(Densities, HeightDensities)
{
  long long fact = 1, pow3 = 1;
  for (unsigned h = 0; h <= 4; ++h) {
    if (h > 0) {
      fact *= h;
      pow3 *= 3;
    }
    EXPECT_EQ(tuple_density({2, 5}, 9, h), Rational(1, fact * pow3)) << h;
  }
}

TEST(Densities, MultiFrobenianDeltaSquared)
{
  auto f = evaluate_form("delta^2", 3, 200);
  auto m = build_module(f, {});
  Vec delta = m.from_ambient(m.ambient->coordinates(evaluate_form("delta*E4^3", 3, 200)));
  EXPECT_EQ(multi_frobenian_density(m, m.seed, delta, 1), Rational(1, 6));
  Vec two_delta = delta;
  for (auto& x : two_delta)
    x = 2 * x % 3;
  EXPECT_EQ(multi_frobenian_density(m, m.seed, two_delta, 1), Rational(1, 6));
  EXPECT_EQ(multi_frobenian_density_nonzero(m, m.seed, 1), Rational(1, 3));
  EXPECT_EQ(multi_frobenian_density_nonzero(m, m.seed, 2), Rational(0));
  EXPECT_EQ(multi_frobenian_density(m, m.seed, m.seed, 0), Rational(1));
}

TEST(Densities, AlphaOfGroups)
{
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("dihedral:2")), Rational(3, 4));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("A4")), Rational(1, 4));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("S4")), Rational(3, 8));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("A5")), Rational(1, 4));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("PGL2:3")), Rational(3, 8));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("PSL2:3")), Rational(1, 4));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("PSL2:5")), Rational(1, 4));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("reducible:2")), Rational(1, 2));
  EXPECT_EQ(alpha_of_group(GroupDescriptor::parse("reducible:6")), Rational(1, 6));
  EXPECT_THROW(GroupDescriptor::parse("A6"), InputError);
  EXPECT_THROW(alpha_of_group(GroupDescriptor::parse("PSL2:6")), InputError);
  EXPECT_THROW(GroupDescriptor::parse("dihedral"), InputError);
}

TEST(Densities, EulerConstantAgainstClosedForm)
{
  auto est = euler_constant_C({1}, 3, Rational(1, 2), 1, 2'000'000);
  double closed = oracle::closed_form_CU(2'000'000);
  EXPECT_NEAR(est.value, closed, 5e-5);
  EXPECT_NEAR(est.value, 0.2913, 5e-4);
  EXPECT_LT(est.error, 5e-4);
  EXPECT_THROW(euler_constant_C({1}, 3, Rational(3, 2), 1, 10'000), InputError);
}

TEST(Densities, EulerConstantDropsFactorsOfR)
{
  auto a = euler_constant_C({1}, 3, Rational(1, 2), 1, 100'000);
  auto b = euler_constant_C({1}, 3, Rational(1, 2), 7, 100'000);
  EXPECT_NEAR(b.value * (1 + 1.0 / 7), a.value, 1e-12);
}

TEST(Densities, CDeltaSquaredAgainstClosedForm)
{
  auto prof = leading_constants(evaluate_form("delta^2", 3, 100));
  EXPECT_EQ(prof.alpha, Rational(1, 2));
  EXPECT_EQ(prof.h, 1u);
  double closed = oracle::closed_form_c_delta2(2'000'000);
  EXPECT_NEAR(prof.c / closed, 1.0, 1e-3);
  EXPECT_NEAR(prof.per_value.at(1).c, prof.per_value.at(2).c, 1e-9);
}

TEST(Densities, SquarefreeConstantsMod3)
{
  // c_sf(delta^k) = C(U) / (h! 3^h).
  double cu = oracle::closed_form_CU(2'000'000);
  const int ks[] = {1, 2, 4, 5};
  const int hs[] = {0, 1, 2, 3};
  for (int i = 0; i < 4; ++i) {
    auto prof = leading_constants_sf(evaluate_form("delta^" + std::to_string(ks[i]), 3, 200));
    double expect = cu * tuple_density({2, 5}, 9, hs[i]).to_double();
    EXPECT_EQ(prof.h, static_cast<std::size_t>(hs[i]));
    EXPECT_NEAR(prof.c / expect, 1.0, 1e-3) << "k=" << ks[i];
  }
}

TEST(Densities, SquarefreeConstantMod7)
{
  auto prof = leading_constants_sf(evaluate_form("delta^2", 7, 100));
  EXPECT_EQ(prof.alpha, Rational(1, 6));
  EXPECT_EQ(prof.h, 0u);
  EXPECT_NEAR(prof.c, 0.5976, 5e-4);
  EXPECT_LT(prof.c_err, 5e-4);
}

TEST(Densities, AlphaOfForms)
{
  EXPECT_EQ(alpha_of_form(evaluate_form("delta^4", 3, 100)), Rational(1, 2));
  EXPECT_EQ(alpha_of_form(evaluate_form("delta^2", 7, 100)), Rational(1, 6));
  EXPECT_EQ(alpha_of_form(evaluate_form("delta", 7, 100)), Rational(1, 2));
  EXPECT_THROW(alpha_of_form(evaluate_form("1", 7, 100)), InputError);
}

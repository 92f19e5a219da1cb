#pragma once

#include <cstdint>
#include <string>

#include "arith.hpp"
#include "errors.hpp"
#include "qseries.hpp"
#include "weight_basis.hpp"

namespace lacunary {

/// Largest precision apply_V_m will produce.
inline constexpr std::size_t default_series_cap = 10'000'000;

/// ℓS_ℓ = ℓ^{k−1} mod p at level one.
inline std::uint32_t ell_s_ell(std::uint64_t ell, int k, std::uint32_t p)
{
  return powmod_signed(ell % p, static_cast<long long>(k) - 1, p);
}

/// a_n = a_{ℓn} + ℓ^{k−1} a_{n/ℓ}; output precision ⌊prec/ℓ⌋.
inline GradedForm apply_T_ell(const GradedForm& f, std::uint64_t ell)
{
  std::uint32_t p = f.modulus();
  if (!is_prime(ell))
    throw InputError("T_ell needs a prime index, got " + std::to_string(ell));
  if (ell == p)
    throw InputError("T_p is not defined here; use U_p");
  std::size_t out = f.precision() / ell;
  if (out == 0)
    throw InputError("insufficient precision for T_" + std::to_string(ell));
  std::uint32_t s = ell_s_ell(ell, f.weight, p);
  std::vector<std::uint8_t> c(out);
  for (std::size_t n = 0; n < out; ++n) {
    std::uint32_t v = f.series[ell * n];
    if (n % ell == 0)
      v += s * f.series[n / ell];
    c[n] = static_cast<std::uint8_t>(v % p);
  }
  return {QSeries(p, std::move(c)), f.weight};
}

/// T_{ℓ^e} via T_{ℓ^{n+1}} = T_{ℓ^n} T_ℓ − ℓS_ℓ T_{ℓ^{n−1}}.
inline GradedForm apply_T_prime_power(const GradedForm& f, std::uint64_t ell, unsigned e)
{
  if (e == 0)
    return f;
  std::uint32_t s = ell_s_ell(ell, f.weight, f.modulus());
  GradedForm prev = f, cur = apply_T_ell(f, ell);
  for (unsigned i = 1; i < e; ++i) {
    GradedForm next = apply_T_ell(cur, ell);
    next.series = sub(next.series, scale(prev.series, s));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

inline GradedForm apply_T_m(const GradedForm& f, std::uint64_t m)
{
  if (m == 0)
    throw InputError("T_m needs m ≥ 1");
  if (m % f.modulus() == 0)
    throw InputError("T_m needs m coprime to p");
  GradedForm g = f;
  for (auto [ell, e] : factorize(m))
    g = apply_T_prime_power(g, ell, e);
  return g;
}

inline void check_p_power(std::uint64_t m, std::uint32_t p)
{
  if (!is_power_of(m, p))
    throw InputError("index " + std::to_string(m) + " is not a power of p at level one");
}

/// a_n = a_{mn}; precision ⌊prec/m⌋.
inline QSeries apply_U_m(const QSeries& f, std::uint64_t m)
{
  check_p_power(m, f.modulus());
  std::size_t out = f.precision() / m;
  if (out == 0)
    throw InputError("insufficient precision for U_" + std::to_string(m));
  std::vector<std::uint8_t> c(out);
  for (std::size_t n = 0; n < out; ++n)
    c[n] = static_cast<std::uint8_t>(f[m * n]);
  return QSeries(f.modulus(), std::move(c));
}

/// a_{mn}(out) = a_n(f), zero elsewhere; precision m·prec capped. V_m f ≡ f^m has weight mk.
inline QSeries apply_V_m(const QSeries& f, std::uint64_t m, std::size_t cap = default_series_cap)
{
  check_p_power(m, f.modulus());
  std::size_t out = std::min<std::size_t>(f.precision() * m, std::max<std::size_t>(cap, f.precision()));
  std::vector<std::uint8_t> c(out, 0);
  for (std::size_t n = 0; n * m < out; ++n)
    c[n * m] = static_cast<std::uint8_t>(f[n]);
  return QSeries(f.modulus(), std::move(c));
}

/// Zeroes a_n for p | n. W = 1 − V_pU_p raises the weight k to pk.
inline QSeries apply_W(const QSeries& f)
{
  std::vector<std::uint8_t> c(f.coeffs().begin(), f.coeffs().end());
  for (std::size_t n = 0; n < c.size(); n += f.modulus())
    c[n] = 0;
  return QSeries(f.modulus(), std::move(c));
}

enum class OpKind { T, U, V, W, S };

struct HeckeOpSpec {
  OpKind kind;
  std::uint64_t index = 1;

  /// "T:5", "U:3", "V:9", "S:2", "W".
  static HeckeOpSpec parse(const std::string& text)
  {
    if (text == "W")
      return {OpKind::W, 1};
    auto colon = text.find(':');
    if (text.size() < 3 || colon != 1)
      throw InputError("operator must look like T:5, U:3, V:3, S:2 or W");
    OpKind k;
    switch (text[0]) {
    case 'T': k = OpKind::T; break;
    case 'U': k = OpKind::U; break;
    case 'V': k = OpKind::V; break;
    case 'S': k = OpKind::S; break;
    default: throw InputError("unknown operator kind '" + text.substr(0, 1) + "'");
    }
    std::uint64_t idx = 0;
    for (std::size_t i = 2; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9' || idx > 1'000'000'000'000ULL)
        throw InputError("bad operator index in '" + text + "'");
      idx = idx * 10 + static_cast<std::uint64_t>(text[i] - '0');
    }
    if (idx == 0)
      throw InputError("operator index must be positive");
    return {k, idx};
  }

  std::string to_string() const
  {
    const char* names = "TUVWS";
    if (kind == OpKind::W)
      return "W";
    return std::string(1, names[static_cast<int>(kind)]) + ":" + std::to_string(index);
  }

  void validate(std::uint32_t p) const
  {
    if (kind == OpKind::U || kind == OpKind::V)
      check_p_power(index, p);
    if ((kind == OpKind::T || kind == OpKind::S) && index % p == 0)
      throw InputError("T/S index must be coprime to p");
  }
};

inline GradedForm apply_op(const GradedForm& f, const HeckeOpSpec& op)
{
  op.validate(f.modulus());
  switch (op.kind) {
  case OpKind::T: return apply_T_m(f, op.index);
  case OpKind::U: return {apply_U_m(f.series, op.index), f.weight};
  case OpKind::V: return {apply_V_m(f.series, op.index), f.weight * static_cast<int>(op.index)};
  case OpKind::W: return {apply_W(f.series), f.weight * static_cast<int>(f.modulus())};
  case OpKind::S:
    return {scale(f.series, powmod_signed(op.index % f.modulus(), static_cast<long long>(f.weight) - 2, f.modulus())), f.weight};
  }
  throw InputError("unknown operator");
}

} // namespace lacunary

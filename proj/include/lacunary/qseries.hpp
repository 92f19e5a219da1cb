#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"

namespace lacunary {

class FpElement {
public:
  FpElement(long long v, std::uint32_t p) : p_(p)
  {
    long long r = v % static_cast<long long>(p);
    value_ = static_cast<std::uint32_t>(r < 0 ? r + p : r);
  }

  std::uint32_t value() const { return value_; }
  std::uint32_t modulus() const { return p_; }

  friend FpElement operator+(FpElement a, FpElement b) { same(a, b); return {static_cast<long long>(a.value_) + b.value_, a.p_}; }
  friend FpElement operator-(FpElement a, FpElement b) { same(a, b); return {static_cast<long long>(a.value_) - b.value_, a.p_}; }
  friend FpElement operator*(FpElement a, FpElement b) { same(a, b); return {static_cast<long long>(a.value_) * b.value_, a.p_}; }
  FpElement inverse() const { return {inverse_mod(value_, p_), p_}; }
  friend bool operator==(FpElement, FpElement) = default;

private:
  static void same(FpElement a, FpElement b)
  {
    if (a.p_ != b.p_)
      throw InputError("mismatched moduli");
  }
  std::uint32_t value_;
  std::uint32_t p_;
};

/// Truncated q-series over F_p; indices 0..prec-1 are known.
class QSeries {
public:
  QSeries(std::uint32_t p, std::size_t prec) : p_(p), c_(prec, 0)
  {
    check_modulus(p);
    if (prec == 0)
      throw InputError("series precision must be positive");
  }

  QSeries(std::uint32_t p, std::vector<std::uint8_t> coeffs) : p_(p), c_(std::move(coeffs))
  {
    check_modulus(p);
    if (c_.empty())
      throw InputError("series precision must be positive");
    for (auto& v : c_)
      v = static_cast<std::uint8_t>(v % p);
  }

  static QSeries constant(std::uint32_t p, std::size_t prec, long long c)
  {
    QSeries s(p, prec);
    s.c_[0] = static_cast<std::uint8_t>(FpElement(c, p).value());
    return s;
  }

  static QSeries monomial(std::uint32_t p, std::size_t prec, std::size_t n, long long c = 1)
  {
    QSeries s(p, prec);
    if (n < prec)
      s.c_[n] = static_cast<std::uint8_t>(FpElement(c, p).value());
    return s;
  }

  std::uint32_t modulus() const { return p_; }
  std::size_t precision() const { return c_.size(); }
  std::uint32_t operator[](std::size_t n) const { return c_[n]; }
  std::span<const std::uint8_t> coeffs() const { return c_; }
  const std::uint8_t* data() const { return c_.data(); }

  std::size_t nonzero_count() const
  {
    return c_.size() - static_cast<std::size_t>(std::count(c_.begin(), c_.end(), 0));
  }

  bool is_zero() const
  {
    return std::all_of(c_.begin(), c_.end(), [](std::uint8_t v) { return v == 0; });
  }

  /// Index of the first nonzero coefficient, or precision() if none.
  std::size_t valuation() const
  {
    auto it = std::find_if(c_.begin(), c_.end(), [](std::uint8_t v) { return v != 0; });
    return static_cast<std::size_t>(it - c_.begin());
  }

  QSeries truncated(std::size_t prec) const
  {
    prec = std::min(prec, c_.size());
    return QSeries(p_, std::vector<std::uint8_t>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(prec)));
  }

  friend bool operator==(const QSeries&, const QSeries&) = default;

private:
  std::uint32_t p_;
  std::vector<std::uint8_t> c_;
};

struct SparseTerm {
  std::uint64_t exponent;
  std::uint32_t coeff;
  friend bool operator==(const SparseTerm&, const SparseTerm&) = default;
};

class SparseSeries {
public:
  SparseSeries(std::uint32_t p, std::size_t prec, std::vector<SparseTerm> terms)
      : p_(p), prec_(prec), terms_(std::move(terms))
  {
    check_modulus(p);
    std::uint64_t last = 0;
    bool first = true;
    for (auto& t : terms_) {
      if (t.exponent >= prec_ || t.coeff == 0 || t.coeff >= p_ || (!first && t.exponent <= last))
        throw InputError("malformed sparse series");
      last = t.exponent;
      first = false;
    }
  }

  std::uint32_t modulus() const { return p_; }
  std::size_t precision() const { return prec_; }
  const std::vector<SparseTerm>& terms() const { return terms_; }

  QSeries to_dense() const
  {
    std::vector<std::uint8_t> c(prec_, 0);
    for (auto& t : terms_)
      c[t.exponent] = static_cast<std::uint8_t>(t.coeff);
    return QSeries(p_, std::move(c));
  }

  /// V_m: q -> q^m, keeping precision.
  SparseSeries frobenius(std::uint64_t m) const
  {
    std::vector<SparseTerm> t;
    for (auto& x : terms_)
      if (x.exponent * m < prec_)
        t.push_back({x.exponent * m, x.coeff});
    return SparseSeries(p_, prec_, std::move(t));
  }

private:
  std::uint32_t p_;
  std::size_t prec_;
  std::vector<SparseTerm> terms_;
};

namespace detail {

/// uint32 accumulator for Σ c·src shifted; reduces mod p before it could overflow.
class Accumulator {
public:
  Accumulator(std::uint32_t p, std::size_t len) : p_(p), acc_(len, 0)
  {
    std::uint64_t sq = std::uint64_t(p - 1) * (p - 1);
    budget_ = static_cast<std::uint32_t>((std::numeric_limits<std::uint32_t>::max() - (p - 1)) / sq);
  }

  void seed(std::span<const std::uint8_t> v)
  {
    for (std::size_t i = 0; i < v.size() && i < acc_.size(); ++i)
      acc_[i] = v[i];
  }

  /// acc[offset + i] += c * src[i] for i < len.
  void axpy(std::size_t offset, const std::uint8_t* src, std::size_t len, std::uint32_t c)
  {
    if (used_ >= budget_)
      reduce();
    std::uint32_t* dst = acc_.data() + offset;
    for (std::size_t i = 0; i < len; ++i)
      dst[i] += c * src[i];
    ++used_;
  }

  void reduce()
  {
    for (auto& v : acc_)
      v %= p_;
    used_ = 0;
  }

  std::vector<std::uint8_t> finish()
  {
    std::vector<std::uint8_t> out(acc_.size());
    for (std::size_t i = 0; i < acc_.size(); ++i)
      out[i] = static_cast<std::uint8_t>(acc_[i] % p_);
    return out;
  }

private:
  std::uint32_t p_;
  std::vector<std::uint32_t> acc_;
  std::uint32_t budget_;
  std::uint32_t used_ = 0;
};

inline void same_modulus(std::uint32_t a, std::uint32_t b)
{
  if (a != b)
    throw InputError("mismatched moduli");
}

} // namespace detail

inline QSeries add(const QSeries& a, const QSeries& b)
{
  detail::same_modulus(a.modulus(), b.modulus());
  std::size_t n = std::min(a.precision(), b.precision());
  std::vector<std::uint8_t> c(n);
  std::uint32_t p = a.modulus();
  for (std::size_t i = 0; i < n; ++i)
    c[i] = static_cast<std::uint8_t>((a[i] + b[i]) % p);
  return QSeries(p, std::move(c));
}

inline QSeries scale(const QSeries& a, long long s)
{
  std::uint32_t p = a.modulus();
  std::uint32_t k = FpElement(s, p).value();
  std::vector<std::uint8_t> c(a.precision());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = static_cast<std::uint8_t>(a[i] * k % p);
  return QSeries(p, std::move(c));
}

inline QSeries sub(const QSeries& a, const QSeries& b) { return add(a, scale(b, -1)); }

/// Truncated product at min precision. The sparser operand drives the outer loop,
/// so dense×sparse costs (#nonzeros)·prec and dense×dense is plain schoolbook.
inline QSeries mul(const QSeries& a, const QSeries& b)
{
  detail::same_modulus(a.modulus(), b.modulus());
  std::size_t n = std::min(a.precision(), b.precision());
  const QSeries& outer = a.nonzero_count() <= b.nonzero_count() ? a : b;
  const QSeries& inner = &outer == &a ? b : a;
  std::size_t start = inner.valuation();
  detail::Accumulator acc(a.modulus(), n);
  for (std::size_t i = 0; i + start < n; ++i) {
    std::uint32_t c = outer[i];
    if (c)
      acc.axpy(i + start, inner.data() + start, n - i - start, c);
  }
  return QSeries(a.modulus(), acc.finish());
}

/// Dense × sparse, truncated to the dense operand's precision.
inline QSeries mul(const QSeries& a, const SparseSeries& s)
{
  detail::same_modulus(a.modulus(), s.modulus());
  std::size_t n = std::min(a.precision(), s.precision());
  std::size_t start = a.valuation();
  detail::Accumulator acc(a.modulus(), n);
  for (auto& t : s.terms()) {
    if (t.exponent + start >= n)
      break;
    acc.axpy(t.exponent + start, a.data() + start, n - t.exponent - start, t.coeff);
  }
  return QSeries(a.modulus(), acc.finish());
}

inline QSeries pow(const QSeries& a, std::uint64_t e)
{
  QSeries result = QSeries::constant(a.modulus(), a.precision(), 1);
  QSeries base = a;
  while (e) {
    if (e & 1)
      result = mul(result, base);
    e >>= 1;
    if (e)
      base = mul(base, base);
  }
  return result;
}

/// Σ c_i·s_i at the minimum precision of the inputs.
inline QSeries linear_combine(const std::vector<std::pair<FpElement, QSeries>>& terms)
{
  if (terms.empty())
    throw InputError("linear_combine needs at least one term");
  std::uint32_t p = terms.front().second.modulus();
  std::size_t n = terms.front().second.precision();
  for (auto& [c, s] : terms) {
    detail::same_modulus(p, s.modulus());
    detail::same_modulus(p, c.modulus());
    n = std::min(n, s.precision());
  }
  detail::Accumulator acc(p, n);
  for (auto& [c, s] : terms)
    if (c.value())
      acc.axpy(0, s.data(), n, c.value());
  return QSeries(p, acc.finish());
}

/// Σ_{m(m+1)/2 < prec} (-1)^m (2m+1) q^{m(m+1)/2} mod p.
inline SparseSeries eta_cubed(std::uint32_t p, std::size_t prec)
{
  check_modulus(p);
  if (prec == 0)
    throw InputError("series precision must be positive");
  std::vector<SparseTerm> terms;
  for (std::uint64_t m = 0; m * (m + 1) / 2 < prec; ++m) {
    long long v = static_cast<long long>(2 * m + 1) * (m % 2 ? -1 : 1);
    std::uint32_t c = FpElement(v, p).value();
    if (c)
      terms.push_back({m * (m + 1) / 2, c});
  }
  return SparseSeries(p, prec, std::move(terms));
}

namespace detail {

/// g · (η³)^e: one sparse pass per unit of each base-p digit of e, using (η³)^{p^i} = V_{p^i}(η³).
inline QSeries times_eta_cubed_power(QSeries g, std::uint64_t e)
{
  std::uint32_t p = g.modulus();
  SparseSeries eta = eta_cubed(p, g.precision());
  std::uint64_t scale = 1;
  while (e) {
    std::uint64_t d = e % p;
    if (d) {
      SparseSeries factor = eta.frobenius(scale);
      for (std::uint64_t i = 0; i < d; ++i)
        g = mul(g, factor);
    }
    e /= p;
    if (scale > g.precision())
      break;
    scale *= p;
  }
  return g;
}

inline QSeries shift_up(const QSeries& g, std::size_t by, std::size_t prec)
{
  std::vector<std::uint8_t> c(prec, 0);
  for (std::size_t i = 0; i + by < prec && i < g.precision(); ++i)
    c[i + by] = static_cast<std::uint8_t>(g[i]);
  return QSeries(g.modulus(), std::move(c));
}

} // namespace detail

/// Δ^k mod p to prec terms, Δ = q·(η³)^8. Cost O(k·p·log_p(8k)·√prec·prec) byte ops.
inline QSeries delta_power(std::uint32_t p, std::uint64_t k, std::size_t prec)
{
  check_modulus(p);
  if (prec == 0)
    throw InputError("series precision must be positive");
  if (k >= prec)
    return QSeries(p, prec);
  QSeries g = QSeries::constant(p, prec - k, 1);
  g = detail::times_eta_cubed_power(std::move(g), 8 * k);
  return detail::shift_up(g, k, prec);
}

/// Δ^0..Δ^max_k mod p, built incrementally (each step multiplies by q·(η³)^8).
inline std::vector<QSeries> delta_powers(std::uint32_t p, std::uint64_t max_k, std::size_t prec)
{
  check_modulus(p);
  std::vector<QSeries> out;
  out.push_back(QSeries::constant(p, prec, 1));
  for (std::uint64_t j = 1; j <= max_k; ++j) {
    QSeries g = detail::times_eta_cubed_power(out.back(), 8);
    out.push_back(detail::shift_up(g, 1, prec));
  }
  return out;
}

/// E_4 = 1 + 240Σσ_3 q^n, E_6 = 1 − 504Σσ_5 q^n, mod p.
inline QSeries eisenstein(std::uint32_t p, int k, std::size_t prec)
{
  check_modulus(p);
  if (k != 4 && k != 6)
    throw InputError("unsupported Eisenstein weight " + std::to_string(k));
  if (prec == 0)
    throw InputError("series precision must be positive");
  long long lead = k == 4 ? 240 : -504;
  std::uint32_t c0 = FpElement(lead, p).value();
  std::vector<std::uint8_t> c(prec, 0);
  c[0] = 1;
  if (c0 == 0)
    return QSeries(p, std::move(c));
  std::vector<std::uint32_t> sigma(prec, 0);
  for (std::size_t d = 1; d < prec; ++d) {
    auto w = static_cast<std::uint32_t>(powmod(d, k - 1, p));
    if (!w)
      continue;
    for (std::size_t n = d; n < prec; n += d)
      sigma[n] += w;
  }
  for (std::size_t n = 1; n < prec; ++n)
    c[n] = static_cast<std::uint8_t>(sigma[n] % p * c0 % p);
  return QSeries(p, std::move(c));
}

namespace detail {

/// Process-wide store of Δ-powers per p at the largest precision requested so far.
class DeltaCache {
public:
  static DeltaCache& instance()
  {
    static DeltaCache c;
    return c;
  }

  std::vector<QSeries> get(std::uint32_t p, std::uint64_t max_k, std::size_t prec)
  {
    std::lock_guard lock(mu_);
    auto it = store_.find(p);
    if (it == store_.end() || it->second.front().precision() < prec) {
      store_.insert_or_assign(p, delta_powers(p, max_k, prec));
      it = store_.find(p);
    }
    auto& v = it->second;
    while (v.size() <= max_k) {
      QSeries g = times_eta_cubed_power(v.back(), 8);
      v.push_back(shift_up(g, 1, v.back().precision()));
    }
    std::vector<QSeries> out;
    for (std::uint64_t j = 0; j <= max_k; ++j)
      out.push_back(v[j].precision() == prec ? v[j] : v[j].truncated(prec));
    return out;
  }

private:
  std::mutex mu_;
  std::map<std::uint32_t, std::vector<QSeries>> store_;
};

} // namespace detail

} // namespace lacunary

#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "qseries.hpp"

namespace lacunary {

/// A q-series together with an integral weight lift.
struct GradedForm {
  QSeries series;
  int weight;

  std::uint32_t modulus() const { return series.modulus(); }
  std::size_t precision() const { return series.precision(); }
};

inline void check_weight(int k)
{
  if (k < 0 || k % 2)
    throw InputError("weight must be even and non-negative, got " + std::to_string(k));
}

inline std::size_t level_one_dimension(int k)
{
  check_weight(k);
  return static_cast<std::size_t>(k / 12 + (k % 12 == 2 ? 0 : 1));
}

/// Sturm bound for level one.
inline std::size_t sturm_bound(int k) { return static_cast<std::size_t>(k / 12 + 1); }

/// Echelon basis of M_k(1, F_p): element i is q^i + O(q^dim).
class WeightBasis {
public:
  WeightBasis(std::uint32_t p, int k, std::vector<QSeries> basis) : p_(p), k_(k), basis_(std::move(basis)) {}

  std::uint32_t modulus() const { return p_; }
  int weight() const { return k_; }
  std::size_t dim() const { return basis_.size(); }
  std::size_t precision() const { return basis_.empty() ? 0 : basis_.front().precision(); }
  const QSeries& element(std::size_t i) const { return basis_[i]; }
  const std::vector<QSeries>& elements() const { return basis_; }

private:
  std::uint32_t p_;
  int k_;
  std::vector<QSeries> basis_;
};

namespace detail {

/// Exponents (a, b) with 4a + 6b = w, preferring whichever of E4, E6 is ≡ 1 mod p.
inline std::pair<int, int> eisenstein_exponents(int w, std::uint32_t p)
{
  bool e4_one = 240 % p == 0;
  bool e6_one = 504 % p == 0;
  if (e4_one && !e6_one) {
    for (int b = 0; 6 * b <= w; ++b)
      if ((w - 6 * b) % 4 == 0)
        return {(w - 6 * b) / 4, b};
  }
  for (int a = 0; 4 * a <= w; ++a)
    if ((w - 4 * a) % 6 == 0)
      return {a, (w - 4 * a) / 6};
  throw InputError("no Eisenstein monomial of weight " + std::to_string(w));
}

} // namespace detail

/// Miller basis of weight k to prec terms. Monomials Δ^j E4^a E6^b are echelonized
/// mod p; pivots are 1 and multipliers integral, so this equals reducing the integral basis.
inline WeightBasis miller_basis(std::uint32_t p, int k, std::size_t prec)
{
  check_modulus(p);
  std::size_t d = level_one_dimension(k);
  if (d == 0)
    throw InputError("weight " + std::to_string(k) + " has no nonzero level-one forms");
  if (prec < d)
    throw InputError("precision too small: need at least " + std::to_string(d) + " coefficients");
  auto deltas = detail::DeltaCache::instance().get(p, d - 1, prec);
  std::map<std::pair<int, int>, QSeries> epart;
  std::optional<QSeries> e4, e6;
  std::vector<QSeries> mono;
  for (std::size_t j = 0; j < d; ++j) {
    int w = k - 12 * static_cast<int>(j);
    auto [a, b] = detail::eisenstein_exponents(w, p);
    bool trivial4 = a == 0 || 240 % p == 0;
    bool trivial6 = b == 0 || 504 % p == 0;
    if (trivial4 && trivial6) {
      mono.push_back(deltas[j]);
      continue;
    }
    auto key = std::make_pair(trivial4 ? 0 : a, trivial6 ? 0 : b);
    auto it = epart.find(key);
    if (it == epart.end()) {
      QSeries e = QSeries::constant(p, prec, 1);
      if (key.first) {
        if (!e4)
          e4 = eisenstein(p, 4, prec);
        e = mul(e, pow(*e4, key.first));
      }
      if (key.second) {
        if (!e6)
          e6 = eisenstein(p, 6, prec);
        e = mul(e, pow(*e6, key.second));
      }
      it = epart.emplace(key, std::move(e)).first;
    }
    mono.push_back(mul(deltas[j], it->second));
  }
  std::vector<QSeries> basis(d, QSeries(p, prec));
  for (std::size_t j = d; j-- > 0;) {
    QSeries b = mono[j];
    for (std::size_t i = j + 1; i < d; ++i) {
      std::uint32_t c = b[i];
      if (c)
        b = add(b, scale(basis[i], -static_cast<long long>(c)));
    }
    basis[j] = std::move(b);
  }
  return WeightBasis(p, k, std::move(basis));
}

namespace detail {

class BasisCache {
public:
  static BasisCache& instance()
  {
    static BasisCache c;
    return c;
  }

  WeightBasis get(std::uint32_t p, int k, std::size_t prec)
  {
    {
      std::lock_guard lock(mu_);
      auto it = store_.find({p, k});
      if (it != store_.end() && it->second.precision() >= prec)
        return truncate(it->second, prec);
    }
    WeightBasis b = miller_basis(p, k, prec);
    std::lock_guard lock(mu_);
    auto it = store_.find({p, k});
    if (it == store_.end() || it->second.precision() < prec)
      store_.insert_or_assign({p, k}, b);
    return b;
  }

private:
  static WeightBasis truncate(const WeightBasis& b, std::size_t prec)
  {
    if (b.precision() == prec)
      return b;
    std::vector<QSeries> v;
    for (auto& s : b.elements())
      v.push_back(s.truncated(prec));
    return WeightBasis(b.modulus(), b.weight(), std::move(v));
  }

  std::mutex mu_;
  std::map<std::pair<std::uint32_t, int>, WeightBasis> store_;
};

} // namespace detail

/// Cached miller_basis.
inline WeightBasis weight_basis(std::uint32_t p, int k, std::size_t prec)
{
  return detail::BasisCache::instance().get(p, k, prec);
}

inline QSeries from_coordinates(const Vec& coords, const WeightBasis& basis, std::size_t prec)
{
  if (coords.size() != basis.dim())
    throw InputError("coordinate vector has wrong length");
  std::optional<WeightBasis> regen;
  if (prec > basis.precision())
    regen = weight_basis(basis.modulus(), basis.weight(), prec);
  const WeightBasis& local = regen ? *regen : basis;
  std::uint32_t p = basis.modulus();
  detail::Accumulator acc(p, prec);
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] % p)
      acc.axpy(0, local.element(i).data(), prec, coords[i] % p);
  return QSeries(p, acc.finish());
}

/// Coordinates in the echelon basis, verified against every known coefficient of f.
inline Vec to_coordinates(const GradedForm& f, const WeightBasis& basis)
{
  if (f.weight != basis.weight())
    throw InputError("weight mismatch");
  if (f.modulus() != basis.modulus())
    throw InputError("mismatched moduli");
  if (f.precision() < basis.dim())
    throw InputError("precision too small for coordinates");
  Vec c(basis.dim());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = f.series[i];
  QSeries back = from_coordinates(c, basis, f.precision());
  for (std::size_t n = 0; n < f.precision(); ++n)
    if (back[n] != f.series[n])
      throw NotInSpan("not in span: weight " + std::to_string(f.weight) + " reconstruction differs at index " + std::to_string(n));
  return c;
}

/// Smallest weight k' ≡ k (mod p−1), k' ≤ k, whose space contains the series
/// (checked on all known coefficients; precision should exceed the Sturm bound of k).
inline int minimal_weight(const QSeries& s, int k)
{
  check_weight(k);
  std::uint32_t p = s.modulus();
  if (s.is_zero())
    return k % static_cast<int>(p - 1);
  for (int w = k % static_cast<int>(p - 1); w <= k; w += static_cast<int>(p - 1)) {
    if (level_one_dimension(w) == 0 || level_one_dimension(w) > s.precision())
      continue;
    try {
      to_coordinates(GradedForm{s, w}, weight_basis(p, w, s.precision()));
      return w;
    } catch (const NotInSpan&) {
    }
  }
  throw NotInSpan("not in span: series is not a form of weight " + std::to_string(k));
}

} // namespace lacunary

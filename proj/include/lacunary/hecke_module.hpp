#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "hecke_ops.hpp"
#include "linalg.hpp"
#include "weight_basis.hpp"

namespace lacunary {

struct ModuleOptions {
  std::uint64_t generator_bound = 50;
  std::uint64_t sample_bound = 2000;
  std::size_t dimension_cap = 64;
  std::size_t slack = 8;
  /// Throw ConductorNotFound when no congruence conductor explains all samples.
  bool require_conductor = true;
  std::uint64_t seed = 0;
};

/// T_ℓ on the whole space M_k(1, F_p) in echelon coordinates, computed on demand.
class AmbientHecke {
public:
  AmbientHecke(std::uint32_t p, int k, std::size_t slack = 8)
      : p_(p), k_(k), d_(level_one_dimension(k)), slack_(slack)
  {
    check_modulus(p);
    if (d_ == 0)
      throw InputError("weight " + std::to_string(k) + " has no nonzero level-one forms");
  }

  std::uint32_t modulus() const { return p_; }
  int weight() const { return k_; }
  std::size_t dim() const { return d_; }

  /// Makes the basis long enough for every ℓ ≤ max_ell.
  void prepare(std::uint64_t max_ell)
  {
    std::lock_guard lock(mu_);
    ensure(max_ell);
  }

  FpMatrix T(std::uint64_t ell)
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(ell);
    if (it != cache_.end())
      return it->second;
    if (!is_prime(ell) || ell == p_)
      throw InputError("ambient T_ell needs a prime ell != p");
    ensure(ell);
    std::size_t D = d_ + slack_;
    std::uint32_t s = ell_s_ell(ell, k_, p_);
    std::vector<Vec> cols;
    for (std::size_t i = 0; i < d_; ++i) {
      const QSeries& b = basis_->element(i);
      Vec vals(D);
      for (std::size_t n = 0; n < D; ++n) {
        std::uint32_t v = b[ell * n];
        if (n % ell == 0)
          v += s * b[n / ell];
        vals[n] = v % p_;
      }
      Vec c(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(d_));
      for (std::size_t n = d_; n < D; ++n) {
        std::uint64_t r = 0;
        for (std::size_t j = 0; j < d_; ++j)
          r += std::uint64_t(c[j]) * basis_->element(j)[n];
        if (r % p_ != vals[n])
          throw MathError("T_" + std::to_string(ell) + " image left the weight space");
      }
      cols.push_back(std::move(c));
    }
    auto m = FpMatrix::from_columns(p_, d_, cols);
    cache_.emplace(ell, m);
    return m;
  }

  /// U_p ≡ T_p on M_k mod p (k ≥ 1); constants are fixed.
  FpMatrix U()
  {
    std::lock_guard lock(mu_);
    std::size_t D = d_ + slack_;
    std::size_t need = p_ * D;
    if (!basis_ || basis_->precision() < need)
      basis_ = weight_basis(p_, k_, std::max(need, basis_ ? basis_->precision() : 0));
    std::vector<Vec> cols;
    for (std::size_t i = 0; i < d_; ++i) {
      const QSeries& b = basis_->element(i);
      Vec c(d_);
      for (std::size_t n = 0; n < d_; ++n)
        c[n] = b[p_ * n];
      for (std::size_t n = d_; n < D; ++n) {
        std::uint64_t r = 0;
        for (std::size_t j = 0; j < d_; ++j)
          r += std::uint64_t(c[j]) * basis_->element(j)[n];
        if (r % p_ != b[p_ * n])
          throw MathError("U_p image left the weight space");
      }
      cols.push_back(std::move(c));
    }
    return FpMatrix::from_columns(p_, d_, cols);
  }

  QSeries series(const Vec& coords, std::size_t prec) const
  {
    return from_coordinates(coords, weight_basis(p_, k_, std::max(prec, d_)), prec);
  }

  /// Row vector φ with φ·coords = a_n of the form.
  Vec coefficient_functional(std::size_t n)
  {
    std::lock_guard lock(mu_);
    if (!basis_ || basis_->precision() <= n)
      basis_ = weight_basis(p_, k_, std::max<std::size_t>(n + 1, d_ + slack_));
    Vec phi(d_);
    for (std::size_t i = 0; i < d_; ++i)
      phi[i] = basis_->element(i)[n];
    return phi;
  }

  Vec coordinates(const GradedForm& f) const
  {
    if (f.weight != k_)
      throw InputError("weight mismatch");
    return to_coordinates(f, weight_basis(p_, k_, std::max(f.precision(), d_)));
  }

private:
  void ensure(std::uint64_t max_ell)
  {
    std::size_t D = d_ + slack_;
    std::size_t need = static_cast<std::size_t>(max_ell) * (D - 1) + 1;
    if (!basis_ || basis_->precision() < need)
      basis_ = weight_basis(p_, k_, need);
  }

  std::uint32_t p_;
  int k_;
  std::size_t d_;
  std::size_t slack_;
  std::optional<WeightBasis> basis_;
  std::map<std::uint64_t, FpMatrix> cache_;
  std::mutex mu_;
};

inline std::shared_ptr<AmbientHecke> ambient_hecke(std::uint32_t p, int k, std::size_t slack = 8)
{
  static std::mutex mu;
  static std::map<std::tuple<std::uint32_t, int, std::size_t>, std::shared_ptr<AmbientHecke>> store;
  std::lock_guard lock(mu);
  auto key = std::make_tuple(p, k, slack);
  auto it = store.find(key);
  if (it == store.end())
    it = store.emplace(key, std::make_shared<AmbientHecke>(p, k, slack)).first;
  return it->second;
}

enum class ClassStatus { Nilpotent, Invertible, Mixed };

inline const char* to_string(ClassStatus s)
{
  switch (s) {
  case ClassStatus::Nilpotent: return "nilpotent";
  case ClassStatus::Invertible: return "invertible";
  case ClassStatus::Mixed: return "mixed";
  }
  return "?";
}

inline ClassStatus status_of(const FpMatrix& m)
{
  if (is_nilpotent(m))
    return ClassStatus::Nilpotent;
  if (determinant(m) != 0)
    return ClassStatus::Invertible;
  return ClassStatus::Mixed;
}

/// Restriction of an ambient operator to a stable subspace, in the subspace's coordinates.
inline FpMatrix restrict_to(const FpMatrix& a, const Subspace& s)
{
  std::vector<Vec> cols;
  for (auto& row : s.basis()) {
    Vec img = a.apply(row);
    if (!s.contains(img))
      throw MathError("operator does not preserve the subspace");
    cols.push_back(s.coordinates(img));
  }
  return FpMatrix::from_columns(a.modulus(), s.dim(), cols);
}

/// The Hecke module Af with every sampled Frobenius action.
struct HeckeModule {
  std::uint32_t p = 3;
  int weight = 0;
  std::shared_ptr<AmbientHecke> ambient;
  Subspace span{3, 0};
  Vec seed;
  ModuleOptions options;

  /// Distinct T_ℓ matrices over sampled ℓ, and which image each ℓ realizes.
  std::vector<FpMatrix> images;
  std::vector<ClassStatus> image_status;
  std::map<std::uint64_t, std::size_t> prime_image;

  std::optional<std::uint64_t> conductor;
  std::map<std::uint64_t, FpMatrix> class_matrices;
  std::optional<std::uint64_t> nilpotent_conductor;
  std::map<std::uint64_t, FpMatrix> nilpotent_class_matrices;
  std::uint64_t status_modulus = 0;
  std::map<std::uint64_t, ClassStatus> class_status;
  std::string conductor_diagnostic;

  std::size_t dim() const { return span.dim(); }

  std::uint32_t scalar(std::uint64_t u) const { return ell_s_ell(u, weight, p); }

  Vec to_ambient(const Vec& coords) const { return span.combine(coords); }
  Vec from_ambient(const Vec& v) const { return span.coordinates(v); }

  QSeries series(const Vec& coords, std::size_t prec) const { return ambient->series(to_ambient(coords), prec); }

  /// a_n as a linear functional on module coordinates.
  Vec coefficient_functional(std::size_t n) const
  {
    Vec phi = ambient->coefficient_functional(n);
    Vec out(dim());
    for (std::size_t j = 0; j < dim(); ++j) {
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < phi.size(); ++i)
        s += std::uint64_t(phi[i]) * span.basis()[j][i];
      out[j] = static_cast<std::uint32_t>(s % p);
    }
    return out;
  }

  /// T_ℓ on Af computed from q-expansions (independent of the class tables).
  FpMatrix direct_operator(std::uint64_t ell) const { return restrict_to(ambient->T(ell), span); }

  bool is_pure() const
  {
    return std::none_of(image_status.begin(), image_status.end(), [](ClassStatus s) { return s == ClassStatus::Mixed; });
  }

  /// T_ℓ for a prime ℓ from class data (full conductor), else sampled or direct.
  FpMatrix operator_for_prime(std::uint64_t ell) const
  {
    if (conductor) {
      auto it = class_matrices.find(ell % *conductor);
      if (it == class_matrices.end())
        throw ConductorNotFound("class " + std::to_string(ell % *conductor) + " has no matrix");
      return it->second;
    }
    auto it = prime_image.find(ell);
    if (it != prime_image.end())
      return images[it->second];
    return direct_operator(ell);
  }

  ClassStatus status_of_prime(std::uint64_t ell) const
  {
    auto it = class_status.find(ell % status_modulus);
    if (it == class_status.end())
      throw MathError("no status for class " + std::to_string(ell % status_modulus));
    return it->second;
  }
};

namespace detail {

struct ConductorSearch {
  std::optional<std::uint64_t> modulus;
  std::map<std::uint64_t, std::size_t> class_value;
  std::string diagnostic;
};

/// Smallest candidate c such that value(ℓ) depends only on ℓ mod c over the given primes,
/// and every class in `required(c)` is sampled.
template <class Value, class Required>
ConductorSearch find_conductor(const std::vector<std::uint64_t>& candidates, const std::vector<std::uint64_t>& primes,
                               Value value, Required required)
{
  ConductorSearch out;
  std::ostringstream diag;
  for (auto c : candidates) {
    std::map<std::uint64_t, std::pair<std::size_t, std::uint64_t>> seen;
    bool ok = true;
    for (auto ell : primes) {
      auto [it, fresh] = seen.emplace(ell % c, std::make_pair(value(ell), ell));
      if (!fresh && it->second.first != value(ell)) {
        diag << "mod " << c << ": primes " << it->second.second << " and " << ell << " act differently; ";
        ok = false;
        break;
      }
    }
    if (ok) {
      for (std::uint64_t u = 1; u < c; ++u) {
        if (std::gcd(u, c) != 1 || !required(u, c) || seen.count(u))
          continue;
        diag << "mod " << c << ": class " << u << " not sampled; ";
        ok = false;
        break;
      }
    }
    if (ok) {
      out.modulus = c;
      for (auto& [u, v] : seen)
        out.class_value[u] = v.first;
      return out;
    }
  }
  out.diagnostic = diag.str();
  return out;
}

} // namespace detail

/// Builds Af for a vector of the ambient space M_k.
inline HeckeModule build_module_from_vector(std::shared_ptr<AmbientHecke> amb, const Vec& v, const ModuleOptions& opt = {})
{
  if (opt.generator_bound < 2 || opt.sample_bound < opt.generator_bound)
    throw InputError("need 2 ≤ generator_bound ≤ sample_bound");
  if (is_zero_vec(v))
    throw InputError("the zero form has no Hecke module");
  std::uint32_t p = amb->modulus();
  HeckeModule m;
  m.p = p;
  m.weight = amb->weight();
  m.ambient = amb;
  m.options = opt;
  amb->prepare(opt.sample_bound);

  std::vector<std::uint64_t> primes;
  for (auto ell : primes_up_to(opt.sample_bound))
    if (ell != p)
      primes.push_back(ell);
  std::vector<std::uint64_t> order;
  for (auto ell : primes)
    if (ell <= opt.generator_bound)
      order.push_back(ell);
  for (auto ell : primes)
    if (ell > opt.generator_bound)
      order.push_back(ell);

  Subspace span(p, amb->dim());
  span.add(v);
  std::vector<Vec> queue{v};
  std::vector<FpMatrix> ops;
  for (auto ell : order)
    ops.push_back(amb->T(ell));
  // Generators first; the remaining sampled primes catch anything they miss.
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (auto& op : ops) {
      Vec w = op.apply(queue[head]);
      if (span.add(w)) {
        queue.push_back(w);
        if (span.dim() > opt.dimension_cap)
          throw SpanNotClosed("span not closed: module dimension exceeds " + std::to_string(opt.dimension_cap));
      }
    }
  }
  m.span = span;
  m.seed = span.coordinates(v);

  std::map<FpMatrix, std::size_t> index;
  for (std::size_t i = 0; i < order.size(); ++i) {
    FpMatrix r = restrict_to(ops[i], span);
    auto [it, fresh] = index.emplace(r, m.images.size());
    if (fresh) {
      m.images.push_back(r);
      m.image_status.push_back(status_of(r));
    }
    m.prime_image[order[i]] = it->second;
  }

  std::vector<std::uint64_t> candidates;
  for (std::uint64_t c = p, i = 0; i < 4; ++i, c *= p)
    candidates.push_back(c);
  auto image_of = [&](std::uint64_t ell) { return m.prime_image.at(ell); };
  auto status_value = [&](std::uint64_t ell) { return static_cast<std::size_t>(m.image_status[image_of(ell)]); };
  auto all = [](std::uint64_t, std::uint64_t) { return true; };

  auto st = detail::find_conductor(candidates, primes, status_value, all);
  if (!st.modulus)
    throw ConductorNotFound("conductor not found: nilpotent/invertible status is not a congruence condition (" + st.diagnostic + ")");
  m.status_modulus = *st.modulus;
  for (auto& [u, s] : st.class_value)
    m.class_status[u] = static_cast<ClassStatus>(s);

  std::ostringstream diag;
  auto full = detail::find_conductor(candidates, primes, image_of, all);
  if (full.modulus) {
    m.conductor = full.modulus;
    for (auto& [u, i] : full.class_value)
      m.class_matrices[u] = m.images[i];
  } else {
    diag << full.diagnostic;
  }

  std::vector<std::uint64_t> nil_primes;
  for (auto ell : primes)
    if (m.image_status[image_of(ell)] == ClassStatus::Nilpotent)
      nil_primes.push_back(ell);
  auto nil_required = [&](std::uint64_t u, std::uint64_t c) {
    if (c % m.status_modulus)
      return true;
    return m.class_status.at(u % m.status_modulus) == ClassStatus::Nilpotent;
  };
  auto nil = detail::find_conductor(candidates, nil_primes, image_of, nil_required);
  if (nil.modulus) {
    m.nilpotent_conductor = nil.modulus;
    for (auto& [u, i] : nil.class_value)
      m.nilpotent_class_matrices[u] = m.images[i];
  } else {
    diag << nil.diagnostic;
  }
  m.conductor_diagnostic = diag.str();
  if (opt.require_conductor && !m.conductor)
    throw ConductorNotFound("conductor not found: " + m.conductor_diagnostic);
  return m;
}

inline void check_in_F(const QSeries& s)
{
  for (std::size_t n = 0; n < s.precision(); n += s.modulus())
    if (s[n])
      throw InputError("form has a nonzero coefficient at an index divisible by p; apply W first");
}

inline HeckeModule build_module(const GradedForm& f, const ModuleOptions& opt = {})
{
  check_in_F(f.series);
  auto amb = ambient_hecke(f.modulus(), f.weight, opt.slack);
  return build_module_from_vector(amb, amb->coordinates(f), opt);
}

struct ClassEntry {
  std::uint64_t residue;
  std::optional<FpMatrix> matrix;
  ClassStatus status;
};

struct ClassReport {
  std::uint64_t modulus;
  std::vector<ClassEntry> classes;
  std::vector<std::uint64_t> invertible_classes;
  std::vector<std::uint64_t> nilpotent_classes;
  bool pure;
};

/// Per-class matrices mod the conductor when one exists, else statuses mod the status modulus.
inline ClassReport classify_classes(const HeckeModule& m)
{
  ClassReport r;
  r.pure = m.is_pure();
  if (m.conductor) {
    r.modulus = *m.conductor;
    for (auto& [u, mat] : m.class_matrices)
      r.classes.push_back({u, mat, status_of(mat)});
  } else {
    r.modulus = m.status_modulus;
    for (auto& [u, s] : m.class_status)
      r.classes.push_back({u, std::nullopt, s});
  }
  for (auto& [u, s] : m.class_status) {
    if (s == ClassStatus::Invertible)
      r.invertible_classes.push_back(u);
    if (s == ClassStatus::Nilpotent)
      r.nilpotent_classes.push_back(u);
  }
  return r;
}

/// Distinct nilpotent operators among the sampled images.
inline std::vector<FpMatrix> nilpotent_images(const HeckeModule& m)
{
  std::vector<FpMatrix> out;
  for (std::size_t i = 0; i < m.images.size(); ++i)
    if (m.image_status[i] == ClassStatus::Nilpotent)
      out.push_back(m.images[i]);
  return out;
}

/// Largest h with some product of h nilpotent-class operators nonzero on v.
/// Works on subspaces W_{i+1} = Σ_N N·W_i, which is nonzero iff some length-(i+1) product is.
inline std::size_t nilpotence_height(const std::vector<FpMatrix>& nil, const Vec& v, std::uint32_t p)
{
  if (is_zero_vec(v))
    throw InputError("height of the zero vector");
  Subspace cur(p, v.size());
  cur.add(v);
  std::size_t h = 0;
  while (true) {
    Subspace next(p, v.size());
    for (auto& row : cur.basis())
      for (auto& n : nil)
        next.add(n.apply(row));
    if (next.dim() == 0)
      return h;
    cur = std::move(next);
    ++h;
    if (h > v.size())
      throw MathError("nilpotent operators are not nilpotent together");
  }
}

inline std::size_t strict_nilpotence_order(const HeckeModule& m)
{
  if (!m.is_pure())
    throw NotPure("module not pure: some T_ell is neither nilpotent nor invertible");
  return nilpotence_height(nilpotent_images(m), m.seed, m.p);
}

/// h distinct primes with T_{ℓ_1}…T_{ℓ_h} f ≠ 0, built greedily from heights.
inline std::optional<std::vector<std::uint64_t>> nilpotent_witness(const HeckeModule& m)
{
  auto nil = nilpotent_images(m);
  std::vector<std::size_t> nil_index;
  for (std::size_t i = 0; i < m.images.size(); ++i)
    if (m.image_status[i] == ClassStatus::Nilpotent)
      nil_index.push_back(i);
  Vec v = m.seed;
  std::size_t h = nilpotence_height(nil, v, m.p);
  std::vector<std::uint64_t> primes;
  std::set<std::uint64_t> used;
  while (h > 0) {
    bool stepped = false;
    for (std::size_t j = 0; j < nil.size() && !stepped; ++j) {
      Vec w = nil[j].apply(v);
      if (is_zero_vec(w) || nilpotence_height(nil, w, m.p) != h - 1)
        continue;
      for (auto& [ell, img] : m.prime_image) {
        if (img == nil_index[j] && !used.count(ell)) {
          primes.push_back(ell);
          used.insert(ell);
          v = std::move(w);
          --h;
          stepped = true;
          break;
        }
      }
    }
    if (!stepped)
      return std::nullopt;
  }
  return primes;
}

/// Finite abelian group generated by invertible operators.
struct GammaGroup {
  std::vector<FpMatrix> elements;
  bool contains_scalars = false;
  std::size_t order() const { return elements.size(); }
};

inline constexpr std::size_t gamma_group_cap = 500'000;

inline GammaGroup generate_group(const std::vector<FpMatrix>& gens, std::uint32_t p, std::size_t n)
{
  std::set<FpMatrix> group{FpMatrix::identity(p, n)};
  std::vector<FpMatrix> elems(group.begin(), group.end());
  for (auto& g : gens) {
    if (group.count(g))
      continue;
    // H' = ∪_i g^i H; abelian, so cosets of successive powers until one falls back into H.
    std::vector<FpMatrix> base = elems;
    FpMatrix power = g;
    while (!group.count(power)) {
      for (auto& h : base) {
        FpMatrix x = power * h;
        if (group.insert(x).second)
          elems.push_back(std::move(x));
      }
      if (elems.size() > gamma_group_cap)
        throw MathError("group Γ_f exceeds " + std::to_string(gamma_group_cap) + " elements");
      power = power * g;
    }
  }
  GammaGroup out;
  out.elements = std::move(elems);
  out.contains_scalars = true;
  for (std::uint32_t l = 1; l < p; ++l)
    if (!group.count(FpMatrix::scalar(p, n, l)))
      out.contains_scalars = false;
  return out;
}

inline GammaGroup gamma_group(const HeckeModule& m)
{
  std::vector<FpMatrix> gens;
  if (m.conductor) {
    for (auto& [u, mat] : m.class_matrices)
      if (determinant(mat))
        gens.push_back(mat);
  } else {
    for (std::size_t i = 0; i < m.images.size(); ++i)
      if (m.image_status[i] == ClassStatus::Invertible)
        gens.push_back(m.images[i]);
  }
  return generate_group(gens, m.p, m.dim());
}

/// One pure summand: ambient coordinates plus its nilpotent classes mod the status modulus.
struct PureSummand {
  Vec ambient;
  std::set<std::uint64_t> nilpotent_classes;
};

namespace detail {

inline bool single_eigenvalue(const FpMatrix& a, std::uint32_t p)
{
  Poly rest;
  auto roots = poly_roots(charpoly(a), p, &rest);
  return roots.size() == 1 && rest.size() == 1;
}

/// Split each space into generalized eigenspaces of op (op preserves every space).
inline std::vector<Subspace> refine(const std::vector<Subspace>& spaces, const FpMatrix& op, std::uint32_t p)
{
  std::vector<Subspace> out;
  for (auto& s : spaces) {
    FpMatrix r = restrict_to(op, s);
    Poly rest;
    auto roots = poly_roots(charpoly(r), p, &rest);
    if (rest.size() > 1)
      throw SplittingFieldNeeded("splitting field needed: a characteristic polynomial has an irreducible factor of degree " +
                                 std::to_string(rest.size() - 1));
    for (auto [lambda, mult] : roots) {
      FpMatrix shifted = r - FpMatrix::scalar(p, r.rows(), lambda);
      Subspace piece(p, s.ambient_dim());
      for (auto& k : kernel(shifted.power(r.rows())))
        piece.add(s.combine(k));
      out.push_back(std::move(piece));
    }
  }
  return out;
}

} // namespace detail

/// Joint generalized eigenspaces of all sampled operators, in module coordinates.
inline std::vector<Subspace> joint_eigenspaces(const HeckeModule& m)
{
  std::uint32_t p = m.p;
  std::size_t n = m.dim();
  Subspace whole(p, n);
  for (std::size_t i = 0; i < n; ++i)
    whole.add(unit_vec(n, i));
  for (auto& g : m.images) {
    Poly rest;
    poly_roots(charpoly(g), p, &rest);
    if (rest.size() > 1)
      throw SplittingFieldNeeded("splitting field needed: T_ell has a characteristic polynomial with an irreducible factor of degree " +
                                 std::to_string(rest.size() - 1));
  }
  std::mt19937_64 rng(m.options.seed);
  std::uniform_int_distribution<std::uint32_t> coef(0, p - 1);
  for (int attempt = 0; attempt < 8; ++attempt) {
    FpMatrix r(p, n, n);
    for (auto& g : m.images)
      r = r + g.scaled(coef(rng));
    auto spaces = detail::refine({whole}, r, p);
    bool separated = true;
    for (auto& s : spaces)
      for (auto& g : m.images)
        if (!detail::single_eigenvalue(restrict_to(g, s), p))
          separated = false;
    if (separated)
      return spaces;
  }
  // Unlucky random elements: refine one generator at a time.
  std::vector<Subspace> spaces{whole};
  for (auto& g : m.images)
    spaces = detail::refine(spaces, g, p);
  return spaces;
}

/// Canonical decomposition of the seed into pure summands (grouped by nilpotent class sets).
inline std::vector<PureSummand> decompose_module(const HeckeModule& m)
{
  std::uint32_t p = m.p;
  std::size_t n = m.dim();
  auto spaces = joint_eigenspaces(m);
  std::vector<Vec> cols;
  for (auto& s : spaces)
    for (auto& b : s.basis())
      cols.push_back(b);
  FpMatrix basis = FpMatrix::from_columns(p, n, cols);
  // Solve basis·x = seed.
  FpMatrix aug(p, n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      aug(i, j) = basis(i, j);
    aug(i, n) = m.seed[i];
  }
  rref(aug);
  Vec x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = aug(i, n);

  std::map<std::set<std::uint64_t>, Vec> grouped;
  std::size_t offset = 0;
  for (auto& s : spaces) {
    Vec part(n, 0);
    for (std::size_t j = 0; j < s.dim(); ++j)
      for (std::size_t i = 0; i < n; ++i)
        part[i] = static_cast<std::uint32_t>((part[i] + std::uint64_t(x[offset + j]) * s.basis()[j][i]) % p);
    offset += s.dim();
    if (is_zero_vec(part))
      continue;
    std::map<std::uint64_t, bool> nil_by_class;
    for (auto& [ell, img] : m.prime_image) {
      bool nil = is_nilpotent(restrict_to(m.images[img], s));
      std::uint64_t u = ell % m.status_modulus;
      auto [it, fresh] = nil_by_class.emplace(u, nil);
      if (!fresh && it->second != nil)
        throw MathError("nilpotent set of a component is not a congruence condition");
    }
    std::set<std::uint64_t> nset;
    for (auto& [u, nil] : nil_by_class)
      if (nil)
        nset.insert(u);
    auto [it, fresh] = grouped.emplace(nset, part);
    if (!fresh)
      for (std::size_t i = 0; i < n; ++i)
        it->second[i] = (it->second[i] + part[i]) % p;
  }
  std::vector<PureSummand> out;
  for (auto& [nset, v] : grouped)
    out.push_back({m.to_ambient(v), nset});
  return out;
}

inline std::vector<GradedForm> pure_decomposition(const GradedForm& f, ModuleOptions opt = {})
{
  opt.require_conductor = false;
  auto m = build_module(f, opt);
  std::vector<GradedForm> out;
  for (auto& s : decompose_module(m))
    out.push_back({m.ambient->series(s.ambient, f.precision()), f.weight});
  return out;
}

struct EquidistributionReport {
  bool criterion_holds;
  bool eigenform_converse_applies;
  bool primitive_root_shortcut;
  std::size_t gamma_order;
};

inline EquidistributionReport equidistribution_report(const HeckeModule& m)
{
  EquidistributionReport r{};
  auto g = gamma_group(m);
  r.criterion_holds = g.contains_scalars;
  r.gamma_order = g.order();
  r.primitive_root_shortcut = is_primitive_root(2, m.p);
  r.eigenform_converse_applies = false;
  if (m.dim() == 1) {
    std::set<std::uint32_t> vals;
    for (auto& e : g.elements)
      vals.insert(e(0, 0));
    r.eigenform_converse_applies = vals.size() < m.p - 1;
  }
  return r;
}

inline EquidistributionReport equidistribution_report(const GradedForm& f, ModuleOptions opt = {})
{
  opt.require_conductor = false;
  return equidistribution_report(build_module(f, opt));
}

} // namespace lacunary

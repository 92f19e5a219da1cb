#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"
#include "hecke_module.hpp"
#include "parallel.hpp"

namespace lacunary {

class Rational {
public:
  using Int = boost::multiprecision::cpp_int;

  Rational(long long n = 0, long long d = 1) : n_(n), d_(d) { normalize(); }
  Rational(Int n, Int d) : n_(std::move(n)), d_(std::move(d)) { normalize(); }

  const Int& num() const { return n_; }
  const Int& den() const { return d_; }

  double to_double() const { return static_cast<double>(n_.convert_to<long double>() / d_.convert_to<long double>()); }

  std::string to_string() const
  {
    if (d_ == 1)
      return n_.str();
    return n_.str() + "/" + d_.str();
  }

  friend Rational operator+(const Rational& a, const Rational& b) { return {a.n_ * b.d_ + b.n_ * a.d_, a.d_ * b.d_}; }
  friend Rational operator-(const Rational& a, const Rational& b) { return {a.n_ * b.d_ - b.n_ * a.d_, a.d_ * b.d_}; }
  friend Rational operator*(const Rational& a, const Rational& b) { return {a.n_ * b.n_, a.d_ * b.d_}; }
  friend Rational operator/(const Rational& a, const Rational& b)
  {
    if (b.n_ == 0)
      throw MathError("division by zero");
    return {a.n_ * b.d_, a.d_ * b.n_};
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.n_ == b.n_ && a.d_ == b.d_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.n_ * b.d_ < b.n_ * a.d_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }

private:
  void normalize()
  {
    if (d_ == 0)
      throw MathError("zero denominator");
    if (d_ < 0) {
      n_ = -n_;
      d_ = -d_;
    }
    Int g = boost::multiprecision::gcd(n_ < 0 ? Int(-n_) : n_, d_);
    if (g > 1) {
      n_ /= g;
      d_ /= g;
    }
  }

  Int n_, d_;
};

inline Rational::Int factorial(unsigned h)
{
  Rational::Int f = 1;
  for (unsigned i = 2; i <= h; ++i)
    f *= i;
  return f;
}

/// |classes| / φ(c).
inline Rational class_density(const std::set<std::uint64_t>& classes, std::uint64_t c)
{
  if (c == 0)
    throw InputError("modulus must be positive");
  for (auto u : classes)
    if (u >= c || std::gcd(u, c) != 1)
      throw InputError("class " + std::to_string(u) + " is not a unit mod " + std::to_string(c));
  return {static_cast<long long>(classes.size()), static_cast<long long>(euler_phi(c))};
}

/// Density of h-tuples drawn from the given classes: |classes|^h / (h!·φ(c)^h).
inline Rational tuple_density(const std::set<std::uint64_t>& classes, std::uint64_t c, unsigned h)
{
  Rational one = class_density(classes, c);
  Rational r(1);
  for (unsigned i = 0; i < h; ++i)
    r = r * one;
  return r / Rational(factorial(h), 1);
}

struct GroupDescriptor {
  enum class Kind { Reducible, Dihedral, A4, S4, A5, PGL2, PSL2 };
  Kind kind;
  std::uint64_t param = 0;

  /// "reducible:2", "dihedral:3", "A4", "S4", "A5", "PGL2:3", "PSL2:5" (case-insensitive).
  static GroupDescriptor parse(std::string text)
  {
    for (auto& ch : text)
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto colon = text.find(':');
    std::string name = text.substr(0, colon);
    std::uint64_t n = 0;
    if (colon != std::string::npos) {
      std::string num = text.substr(colon + 1);
      if (num.empty() || num.size() > 12 || num.find_first_not_of("0123456789") != std::string::npos)
        throw InputError("bad group parameter in '" + text + "'");
      n = std::stoull(num);
    }
    GroupDescriptor g{};
    if (name == "reducible") g.kind = Kind::Reducible;
    else if (name == "dihedral") g.kind = Kind::Dihedral;
    else if (name == "a4") g.kind = Kind::A4;
    else if (name == "s4") g.kind = Kind::S4;
    else if (name == "a5") g.kind = Kind::A5;
    else if (name == "pgl2") g.kind = Kind::PGL2;
    else if (name == "psl2") g.kind = Kind::PSL2;
    else throw InputError("unknown group '" + name + "'");
    bool needs = g.kind == Kind::Reducible || g.kind == Kind::Dihedral || g.kind == Kind::PGL2 || g.kind == Kind::PSL2;
    if (needs != (colon != std::string::npos))
      throw InputError(needs ? "group '" + name + "' needs a parameter" : "group '" + name + "' takes no parameter");
    g.param = n;
    return g;
  }

  std::string to_string() const
  {
    switch (kind) {
    case Kind::Reducible: return "reducible:" + std::to_string(param);
    case Kind::Dihedral: return "dihedral:" + std::to_string(param);
    case Kind::A4: return "A4";
    case Kind::S4: return "S4";
    case Kind::A5: return "A5";
    case Kind::PGL2: return "PGL2:" + std::to_string(param);
    case Kind::PSL2: return "PSL2:" + std::to_string(param);
    }
    return "?";
  }
};

inline bool is_odd_prime_power(std::uint64_t q)
{
  if (q < 3 || q % 2 == 0)
    return false;
  auto f = factorize(q);
  return f.size() == 1;
}

/// Proportion of trace-zero elements in the image of a mod-p representation.
inline Rational alpha_of_group(const GroupDescriptor& g)
{
  using K = GroupDescriptor::Kind;
  auto n = static_cast<long long>(g.param);
  switch (g.kind) {
  case K::Reducible:
    // The image G' ⊂ F̄_p^* contains −1 (complex conjugation), so its order is even.
    if (n < 2 || n % 2)
      throw InputError("reducible image order must be even and at least 2");
    return {1, n};
  case K::Dihedral:
    if (n < 2)
      throw InputError("dihedral parameter must be at least 2");
    return n % 2 ? Rational(1, 2) : Rational(1, 2) + Rational(1, 2 * n);
  case K::A4: return {1, 4};
  case K::S4: return {3, 8};
  case K::A5: return {1, 4};
  case K::PGL2:
  case K::PSL2:
    if (!is_odd_prime_power(g.param))
      throw InputError("q must be an odd prime power, got " + std::to_string(g.param));
    if (g.kind == K::PGL2)
      return {n, (n - 1) * (n + 1)};
    // −1 is a square in F_q iff q ≡ 1 (mod 4).
    return n % 4 == 1 ? Rational(1, n - 1) : Rational(1, n + 1);
  }
  throw InputError("unknown group");
}

/// Nilpotent class matrices and their modulus (full conductor preferred).
struct NilpotentClasses {
  std::uint64_t modulus;
  std::map<std::uint64_t, FpMatrix> matrices;
};

inline NilpotentClasses nilpotent_classes(const HeckeModule& m)
{
  NilpotentClasses out;
  if (m.conductor) {
    out.modulus = *m.conductor;
    for (auto& [u, mat] : m.class_matrices)
      if (m.status_of_prime(u) == ClassStatus::Nilpotent)
        out.matrices[u] = mat;
    return out;
  }
  if (m.nilpotent_conductor) {
    out.modulus = *m.nilpotent_conductor;
    out.matrices = m.nilpotent_class_matrices;
    return out;
  }
  throw ConductorNotFound("conductor not found for the nilpotent classes: " + m.conductor_diagnostic);
}

/// dist_t[v] = number of ordered t-tuples of nilpotent classes whose product maps `from` to v ≠ 0.
inline std::vector<std::unordered_map<Vec, std::uint64_t, VecHash>> tuple_distribution(const NilpotentClasses& nc, const Vec& from,
                                                                                      unsigned max_h)
{
  std::vector<std::unordered_map<Vec, std::uint64_t, VecHash>> dist(1);
  if (!is_zero_vec(from))
    dist[0][from] = 1;
  for (unsigned t = 1; t <= max_h; ++t) {
    std::unordered_map<Vec, std::uint64_t, VecHash> next;
    for (auto& [v, count] : dist.back())
      for (auto& [u, mat] : nc.matrices) {
        Vec w = mat.apply(v);
        if (!is_zero_vec(w))
          next[w] += count;
      }
    dist.push_back(std::move(next));
  }
  return dist;
}

/// δ(M_{f',f''}) = #D / (h!·φ(c)^h), D = ordered h-tuples of nilpotent classes with product·from = to.
inline Rational multi_frobenian_density(const HeckeModule& m, const Vec& from, const Vec& to, unsigned h)
{
  auto nc = nilpotent_classes(m);
  Rational::Int count = 0;
  if (h == 0) {
    count = from == to ? 1 : 0;
  } else {
    auto dist = tuple_distribution(nc, from, h);
    auto it = dist[h].find(to);
    if (it != dist[h].end())
      count = it->second;
  }
  Rational::Int denom = factorial(h) * boost::multiprecision::pow(Rational::Int(euler_phi(nc.modulus)), h);
  return {count, denom};
}

/// Same, summed over every nonzero target.
inline Rational multi_frobenian_density_nonzero(const HeckeModule& m, const Vec& from, unsigned h)
{
  auto nc = nilpotent_classes(m);
  auto dist = tuple_distribution(nc, from, h);
  Rational::Int count = 0;
  for (auto& [v, c] : dist[h])
    count += c;
  Rational::Int denom = factorial(h) * boost::multiprecision::pow(Rational::Int(euler_phi(nc.modulus)), h);
  return {count, denom};
}

struct Estimate {
  double value = 0;
  double error = 0;
};

inline double gamma_function(double x) { return std::tgamma(x); }

/// (1/Γ(β))·∏_{ℓ ≤ bound} w_ℓ, w_ℓ = (1+1/ℓ)(1−1/ℓ)^β for ℓ ∈ U with ℓ ∤ r, else (1−1/ℓ)^β.
/// Error: value·(exp(t)−1), t = 2/(√B ln B) + (1+β)/(2B ln B); the first term is the size of
/// the oscillating Σ_{ℓ>B}([ℓ∈U]−β)/ℓ, the second bounds the 1/ℓ² terms.
inline Estimate euler_constant_C(const std::set<std::uint64_t>& U, std::uint64_t c, const Rational& beta, std::uint64_t r,
                                 std::uint64_t prime_bound)
{
  double b = beta.to_double();
  if (!(Rational(0) < beta && beta < Rational(1)))
    throw InputError("beta must lie strictly between 0 and 1");
  if (prime_bound < 1000)
    throw InputError("prime bound must be at least 1000");
  if (r == 0)
    throw InputError("r must be positive");
  for (auto u : U)
    if (u >= c || std::gcd(u, c) != 1)
      throw InputError("class " + std::to_string(u) + " is not a unit mod " + std::to_string(c));
  auto primes = primes_up_to(prime_bound);
  constexpr std::size_t blocks = 64;
  auto parts = run_blocks<long double>(blocks, [&](std::size_t blk) {
    std::size_t lo = primes.size() * blk / blocks, hi = primes.size() * (blk + 1) / blocks;
    long double s = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      long double l = primes[i];
      s += static_cast<long double>(b) * std::log1p(-1.0L / l);
      if (U.count(primes[i] % c) && std::gcd<std::uint64_t>(primes[i], c) == 1 && r % primes[i] != 0)
        s += std::log1p(1.0L / l);
    }
    return s;
  });
  long double total = 0;
  for (auto x : parts)
    total += x;
  // Primes of r beyond the bound that lie in U still drop their (1+1/ℓ).
  for (auto [q, e] : factorize(r))
    if (q > prime_bound && U.count(q % c))
      total -= std::log1p(1.0L / static_cast<long double>(q));
  Estimate out;
  out.value = static_cast<double>(std::exp(total)) / gamma_function(b);
  double B = static_cast<double>(prime_bound), lb = std::log(B);
  double t = 2.0 / (std::sqrt(B) * lb) + (1.0 + b) / (2.0 * B * lb);
  out.error = out.value * std::expm1(t);
  return out;
}

/// Σ_{s square-full ≤ X, (s,p)=1} C(U,s)/s grouped by the vector T_s·start.
struct SquarefullWeights {
  std::unordered_map<Vec, double, VecHash> weight;
  double tail = 0;
  std::uint64_t terms = 0;
};

namespace detail {

/// T_{ℓ^e} on Af from the class matrix, cached per (class, e).
class PrimePowerOperators {
public:
  PrimePowerOperators(const HeckeModule& m) : m_(m)
  {
    if (!m.conductor)
      throw ConductorNotFound("conductor not found: square-full sums need class matrices for every class; " + m.conductor_diagnostic);
  }

  const FpMatrix& get(std::uint64_t ell, unsigned e)
  {
    std::uint64_t u = ell % *m_.conductor;
    auto& chain = cache_[u];
    if (chain.empty()) {
      chain.push_back(FpMatrix::identity(m_.p, m_.dim()));
      chain.push_back(m_.operator_for_prime(ell));
    }
    std::uint32_t s = m_.scalar(ell);
    while (chain.size() <= e) {
      std::size_t n = chain.size() - 1;
      chain.push_back(chain[n] * chain[1] - chain[n - 1].scaled(s));
    }
    return chain[e];
  }

private:
  const HeckeModule& m_;
  std::map<std::uint64_t, std::vector<FpMatrix>> cache_;
};

} // namespace detail

inline SquarefullWeights squarefull_weights(const HeckeModule& m, const Vec& start, std::uint64_t s_bound, double c_u,
                                            const std::set<std::uint64_t>& U, std::uint64_t u_modulus)
{
  if (s_bound < 1)
    throw InputError("square-full bound must be positive");
  detail::PrimePowerOperators ops(m);
  auto primes = primes_up_to(static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(s_bound))) + 1);
  std::vector<std::uint64_t> ps;
  for (auto q : primes)
    if (q != m.p && std::uint64_t(q) * q <= s_bound)
      ps.push_back(q);
  SquarefullWeights out;
  std::function<void(std::size_t, std::uint64_t, const Vec&, double)> dfs = [&](std::size_t from, std::uint64_t s, const Vec& v,
                                                                                double w) {
    out.weight[v] += w;
    ++out.terms;
    for (std::size_t i = from; i < ps.size(); ++i) {
      std::uint64_t l = ps[i];
      if (s > s_bound / (l * l))
        break;
      double factor = U.count(l % u_modulus) ? 1.0 / (1.0 + 1.0 / static_cast<double>(l)) : 1.0;
      std::uint64_t le = l * l;
      double wl = w * factor / static_cast<double>(le);
      for (unsigned e = 2; s <= s_bound / le; ++e) {
        Vec nv = ops.get(l, e).apply(v);
        if (!is_zero_vec(nv))
          dfs(i + 1, s * le, nv, wl);
        if (le > s_bound / l)
          break;
        le *= l;
        wl /= static_cast<double>(l);
      }
    }
  };
  if (!is_zero_vec(start))
    dfs(0, 1, start, c_u);
  out.tail = 2.2 / std::sqrt(static_cast<double>(s_bound)) * c_u;
  return out;
}

inline Estimate squarefull_sum(const HeckeModule& m, const Vec& start, const Vec& target, std::uint64_t s_bound, double c_u,
                               const std::set<std::uint64_t>& U, std::uint64_t u_modulus)
{
  auto w = squarefull_weights(m, start, s_bound, c_u, U, u_modulus);
  auto it = w.weight.find(target);
  return {it == w.weight.end() ? 0.0 : it->second, w.tail};
}

} // namespace lacunary

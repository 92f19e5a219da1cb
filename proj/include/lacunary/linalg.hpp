#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "arith.hpp"
#include "errors.hpp"

namespace lacunary {

using Vec = std::vector<std::uint32_t>;

struct VecHash {
  std::size_t operator()(const Vec& v) const noexcept
  {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ v.size();
    for (auto x : v) {
      h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

inline bool is_zero_vec(const Vec& v)
{
  return std::all_of(v.begin(), v.end(), [](std::uint32_t x) { return x == 0; });
}

inline Vec unit_vec(std::size_t n, std::size_t i)
{
  Vec v(n, 0);
  v[i] = 1;
  return v;
}

/// Dense matrix over F_p, row-major.
class FpMatrix {
public:
  FpMatrix() = default;
  FpMatrix(std::uint32_t p, std::size_t rows, std::size_t cols) : p_(p), rows_(rows), cols_(cols), a_(rows * cols, 0) {}

  static FpMatrix identity(std::uint32_t p, std::size_t n) { return scalar(p, n, 1); }

  static FpMatrix scalar(std::uint32_t p, std::size_t n, std::uint32_t lambda)
  {
    FpMatrix m(p, n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = lambda % p;
    return m;
  }

  static FpMatrix from_columns(std::uint32_t p, std::size_t rows, const std::vector<Vec>& cols)
  {
    FpMatrix m(p, rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows; ++i)
        m(i, j) = cols[j][i];
    return m;
  }

  std::uint32_t modulus() const { return p_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint32_t& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  std::uint32_t operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Vec row(std::size_t i) const { return Vec(a_.begin() + static_cast<std::ptrdiff_t>(i * cols_), a_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)); }

  Vec column(std::size_t j) const
  {
    Vec v(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      v[i] = (*this)(i, j);
    return v;
  }

  bool is_zero() const { return is_zero_vec(a_); }

  Vec apply(const Vec& v) const
  {
    Vec out(rows_, 0);
    for (std::size_t i = 0; i < rows_; ++i) {
      std::uint64_t s = 0;
      for (std::size_t j = 0; j < cols_; ++j)
        s += std::uint64_t(a_[i * cols_ + j]) * v[j];
      out[i] = static_cast<std::uint32_t>(s % p_);
    }
    return out;
  }

  friend FpMatrix operator*(const FpMatrix& a, const FpMatrix& b)
  {
    if (a.cols_ != b.rows_ || a.p_ != b.p_)
      throw InputError("matrix shape mismatch");
    FpMatrix c(a.p_, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      std::vector<std::uint64_t> acc(b.cols_, 0);
      for (std::size_t k = 0; k < a.cols_; ++k) {
        std::uint64_t x = a(i, k);
        if (!x)
          continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          acc[j] += x * b(k, j);
      }
      for (std::size_t j = 0; j < b.cols_; ++j)
        c(i, j) = static_cast<std::uint32_t>(acc[j] % a.p_);
    }
    return c;
  }

  friend FpMatrix operator+(const FpMatrix& a, const FpMatrix& b)
  {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || a.p_ != b.p_)
      throw InputError("matrix shape mismatch");
    FpMatrix c = a;
    for (std::size_t i = 0; i < c.a_.size(); ++i)
      c.a_[i] = (a.a_[i] + b.a_[i]) % a.p_;
    return c;
  }

  FpMatrix scaled(std::uint32_t lambda) const
  {
    FpMatrix c = *this;
    for (auto& x : c.a_)
      x = static_cast<std::uint32_t>(std::uint64_t(x) * lambda % p_);
    return c;
  }

  friend FpMatrix operator-(const FpMatrix& a, const FpMatrix& b) { return a + b.scaled(a.p_ - 1); }

  FpMatrix power(std::uint64_t e) const
  {
    FpMatrix r = identity(p_, rows_), b = *this;
    while (e) {
      if (e & 1)
        r = r * b;
      e >>= 1;
      if (e)
        b = b * b;
    }
    return r;
  }

  friend bool operator==(const FpMatrix&, const FpMatrix&) = default;
  friend auto operator<=>(const FpMatrix&, const FpMatrix&) = default;

private:
  std::uint32_t p_ = 3;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::uint32_t> a_;
};

/// Row space kept in reduced row echelon form. Coordinates of a member v
/// with respect to the stored rows are v read at the pivot columns.
class Subspace {
public:
  Subspace(std::uint32_t p, std::size_t n) : p_(p), n_(n) {}

  std::size_t ambient_dim() const { return n_; }
  std::size_t dim() const { return rows_.size(); }
  const std::vector<Vec>& basis() const { return rows_; }
  const std::vector<std::size_t>& pivots() const { return pivots_; }

  Vec reduce(Vec v) const
  {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      std::uint32_t c = v[pivots_[r]];
      if (!c)
        continue;
      std::uint32_t neg = p_ - c;
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = static_cast<std::uint32_t>((v[j] + std::uint64_t(neg) * rows_[r][j]) % p_);
    }
    return v;
  }

  bool contains(const Vec& v) const { return is_zero_vec(reduce(v)); }

  /// Adds v; returns false if it was already in the span.
  bool add(const Vec& v)
  {
    Vec w = reduce(v);
    auto it = std::find_if(w.begin(), w.end(), [](std::uint32_t x) { return x != 0; });
    if (it == w.end())
      return false;
    std::size_t piv = static_cast<std::size_t>(it - w.begin());
    std::uint32_t inv = inverse_mod(w[piv], p_);
    for (auto& x : w)
      x = static_cast<std::uint32_t>(std::uint64_t(x) * inv % p_);
    for (auto& row : rows_) {
      std::uint32_t c = row[piv];
      if (!c)
        continue;
      std::uint32_t neg = p_ - c;
      for (std::size_t j = 0; j < n_; ++j)
        row[j] = static_cast<std::uint32_t>((row[j] + std::uint64_t(neg) * w[j]) % p_);
    }
    auto pos = std::lower_bound(pivots_.begin(), pivots_.end(), piv) - pivots_.begin();
    pivots_.insert(pivots_.begin() + pos, piv);
    rows_.insert(rows_.begin() + pos, std::move(w));
    return true;
  }

  /// Coordinates with respect to basis(); v must lie in the span.
  Vec coordinates(const Vec& v) const
  {
    if (!contains(v))
      throw MathError("vector not in subspace");
    Vec c(rows_.size());
    for (std::size_t r = 0; r < rows_.size(); ++r)
      c[r] = v[pivots_[r]];
    return c;
  }

  Vec combine(const Vec& coords) const
  {
    Vec v(n_, 0);
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (std::size_t j = 0; j < n_; ++j)
        v[j] = static_cast<std::uint32_t>((v[j] + std::uint64_t(coords[r]) * rows_[r][j]) % p_);
    return v;
  }

private:
  std::uint32_t p_;
  std::size_t n_;
  std::vector<Vec> rows_;
  std::vector<std::size_t> pivots_;
};

/// Reduced row echelon form in place; returns pivot columns.
inline std::vector<std::size_t> rref(FpMatrix& m)
{
  std::uint32_t p = m.modulus();
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t s = r;
    while (s < m.rows() && m(s, c) == 0)
      ++s;
    if (s == m.rows())
      continue;
    for (std::size_t j = 0; j < m.cols(); ++j)
      std::swap(m(r, j), m(s, j));
    std::uint32_t inv = inverse_mod(m(r, c), p);
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(r, j) = static_cast<std::uint32_t>(std::uint64_t(m(r, j)) * inv % p);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r || m(i, c) == 0)
        continue;
      std::uint32_t neg = p - m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j)
        m(i, j) = static_cast<std::uint32_t>((m(i, j) + std::uint64_t(neg) * m(r, j)) % p);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

inline std::size_t rank(FpMatrix m) { return rref(m).size(); }

/// Basis of {x : m x = 0}.
inline std::vector<Vec> kernel(FpMatrix m)
{
  std::uint32_t p = m.modulus();
  auto piv = rref(m);
  std::vector<bool> is_piv(m.cols(), false);
  for (auto c : piv)
    is_piv[c] = true;
  std::vector<Vec> out;
  for (std::size_t f = 0; f < m.cols(); ++f) {
    if (is_piv[f])
      continue;
    Vec v(m.cols(), 0);
    v[f] = 1;
    for (std::size_t r = 0; r < piv.size(); ++r)
      v[piv[r]] = (p - m(r, f)) % p;
    out.push_back(std::move(v));
  }
  return out;
}

inline std::uint32_t determinant(FpMatrix m)
{
  if (m.rows() != m.cols())
    throw InputError("determinant of non-square matrix");
  std::uint32_t p = m.modulus();
  std::uint64_t det = 1;
  std::size_t n = m.rows();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t s = c;
    while (s < n && m(s, c) == 0)
      ++s;
    if (s == n)
      return 0;
    if (s != c) {
      for (std::size_t j = 0; j < n; ++j)
        std::swap(m(c, j), m(s, j));
      det = (p - det) % p;
    }
    det = det * m(c, c) % p;
    std::uint32_t inv = inverse_mod(m(c, c), p);
    for (std::size_t i = c + 1; i < n; ++i) {
      if (!m(i, c))
        continue;
      std::uint64_t f = std::uint64_t(m(i, c)) * inv % p;
      std::uint32_t neg = static_cast<std::uint32_t>((p - f) % p);
      for (std::size_t j = c; j < n; ++j)
        m(i, j) = static_cast<std::uint32_t>((m(i, j) + std::uint64_t(neg) * m(c, j)) % p);
    }
  }
  return static_cast<std::uint32_t>(det);
}

inline bool is_nilpotent(const FpMatrix& m) { return m.power(m.rows()).is_zero(); }

/// Polynomials over F_p, coefficients low to high.
using Poly = std::vector<std::uint32_t>;

inline std::uint32_t poly_eval(const Poly& f, std::uint32_t x, std::uint32_t p)
{
  std::uint64_t r = 0;
  for (auto it = f.rbegin(); it != f.rend(); ++it)
    r = (r * x + *it) % p;
  return static_cast<std::uint32_t>(r);
}

/// Characteristic polynomial det(xI − m) via Hessenberg reduction.
inline Poly charpoly(FpMatrix h)
{
  std::uint32_t p = h.modulus();
  std::size_t n = h.rows();
  for (std::size_t j = 0; j + 2 < n; ++j) {
    std::size_t i = j + 1;
    while (i < n && h(i, j) == 0)
      ++i;
    if (i == n)
      continue;
    if (i != j + 1) {
      for (std::size_t k = 0; k < n; ++k)
        std::swap(h(i, k), h(j + 1, k));
      for (std::size_t k = 0; k < n; ++k)
        std::swap(h(k, i), h(k, j + 1));
    }
    std::uint32_t inv = inverse_mod(h(j + 1, j), p);
    for (std::size_t k = j + 2; k < n; ++k) {
      std::uint32_t u = static_cast<std::uint32_t>(std::uint64_t(h(k, j)) * inv % p);
      if (!u)
        continue;
      for (std::size_t c = 0; c < n; ++c)
        h(k, c) = static_cast<std::uint32_t>((h(k, c) + std::uint64_t(p - u) * h(j + 1, c)) % p);
      for (std::size_t r = 0; r < n; ++r)
        h(r, j + 1) = static_cast<std::uint32_t>((h(r, j + 1) + std::uint64_t(u) * h(r, k)) % p);
    }
  }
  std::vector<Poly> ps;
  ps.push_back(Poly{1});
  for (std::size_t k = 0; k < n; ++k) {
    Poly next(k + 2, 0);
    const Poly& prev = ps[k];
    for (std::size_t d = 0; d < prev.size(); ++d) {
      next[d + 1] = (next[d + 1] + prev[d]) % p;
      next[d] = static_cast<std::uint32_t>((next[d] + std::uint64_t(p - h(k, k)) * prev[d]) % p);
    }
    std::uint64_t prod = 1;
    for (std::size_t i = k; i-- > 0;) {
      prod = prod * h(i + 1, i) % p;
      std::uint64_t coef = prod * h(i, k) % p;
      if (!coef)
        continue;
      for (std::size_t d = 0; d < ps[i].size(); ++d)
        next[d] = static_cast<std::uint32_t>((next[d] + (p - coef) * ps[i][d]) % p);
    }
    ps.push_back(std::move(next));
  }
  return ps[n];
}

/// F_p-rational roots with multiplicities; `rest` receives the cofactor without F_p roots.
inline std::vector<std::pair<std::uint32_t, std::size_t>> poly_roots(Poly f, std::uint32_t p, Poly* rest = nullptr)
{
  std::vector<std::pair<std::uint32_t, std::size_t>> out;
  for (std::uint32_t r = 0; r < p && f.size() > 1; ++r) {
    std::size_t mult = 0;
    while (f.size() > 1 && poly_eval(f, r, p) == 0) {
      Poly q(f.size() - 1, 0);
      std::uint64_t carry = 0;
      for (std::size_t i = f.size() - 1; i-- > 0;) {
        carry = (f[i + 1] + carry * r) % p;
        q[i] = static_cast<std::uint32_t>(carry);
      }
      f = std::move(q);
      ++mult;
    }
    if (mult)
      out.emplace_back(r, mult);
  }
  if (rest)
    *rest = f;
  return out;
}

} // namespace lacunary

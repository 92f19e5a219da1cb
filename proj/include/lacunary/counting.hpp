#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arith.hpp"
#include "asymptotics.hpp"
#include "densities.hpp"
#include "errors.hpp"
#include "form_expr.hpp"
#include "hecke_module.hpp"
#include "parallel.hpp"

namespace lacunary {

inline constexpr std::size_t default_table_cap = 1'000'000;

/// a_n for n < x_max, one byte each.
struct CoeffTable {
  std::uint32_t p;
  std::size_t x_max;
  std::vector<std::uint8_t> coeffs;
};

inline CoeffTable coefficient_table(const QSeries& s)
{
  return {s.modulus(), s.precision(), std::vector<std::uint8_t>(s.coeffs().begin(), s.coeffs().end())};
}

inline CoeffTable coefficient_table(const std::string& expr, std::uint32_t p, std::size_t x_max, std::size_t cap = default_table_cap)
{
  if (x_max > cap)
    throw InputError("x_max " + std::to_string(x_max) + " exceeds the table cap " + std::to_string(cap));
  if (x_max == 0)
    throw InputError("x_max must be positive");
  return coefficient_table(evaluate_form(expr, p, x_max).series);
}

struct CountRow {
  std::uint64_t x = 0;
  std::uint64_t pi = 0;
  std::optional<std::uint64_t> pi_sf;
  /// Index a holds #{n < x : a_n = a}; entry 0 is unused.
  std::vector<std::uint64_t> by_value;
  std::vector<std::uint64_t> by_value_sf;
};

struct CountReport {
  std::uint32_t p = 3;
  bool by_value = false;
  bool squarefree = false;
  std::vector<CountRow> rows;
};

namespace detail {

inline std::vector<std::uint64_t> checked_checkpoints(std::vector<std::uint64_t> cps, std::size_t x_max)
{
  std::sort(cps.begin(), cps.end());
  cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
  for (auto x : cps)
    if (x > x_max)
      throw InputError("checkpoint " + std::to_string(x) + " exceeds the table size " + std::to_string(x_max));
  return cps;
}

/// Value histograms per checkpoint segment, optionally restricted to square-free n.
inline std::vector<std::vector<std::uint64_t>> segment_histograms(const CoeffTable& t, const std::vector<std::uint64_t>& cps,
                                                                  const std::vector<std::uint8_t>* mask)
{
  constexpr std::size_t block = 1 << 16;
  std::vector<std::vector<std::uint64_t>> out;
  std::uint64_t lo = 0;
  for (auto hi : cps) {
    std::size_t blocks = static_cast<std::size_t>((hi - lo + block - 1) / block);
    auto parts = run_blocks<std::vector<std::uint64_t>>(blocks, [&](std::size_t b) {
      std::vector<std::uint64_t> h(t.p, 0);
      std::uint64_t s = lo + b * block, e = std::min<std::uint64_t>(hi, s + block);
      const std::uint8_t* c = t.coeffs.data();
      if (mask) {
        const std::uint8_t* m = mask->data();
        for (std::uint64_t n = s; n < e; ++n)
          h[c[n]] += m[n];
      } else {
        for (std::uint64_t n = s; n < e; ++n)
          ++h[c[n]];
      }
      return h;
    });
    std::vector<std::uint64_t> seg(t.p, 0);
    for (auto& h : parts)
      for (std::size_t a = 0; a < t.p; ++a)
        seg[a] += h[a];
    out.push_back(std::move(seg));
    lo = hi;
  }
  return out;
}

inline void accumulate_rows(CountReport& r, const std::vector<std::uint64_t>& cps, const std::vector<std::vector<std::uint64_t>>& segs,
                            bool sf)
{
  std::vector<std::uint64_t> run(r.p, 0);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    for (std::size_t a = 0; a < r.p; ++a)
      run[a] += segs[i][a];
    std::uint64_t nonzero = 0;
    for (std::size_t a = 1; a < r.p; ++a)
      nonzero += run[a];
    auto& row = r.rows[i];
    if (sf) {
      row.pi_sf = nonzero;
      if (r.by_value)
        row.by_value_sf = run;
    } else {
      row.pi = nonzero;
      if (r.by_value)
        row.by_value = run;
    }
  }
}

} // namespace detail

/// π(f,x) = #{n < x : a_n ≠ 0} (n = 0 included), with per-value tallies when asked.
inline CountReport count_pi(const CoeffTable& t, const std::vector<std::uint64_t>& checkpoints, bool by_value = false)
{
  auto cps = detail::checked_checkpoints(checkpoints, t.x_max);
  CountReport r;
  r.p = t.p;
  r.by_value = by_value;
  r.rows.resize(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i)
    r.rows[i].x = cps[i];
  detail::accumulate_rows(r, cps, detail::segment_histograms(t, cps, nullptr), false);
  return r;
}

/// Adds π_sf(f,x) = #{n < x square-free : a_n ≠ 0} to a report.
inline void add_squarefree_counts(CountReport& r, const CoeffTable& t)
{
  std::vector<std::uint64_t> cps;
  for (auto& row : r.rows)
    cps.push_back(row.x);
  std::uint64_t top = cps.empty() ? 0 : cps.back();
  auto mask = squarefree_mask(top);
  detail::accumulate_rows(r, cps, detail::segment_histograms(t, cps, &mask), true);
  r.squarefree = true;
}

inline CountReport count_pi_sf(const CoeffTable& t, const std::vector<std::uint64_t>& checkpoints, bool by_value = false)
{
  CountReport r = count_pi(t, checkpoints, by_value);
  add_squarefree_counts(r, t);
  return r;
}

/// Classification of one n by one pure component: n = m·m′·m″ as in the partition of Z(f,a).
struct OracleTriple {
  Vec f_prime;
  Vec f_dprime;
  std::size_t h;
};

struct OracleEntry {
  std::uint64_t n;
  std::uint32_t predicted;
  std::vector<OracleTriple> triples;
};

namespace detail {

struct OracleComponent {
  HeckeModule module;
  Vec a1;
  std::unique_ptr<PrimePowerOperators> ops;
};

} // namespace detail

/// Predicts every a_n, n < X, from class matrices alone: p-part via W∘U_{p^j}, then per pure
/// component f″ = T_{m″}f, f′ = T_{m′}f″, a_n = a_1(T_m f′).
inline std::vector<OracleEntry> decomposition_oracle(const GradedForm& f, std::uint64_t X, ModuleOptions opt = {})
{
  if (X > 100'000)
    throw InputError("oracle bound X must be at most 100000");
  if (X == 0)
    return {};
  std::uint32_t p = f.modulus();
  opt.require_conductor = true;
  auto amb = ambient_hecke(p, f.weight, opt.slack);
  Vec v = amb->coordinates(f);
  FpMatrix U = amb->U();
  int top = static_cast<int>(p) * f.weight;
  std::size_t Q = sturm_bound(top) + opt.slack;

  // terms[j] holds the pure components of W·U_{p^j} f.
  std::vector<std::vector<detail::OracleComponent>> terms;
  for (std::uint64_t pj = 1; pj < X; pj *= p) {
    std::vector<detail::OracleComponent> comps;
    if (!is_zero_vec(v)) {
      QSeries g = apply_W(amb->series(v, Q));
      if (!g.is_zero()) {
        GradedForm form{g, minimal_weight(g, top)};
        auto m = build_module(form, opt);
        for (auto& s : decompose_module(m)) {
          detail::OracleComponent c{build_module_from_vector(m.ambient, s.ambient, opt), {}, nullptr};
          c.a1 = c.module.coefficient_functional(1);
          comps.push_back(std::move(c));
        }
      }
    }
    for (auto& c : comps)
      c.ops = std::make_unique<detail::PrimePowerOperators>(c.module);
    terms.push_back(std::move(comps));
    v = U.apply(v);
  }

  auto spf = smallest_prime_factors(X);
  std::vector<OracleEntry> out;
  out.push_back({0, f.series[0], {}});
  for (std::uint64_t n = 1; n < X; ++n) {
    std::uint64_t j = 0, rest = n;
    while (rest % p == 0) {
      rest /= p;
      ++j;
    }
    std::vector<std::pair<std::uint64_t, unsigned>> fac;
    for (std::uint64_t r = rest; r > 1;) {
      std::uint64_t q = spf[r];
      unsigned e = 0;
      while (r % q == 0) {
        r /= q;
        ++e;
      }
      fac.emplace_back(q, e);
    }
    OracleEntry entry{n, 0, {}};
    std::uint64_t total = 0;
    for (auto& c : terms[j]) {
      const HeckeModule& m = c.module;
      Vec fdd = m.seed;
      for (auto [q, e] : fac)
        if (e >= 2)
          fdd = c.ops->get(q, e).apply(fdd);
      Vec fp = fdd;
      std::size_t h = 0;
      for (auto [q, e] : fac)
        if (e == 1 && m.status_of_prime(q) == ClassStatus::Nilpotent) {
          fp = c.ops->get(q, 1).apply(fp);
          ++h;
        }
      Vec g = fp;
      for (auto [q, e] : fac)
        if (e == 1 && m.status_of_prime(q) != ClassStatus::Nilpotent)
          g = c.ops->get(q, 1).apply(g);
      for (std::size_t i = 0; i < g.size(); ++i)
        total += std::uint64_t(c.a1[i]) * g[i];
      entry.triples.push_back({std::move(fp), std::move(fdd), h});
    }
    entry.predicted = static_cast<std::uint32_t>(total % p);
    out.push_back(std::move(entry));
  }
  return out;
}

struct OracleSummary {
  std::uint64_t matches = 0;
  std::uint64_t total = 0;
  std::vector<std::uint64_t> mismatches;
};

/// Compares oracle predictions with the q-expansion; `coprime_only` skips multiples of p.
inline OracleSummary oracle_check(const GradedForm& f, std::uint64_t X, const ModuleOptions& opt = {}, bool coprime_only = false)
{
  if (f.precision() < X)
    throw InputError("form precision below the oracle bound");
  OracleSummary s;
  for (auto& e : decomposition_oracle(f, X, opt)) {
    if (coprime_only && e.n % f.modulus() == 0)
      continue;
    ++s.total;
    if (e.predicted == f.series[e.n])
      ++s.matches;
    else if (s.mismatches.size() < 20)
      s.mismatches.push_back(e.n);
  }
  return s;
}

struct CompareRow {
  std::uint64_t x;
  std::uint64_t pi;
  std::optional<std::uint64_t> pi_sf;
  double predicted;
  double ratio;
  /// Per value a: empirical count and ratio to c(f,a)·x/(log x)^α·(log log x)^{h(f,a)}.
  std::map<std::uint32_t, std::uint64_t> value_counts;
  std::map<std::uint32_t, double> value_ratios;
};

struct CompareReport {
  bool squarefree = false;
  std::vector<CompareRow> rows;
};

/// Empirical / predicted per checkpoint; the square-free profile is compared with π_sf.
inline CompareReport compare_report(const CountReport& counts, const AsymptoticProfile& prof)
{
  CompareReport r;
  r.squarefree = prof.squarefree;
  if (prof.squarefree && !counts.squarefree)
    throw InputError("square-free profile needs square-free counts");
  for (auto& row : counts.rows) {
    if (row.x < 3)
      continue;
    CompareRow out;
    out.x = row.x;
    out.pi = row.pi;
    out.pi_sf = row.pi_sf;
    double emp = static_cast<double>(prof.squarefree ? *row.pi_sf : row.pi);
    out.predicted = predict(prof, {static_cast<double>(row.x)}).front().value;
    out.ratio = out.predicted > 0 ? emp / out.predicted : std::numeric_limits<double>::quiet_NaN();
    const auto& tally = prof.squarefree ? row.by_value_sf : row.by_value;
    if (!tally.empty()) {
      double x = static_cast<double>(row.x);
      for (std::uint32_t a = 1; a < counts.p; ++a) {
        out.value_counts[a] = tally[a];
        auto it = prof.per_value.find(a);
        double pred = 0;
        if (it != prof.per_value.end() && it->second.c > 0)
          pred = it->second.c * x / std::pow(std::log(x), prof.alpha.to_double()) *
                 std::pow(std::log(std::log(x)), static_cast<double>(it->second.h));
        out.value_ratios[a] = pred > 0 ? static_cast<double>(tally[a]) / pred : std::numeric_limits<double>::quiet_NaN();
      }
    }
    r.rows.push_back(std::move(out));
  }
  return r;
}

} // namespace lacunary

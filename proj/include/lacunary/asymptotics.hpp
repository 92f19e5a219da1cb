#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "densities.hpp"
#include "hecke_module.hpp"
#include "hecke_ops.hpp"
#include "weight_basis.hpp"

namespace lacunary {

struct ConstantsOptions {
  ModuleOptions module;
  std::uint64_t prime_bound = 1'000'000;
  std::uint64_t sfull_bound = 10'000'000'000ULL;
  std::size_t max_terms = 4096;
};

struct PureComponent {
  HeckeModule module;
  std::set<std::uint64_t> nilpotent_classes;
  std::uint64_t class_modulus;
  Rational alpha;
  std::size_t h;
};

/// W·U_{p^j} f at its lowest weight, with its pure components.
struct ReducedTerm {
  std::size_t exponent;
  GradedForm form;
  std::vector<PureComponent> components;
  /// p^{−j}, times 1/(1 − p^{−λ}) inside a cycle of length λ.
  double multiplier;
};

struct FormStructure {
  std::vector<ReducedTerm> terms;
  std::size_t cycle_start = 0;
  std::size_t cycle_length = 0;
  Rational alpha;
  std::size_t h = 0;
  bool degenerate = false;
};

inline void check_nonconstant(const QSeries& s)
{
  for (std::size_t n = 1; n < s.precision(); ++n)
    if (s[n])
      return;
  throw InputError("form is constant (no nonzero coefficient beyond q^0 within precision)");
}

inline std::vector<PureComponent> pure_components(const HeckeModule& m, const ModuleOptions& opt)
{
  std::vector<PureComponent> out;
  for (auto& s : decompose_module(m)) {
    auto cm = build_module_from_vector(m.ambient, s.ambient, opt);
    Rational alpha = class_density(s.nilpotent_classes, m.status_modulus);
    if (alpha == Rational(0))
      throw MathError("consistency error: a pure component has no nilpotent class (alpha = 0)");
    std::size_t h = strict_nilpotence_order(cm);
    out.push_back({std::move(cm), s.nilpotent_classes, m.status_modulus, alpha, h});
  }
  return out;
}

/// Reduces f to forms in F via W∘U_{p^j} (j ∈ {0,1} for the square-free variant) and decomposes each.
inline FormStructure analyze_form(const GradedForm& f, const ConstantsOptions& opt = {}, bool squarefree = false)
{
  check_nonconstant(f.series);
  std::uint32_t p = f.modulus();
  ModuleOptions mopt = opt.module;
  mopt.require_conductor = false;
  auto amb = ambient_hecke(p, f.weight, mopt.slack);
  Vec v = amb->coordinates(f);
  FpMatrix U = amb->U();

  std::vector<Vec> seq;
  std::unordered_map<Vec, std::size_t, VecHash> seen;
  FormStructure st;
  for (std::size_t j = 0;; ++j) {
    if (squarefree && j == 2)
      break;
    if (j >= opt.max_terms)
      throw MathError("U_p orbit did not cycle within the term cap");
    auto it = seen.find(v);
    if (it != seen.end()) {
      st.cycle_start = it->second;
      st.cycle_length = j - it->second;
      break;
    }
    seen.emplace(v, j);
    seq.push_back(v);
    v = U.apply(v);
  }

  int top = static_cast<int>(p) * f.weight;
  std::size_t Q = sturm_bound(top) + mopt.slack;
  bool first = true;
  for (std::size_t j = 0; j < seq.size(); ++j) {
    if (is_zero_vec(seq[j]))
      continue;
    QSeries g = apply_W(amb->series(seq[j], Q));
    if (g.is_zero())
      continue;
    int w = minimal_weight(g, top);
    GradedForm form{g, w};
    double mult = std::pow(static_cast<double>(p), -static_cast<double>(j));
    if (st.cycle_length && j >= st.cycle_start)
      mult /= 1.0 - std::pow(static_cast<double>(p), -static_cast<double>(st.cycle_length));
    auto m = build_module(form, mopt);
    ReducedTerm term{j, form, pure_components(m, mopt), mult};
    for (auto& c : term.components) {
      if (first || c.alpha < st.alpha) {
        st.alpha = c.alpha;
        st.h = c.h;
        first = false;
      } else if (c.alpha == st.alpha && c.h > st.h) {
        st.h = c.h;
      }
    }
    st.terms.push_back(std::move(term));
  }
  st.degenerate = st.terms.empty();
  return st;
}

inline Rational alpha_of_form(const GradedForm& f, const ConstantsOptions& opt = {})
{
  auto st = analyze_form(f, opt, false);
  if (st.degenerate)
    throw MathError("form has no component in F");
  if (!(Rational(0) < st.alpha && st.alpha <= Rational(3, 4)))
    throw MathError("alpha " + st.alpha.to_string() + " outside (0, 3/4]");
  return st.alpha;
}

struct ValueConstant {
  std::size_t h = 0;
  double c = 0;
  double error = 0;
};

struct AsymptoticProfile {
  bool squarefree = false;
  /// Square-free variant only: every square-free coefficient vanishes.
  bool degenerate = false;
  Rational alpha;
  std::size_t h = 0;
  double c = 0;
  double c_err = 0;
  std::map<std::uint32_t, ValueConstant> per_value;
};

namespace detail {

inline Estimate cached_euler(const std::set<std::uint64_t>& U, std::uint64_t c, const Rational& beta, std::uint64_t bound)
{
  static std::mutex mu;
  static std::map<std::tuple<std::set<std::uint64_t>, std::uint64_t, std::string, std::uint64_t>, Estimate> cache;
  auto key = std::make_tuple(U, c, beta.to_string(), bound);
  {
    std::lock_guard lock(mu);
    auto it = cache.find(key);
    if (it != cache.end())
      return it->second;
  }
  Estimate e = euler_constant_C(U, c, beta, 1, bound);
  std::lock_guard lock(mu);
  cache[key] = e;
  return e;
}

/// contributions[a][t] = (value, error) of Σ_{f′,f″} W[f″]·δ(M_{f′,f″})·|Δ_{f′,a}|/|Γ_f| at height t.
inline std::map<std::uint32_t, std::vector<std::pair<double, double>>> component_contributions(const PureComponent& comp,
                                                                                              const ConstantsOptions& opt,
                                                                                              bool squarefree)
{
  const HeckeModule& m = comp.module;
  std::uint32_t p = m.p;
  auto nc = nilpotent_classes(m);
  std::set<std::uint64_t> U;
  for (auto& [u, s] : m.class_status)
    if (s == ClassStatus::Invertible)
      U.insert(u);
  Rational beta = class_density(U, m.status_modulus);
  if (!(beta + comp.alpha == Rational(1)))
    throw MathError("component is not pure: U and N densities do not add up to 1");
  Estimate cu = cached_euler(U, m.status_modulus, beta, opt.prime_bound);
  double rel = cu.error / cu.value;

  std::unordered_map<Vec, double, VecHash> targets;
  double tail = 0;
  if (squarefree) {
    targets[m.seed] = cu.value;
  } else {
    auto w = squarefull_weights(m, m.seed, opt.sfull_bound, cu.value, U, m.status_modulus);
    targets = std::move(w.weight);
    tail = w.tail;
  }
  auto gamma = gamma_group(m);
  Vec phi = m.coefficient_functional(1);
  std::unordered_map<Vec, std::vector<std::uint64_t>, VecHash> orbit_cache;
  auto orbit_counts = [&](const Vec& v) -> const std::vector<std::uint64_t>& {
    auto it = orbit_cache.find(v);
    if (it != orbit_cache.end())
      return it->second;
    std::vector<std::uint64_t> cnt(p, 0);
    for (auto& g : gamma.elements) {
      Vec gv = g.apply(v);
      std::uint64_t s = 0;
      for (std::size_t i = 0; i < gv.size(); ++i)
        s += std::uint64_t(phi[i]) * gv[i];
      ++cnt[s % p];
    }
    return orbit_cache.emplace(v, std::move(cnt)).first->second;
  };

  double phi_c = static_cast<double>(euler_phi(nc.modulus));
  std::map<std::uint32_t, std::vector<std::pair<double, double>>> out;
  for (std::uint32_t a = 1; a < p; ++a)
    out[a].assign(comp.h + 1, {0.0, 0.0});
  // Order targets deterministically so floating sums do not depend on hash order.
  std::map<Vec, double> ordered(targets.begin(), targets.end());
  for (auto& [fpp, w] : ordered) {
    auto dist = tuple_distribution(nc, fpp, static_cast<unsigned>(comp.h));
    double norm = 1;
    for (std::size_t t = 0; t <= comp.h; ++t) {
      if (t > 0)
        norm *= static_cast<double>(t) * phi_c;
      std::map<Vec, std::uint64_t> level(dist[t].begin(), dist[t].end());
      for (auto& [fp, count] : level) {
        auto& cnt = orbit_counts(fp);
        for (std::uint32_t a = 1; a < p; ++a) {
          if (!cnt[a])
            continue;
          double val = w * static_cast<double>(count) / norm * static_cast<double>(cnt[a]) / static_cast<double>(gamma.order());
          out[a][t].first += val;
        }
      }
    }
  }
  for (auto& [a, row] : out)
    for (auto& [val, err] : row)
      if (val > 0)
        err = val * rel + tail;
  return out;
}

} // namespace detail

inline AsymptoticProfile assemble_profile(const FormStructure& st, const ConstantsOptions& opt, bool squarefree, std::uint32_t p)
{
  AsymptoticProfile prof;
  prof.squarefree = squarefree;
  if (st.degenerate) {
    if (!squarefree)
      throw MathError("form has no component in F");
    prof.degenerate = true;
    return prof;
  }
  prof.alpha = st.alpha;
  prof.h = st.h;
  if (!(Rational(0) < st.alpha && st.alpha <= Rational(3, 4)))
    throw MathError("alpha " + st.alpha.to_string() + " outside (0, 3/4]");
  for (std::uint32_t a = 1; a < p; ++a)
    prof.per_value[a] = {};
  std::map<std::uint32_t, bool> seen;
  for (auto& term : st.terms) {
    for (auto& comp : term.components) {
      if (!(comp.alpha == st.alpha))
        continue;
      auto contrib = detail::component_contributions(comp, opt, squarefree);
      for (auto& [a, row] : contrib) {
        std::size_t ha = row.size();
        while (ha > 0 && row[ha - 1].first <= 0)
          --ha;
        if (ha == 0)
          continue;
        --ha;
        auto& pv = prof.per_value[a];
        double c = row[ha].first * term.multiplier, e = row[ha].second * term.multiplier;
        if (!seen[a] || ha > pv.h) {
          pv = {ha, c, e};
          seen[a] = true;
        } else if (ha == pv.h) {
          pv.c += c;
          pv.error += e;
        }
      }
    }
  }
  for (auto& [a, pv] : prof.per_value) {
    if (seen[a] && pv.h == prof.h) {
      prof.c += pv.c;
      prof.c_err += pv.error;
    }
  }
  return prof;
}

inline AsymptoticProfile leading_constants(const GradedForm& f, const ConstantsOptions& opt = {})
{
  return assemble_profile(analyze_form(f, opt, false), opt, false, f.modulus());
}

inline AsymptoticProfile leading_constants_sf(const GradedForm& f, const ConstantsOptions& opt = {})
{
  return assemble_profile(analyze_form(f, opt, true), opt, true, f.modulus());
}

struct Prediction {
  double x;
  double value;
  double low;
  double high;
};

/// c·x/(log x)^α·(log log x)^h with the band from the constant's error bar.
inline std::vector<Prediction> predict(const AsymptoticProfile& prof, const std::vector<double>& xs)
{
  std::vector<Prediction> out;
  for (double x : xs) {
    if (!(x >= 3))
      throw InputError("prediction needs x >= 3");
    if (prof.degenerate) {
      out.push_back({x, 0, 0, 0});
      continue;
    }
    double shape = x / std::pow(std::log(x), prof.alpha.to_double()) * std::pow(std::log(std::log(x)), static_cast<double>(prof.h));
    out.push_back({x, prof.c * shape, (prof.c - prof.c_err) * shape, (prof.c + prof.c_err) * shape});
  }
  return out;
}

} // namespace lacunary

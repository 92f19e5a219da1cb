#pragma once

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "asymptotics.hpp"
#include "counting.hpp"
#include "densities.hpp"
#include "errors.hpp"
#include "form_expr.hpp"
#include "hecke_module.hpp"
#include "hecke_ops.hpp"
#include "parallel.hpp"

namespace lacunary::cli {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits so output is stable across platforms.
inline Json number(double x)
{
  if (!std::isfinite(x))
    return nullptr;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

inline std::string fixed12(double x)
{
  if (!std::isfinite(x))
    return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline Json matrix_json(const FpMatrix& m)
{
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline Json series_json(const QSeries& s, std::size_t n)
{
  Json out = Json::array();
  for (std::size_t i = 0; i < std::min(n, s.precision()); ++i)
    out.push_back(s[i]);
  return out;
}

struct Flags {
  std::uint32_t p = 0;
  std::string form;
  std::size_t prec = 50;
  std::uint64_t xmax = 1'000'000;
  std::uint64_t oracle_xmax = 10'000;
  std::string checkpoints;
  std::uint64_t gen_bound = 50;
  std::uint64_t sample_bound = 2000;
  std::uint64_t prime_bound = 1'000'000;
  double sfull_bound = 1e10;
  bool squarefree = false;
  std::string out = "json";
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string op;
  std::string group;
  std::uint64_t cap = default_table_cap;
  std::uint64_t modulus = 0;
  std::string classes;
  std::string beta;
  std::uint64_t r = 1;
};

inline std::vector<std::uint64_t> parse_list(const std::string& text, const char* what)
{
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b == std::string::npos)
      continue;
    item = item.substr(b, e - b + 1);
    char* end = nullptr;
    double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0' || !(v >= 0) || v != std::floor(v) || v > 1e18)
      throw InputError(std::string("bad ") + what + " entry '" + item + "'");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty())
    throw InputError(std::string("empty ") + what + " list");
  return out;
}

inline Rational parse_rational(const std::string& text)
{
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos)
      return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::logic_error&) {
    throw InputError("bad rational '" + text + "'");
  }
}

class Runner {
public:
  Runner(const Flags& f, std::ostream& out) : f_(f), out_(out) {}

  ModuleOptions module_options() const
  {
    ModuleOptions o;
    o.generator_bound = f_.gen_bound;
    o.sample_bound = f_.sample_bound;
    o.seed = f_.seed;
    o.require_conductor = false;
    return o;
  }

  ConstantsOptions constants_options() const
  {
    ConstantsOptions o;
    o.module = module_options();
    o.prime_bound = f_.prime_bound;
    if (!(f_.sfull_bound >= 1) || f_.sfull_bound > 1e18)
      throw InputError("sfull-bound out of range");
    o.sfull_bound = static_cast<std::uint64_t>(f_.sfull_bound);
    return o;
  }

  FormExpr expr() const
  {
    if (f_.form.empty())
      throw InputError("--form is required");
    check_modulus(f_.p);
    return parse_form_expression(f_.form, f_.p);
  }

  /// The form with enough coefficients to pin it down in its weight space.
  GradedForm form_for_module(std::size_t at_least = 0) const
  {
    FormExpr e = expr();
    int w = evaluate(e, f_.p, 1).weight;
    std::size_t prec = std::max(at_least, sturm_bound(std::max(w, 0)) + module_options().slack);
    return evaluate(e, f_.p, prec);
  }

  Json header() const
  {
    Json j;
    j["p"] = f_.p;
    if (!f_.form.empty())
      j["form"] = to_string(parse_form_expression(f_.form, f_.p));
    return j;
  }

  void emit(const Json& j) { out_ << j.dump(2) << "\n"; }

  void require_json(const char* cmd) const
  {
    if (f_.out != "json")
      throw InputError(std::string("csv output is not available for ") + cmd);
  }

  std::vector<std::uint64_t> checkpoints() const
  {
    if (!f_.checkpoints.empty())
      return parse_list(f_.checkpoints, "checkpoint");
    std::vector<std::uint64_t> cps;
    for (std::uint64_t x = 1000; x < f_.xmax; x *= 10)
      cps.push_back(x);
    cps.push_back(f_.xmax);
    return cps;
  }

  std::uint64_t table_size(const std::vector<std::uint64_t>& cps) const
  {
    std::uint64_t top = 0;
    for (auto x : cps)
      top = std::max(top, x);
    return top;
  }

  void expand()
  {
    check_modulus(f_.p);
    GradedForm g = evaluate(expr(), f_.p, f_.prec);
    write_series(g, nullptr);
  }

  void hecke()
  {
    if (f_.op.empty())
      throw InputError("--op is required (T:l, U:m, V:m, S:n or W)");
    auto spec = HeckeOpSpec::parse(f_.op);
    check_modulus(f_.p);
    spec.validate(f_.p);
    GradedForm g = apply_op(evaluate(expr(), f_.p, f_.prec), spec);
    write_series(g, &spec);
  }

  void write_series(const GradedForm& g, const HeckeOpSpec* op)
  {
    if (f_.out == "csv") {
      out_ << "n,a_n\n";
      for (std::size_t n = 0; n < g.precision(); ++n)
        out_ << n << "," << unsigned(g.series[n]) << "\n";
      return;
    }
    Json j = header();
    if (op)
      j["op"] = op->to_string();
    j["weight"] = g.weight;
    j["prec"] = g.precision();
    j["coefficients"] = series_json(g.series, g.precision());
    emit(j);
  }

  void module()
  {
    require_json("module");
    auto m = build_module(form_for_module(), module_options());
    auto rep = classify_classes(m);
    Json j = header();
    j["weight"] = m.weight;
    j["dim"] = m.dim();
    j["conductor"] = m.conductor ? Json(*m.conductor) : Json(nullptr);
    if (!m.conductor) {
      j["nilpotent_conductor"] = m.nilpotent_conductor ? Json(*m.nilpotent_conductor) : Json(nullptr);
      j["diagnostic"] = m.conductor_diagnostic;
    }
    j["status_modulus"] = m.status_modulus;
    Json classes = Json::array();
    for (auto& c : rep.classes) {
      Json e;
      e["class"] = c.residue;
      e["status"] = to_string(c.status);
      if (c.matrix)
        e["T"] = matrix_json(*c.matrix);
      if (std::gcd<std::uint64_t>(c.residue, m.p) == 1)
        e["lS"] = m.scalar(c.residue);
      classes.push_back(std::move(e));
    }
    j["classes"] = std::move(classes);
    j["invertible_classes"] = rep.invertible_classes;
    j["nilpotent_classes"] = rep.nilpotent_classes;
    j["pure"] = rep.pure;
    std::set<std::uint64_t> nil(rep.nilpotent_classes.begin(), rep.nilpotent_classes.end());
    if (rep.pure) {
      j["h"] = strict_nilpotence_order(m);
      j["alpha"] = class_density(nil, m.status_modulus).to_string();
      auto w = nilpotent_witness(m);
      j["witness"] = w ? Json(*w) : Json(nullptr);
    } else {
      j["h"] = nullptr;
      j["alpha"] = nullptr;
    }
    try {
      auto eq = equidistribution_report(m);
      Json e;
      e["criterion_holds"] = eq.criterion_holds;
      e["gamma_order"] = eq.gamma_order;
      e["eigenform_converse_applies"] = eq.eigenform_converse_applies;
      e["primitive_root_shortcut"] = eq.primitive_root_shortcut;
      j["equidistribution"] = std::move(e);
    } catch (const MathError& ex) {
      j["equidistribution"] = {{"error", ex.what()}};
    }
    emit(j);
  }

  void decompose()
  {
    require_json("decompose");
    GradedForm g = form_for_module(f_.prec);
    ModuleOptions opt = module_options();
    auto m = build_module(g, opt);
    Json comps = Json::array();
    for (auto& s : decompose_module(m)) {
      auto cm = build_module_from_vector(m.ambient, s.ambient, opt);
      Json c;
      c["coefficients"] = series_json(m.ambient->series(s.ambient, f_.prec), f_.prec);
      c["dim"] = cm.dim();
      c["nilpotent_classes"] = std::vector<std::uint64_t>(s.nilpotent_classes.begin(), s.nilpotent_classes.end());
      c["alpha"] = class_density(s.nilpotent_classes, m.status_modulus).to_string();
      c["h"] = strict_nilpotence_order(cm);
      comps.push_back(std::move(c));
    }
    Json j = header();
    j["weight"] = g.weight;
    j["status_modulus"] = m.status_modulus;
    j["components"] = std::move(comps);
    emit(j);
  }

  AsymptoticProfile profile() const
  {
    GradedForm g = form_for_module();
    auto opt = constants_options();
    return f_.squarefree ? leading_constants_sf(g, opt) : leading_constants(g, opt);
  }

  Json profile_json(const AsymptoticProfile& prof) const
  {
    Json j = header();
    j["squarefree"] = prof.squarefree;
    j["degenerate"] = prof.degenerate;
    j["alpha"] = prof.degenerate ? Json(nullptr) : Json(prof.alpha.to_string());
    j["h"] = prof.h;
    j["c"] = number(prof.c);
    j["c_err"] = number(prof.c_err);
    Json pv = Json::object();
    for (auto& [a, v] : prof.per_value)
      pv[std::to_string(a)] = {{"h", v.h}, {"c", number(v.c)}, {"c_err", number(v.error)}};
    j["per_value"] = std::move(pv);
    return j;
  }

  void predict()
  {
    require_json("predict");
    auto prof = profile();
    Json j = profile_json(prof);
    std::vector<double> xs;
    for (auto x : checkpoints())
      xs.push_back(static_cast<double>(x));
    Json rows = Json::array();
    for (auto& pr : lacunary::predict(prof, xs))
      rows.push_back({{"x", number(pr.x)}, {"value", number(pr.value)}, {"low", number(pr.low)}, {"high", number(pr.high)}});
    j["predictions"] = std::move(rows);
    emit(j);
  }

  void constants()
  {
    require_json("constants");
    Json j;
    if (!f_.classes.empty()) {
      if (f_.modulus < 2)
        throw InputError("--modulus is required with --classes");
      auto list = parse_list(f_.classes, "class");
      std::set<std::uint64_t> U(list.begin(), list.end());
      Rational beta = f_.beta.empty() ? class_density(U, f_.modulus) : parse_rational(f_.beta);
      auto est = euler_constant_C(U, f_.modulus, beta, f_.r, f_.prime_bound);
      j["classes"] = list;
      j["modulus"] = f_.modulus;
      j["beta"] = beta.to_string();
      j["r"] = f_.r;
      j["prime_bound"] = f_.prime_bound;
      j["C"] = number(est.value);
      j["tail"] = number(est.error);
      emit(j);
      return;
    }
    emit(profile_json(profile()));
  }

  void count()
  {
    auto cps = checkpoints();
    auto top = table_size(cps);
    auto table = coefficient_table(to_string(expr()), f_.p, top, f_.cap);
    auto rep = f_.squarefree ? count_pi_sf(table, cps, true) : count_pi(table, cps, true);
    if (f_.out == "csv") {
      out_ << "x,pi" << (f_.squarefree ? ",pi_sf" : "");
      for (std::uint32_t a = 1; a < f_.p; ++a)
        out_ << ",a=" << a;
      out_ << "\n";
      for (auto& row : rep.rows) {
        out_ << row.x << "," << row.pi;
        if (f_.squarefree)
          out_ << "," << *row.pi_sf;
        for (std::uint32_t a = 1; a < f_.p; ++a)
          out_ << "," << row.by_value[a];
        out_ << "\n";
      }
      return;
    }
    Json j = header();
    Json rows = Json::array();
    for (auto& row : rep.rows) {
      Json r;
      r["x"] = row.x;
      r["pi"] = row.pi;
      if (row.pi_sf)
        r["pi_sf"] = *row.pi_sf;
      Json bv = Json::object();
      for (std::uint32_t a = 1; a < f_.p; ++a)
        bv[std::to_string(a)] = row.by_value[a];
      r["by_value"] = std::move(bv);
      if (row.pi_sf) {
        Json bs = Json::object();
        for (std::uint32_t a = 1; a < f_.p; ++a)
          bs[std::to_string(a)] = row.by_value_sf[a];
        r["by_value_sf"] = std::move(bs);
      }
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    emit(j);
  }

  void compare()
  {
    auto cps = checkpoints();
    auto table = coefficient_table(to_string(expr()), f_.p, table_size(cps), f_.cap);
    auto counts = count_pi_sf(table, cps, true);
    auto prof = profile();
    auto rep = compare_report(counts, prof);
    if (f_.out == "csv") {
      out_ << "x,pi,pi_sf,predicted,ratio";
      for (std::uint32_t a = 1; a < f_.p; ++a)
        out_ << ",a=" << a;
      out_ << "\n";
      for (auto& row : rep.rows) {
        out_ << row.x << "," << row.pi << "," << *row.pi_sf << "," << fixed12(row.predicted) << "," << fixed12(row.ratio);
        for (std::uint32_t a = 1; a < f_.p; ++a)
          out_ << "," << fixed12(row.value_ratios[a]);
        out_ << "\n";
      }
      return;
    }
    Json j = profile_json(prof);
    Json rows = Json::array();
    for (auto& row : rep.rows) {
      Json r;
      r["x"] = row.x;
      r["pi"] = row.pi;
      r["pi_sf"] = *row.pi_sf;
      r["predicted"] = number(row.predicted);
      r["ratio"] = number(row.ratio);
      Json pv = Json::object();
      for (auto& [a, v] : row.value_ratios)
        pv[std::to_string(a)] = {{"count", row.value_counts[a]}, {"ratio", number(v)}};
      r["per_value"] = std::move(pv);
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    emit(j);
  }

  void oracle()
  {
    std::uint64_t X = f_.oracle_xmax;
    if (X > 100'000)
      throw InputError("oracle bound X must be at most 100000");
    GradedForm g = form_for_module(X);
    auto entries = decomposition_oracle(g, X, module_options());
    if (f_.out == "csv") {
      out_ << "n,predicted,actual\n";
      for (auto& e : entries)
        out_ << e.n << "," << e.predicted << "," << unsigned(g.series[e.n]) << "\n";
      return;
    }
    std::uint64_t ok = 0;
    Json bad = Json::array();
    for (auto& e : entries) {
      if (e.predicted == g.series[e.n])
        ++ok;
      else if (bad.size() < 20)
        bad.push_back(e.n);
    }
    Json j = header();
    j["xmax"] = X;
    j["match"] = std::to_string(ok) + "/" + std::to_string(entries.size());
    j["mismatches"] = std::move(bad);
    emit(j);
  }

  void alpha_group()
  {
    require_json("alpha-group");
    if (f_.group.empty())
      throw InputError("--group is required");
    auto g = GroupDescriptor::parse(f_.group);
    Json j;
    j["group"] = g.to_string();
    j["alpha"] = alpha_of_group(g).to_string();
    emit(j);
  }

private:
  const Flags& f_;
  std::ostream& out_;
};

/// Runs one command line; returns 0 on success, 2 on input errors, 3 on mathematical failures.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Lacunarity of modular forms mod p"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--p", f.p, "odd prime modulus");
    sub->add_option("--form", f.form, "expression in delta, E4, E6");
    sub->add_option("--out", f.out, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--seed", f.seed, "seed for eigenspace splitting");
    sub->add_option("--threads", f.threads, "worker cap (0 = all cores)");
  };
  auto add_module = [&](CLI::App* sub) {
    sub->add_option("--gen-bound", f.gen_bound, "largest prime used to generate the module");
    sub->add_option("--sample-bound", f.sample_bound, "largest prime sampled for classes");
  };
  auto add_constants = [&](CLI::App* sub) {
    sub->add_option("--prime-bound", f.prime_bound, "Euler product cutoff");
    sub->add_option("--sfull-bound", f.sfull_bound, "square-full sum cutoff");
    sub->add_flag("--squarefree", f.squarefree, "square-free indices only");
  };
  auto add_counting = [&](CLI::App* sub) {
    sub->add_option("--xmax", f.xmax, "count n < xmax");
    sub->add_option("--checkpoints", f.checkpoints, "comma-separated x values");
    sub->add_option("--cap", f.cap, "largest coefficient table");
  };

  std::vector<std::pair<CLI::App*, void (Runner::*)()>> cmds;
  auto sub = [&](const char* name, const char* desc, void (Runner::*fn)()) {
    auto* s = app.add_subcommand(name, desc);
    add_common(s);
    cmds.emplace_back(s, fn);
    return s;
  };

  auto* expand = sub("expand", "q-expansion of a form", &Runner::expand);
  expand->add_option("--prec", f.prec, "number of coefficients");
  auto* hecke = sub("hecke", "apply one operator", &Runner::hecke);
  hecke->add_option("--prec", f.prec, "number of input coefficients");
  hecke->add_option("--op", f.op, "T:l, U:m, V:m, S:n or W");
  add_module(sub("module", "Hecke module, classes, purity, h and alpha", &Runner::module));
  auto* dec = sub("decompose", "pure components", &Runner::decompose);
  add_module(dec);
  dec->add_option("--prec", f.prec, "coefficients printed per component");
  auto* pred = sub("predict", "asymptotic profile and predicted counts", &Runner::predict);
  add_module(pred);
  add_constants(pred);
  add_counting(pred);
  auto* cnt = sub("count", "coefficient counts", &Runner::count);
  add_counting(cnt);
  cnt->add_flag("--squarefree", f.squarefree, "add square-free counts");
  auto* cmp = sub("compare", "empirical against predicted counts", &Runner::compare);
  add_module(cmp);
  add_constants(cmp);
  add_counting(cmp);
  auto* orc = sub("oracle", "check coefficients against the decomposition", &Runner::oracle);
  add_module(orc);
  orc->add_option("--xmax", f.oracle_xmax, "check n < xmax");
  auto* ag = sub("alpha-group", "alpha for an image group", &Runner::alpha_group);
  ag->add_option("--group", f.group, "reducible:n, dihedral:n, A4, S4, A5, PGL2:q, PSL2:q");
  auto* cons = sub("constants", "Euler product constant or the full profile", &Runner::constants);
  add_module(cons);
  add_constants(cons);
  cons->add_option("--classes", f.classes, "comma-separated residues U");
  cons->add_option("--modulus", f.modulus, "modulus of the classes");
  cons->add_option("--beta", f.beta, "exponent, default the density of U");
  cons->add_option("--r", f.r, "primes of r drop their (1+1/l) factor");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (f.threads)
    max_threads() = f.threads;
  try {
    for (auto& [s, fn] : cmds) {
      if (s->parsed()) {
        Runner r(f, out);
        (r.*fn)();
      }
    }
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const MathError& e) {
    err << "math error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

} // namespace lacunary::cli

#pragma once

// Command line front end: `carnot <command> <group> [options]`, where <group> is a catalog name
// (with its parameters, e.g. `eng 2`, `potential "x1^2 - 1"`) or the path of a group-spec file.
// Exit codes: 0 ok, 2 parse/usage, 3 validation, 4 numeric, 5 inconclusive under --strict.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "analysis.hpp"
#include "catalog.hpp"
#include "dynamics.hpp"
#include "group_spec.hpp"
#include "reduction.hpp"
#include "report.hpp"

namespace carnot::cli {

enum exit_code : int { ok = 0, usage = 2, validation = 3, numeric = 4, inconclusive = 5 };

class usage_error : public error {
 public:
  explicit usage_error(const std::string& what) : error(error_kind::parse, what) {}
};

struct run_config {
  std::vector<std::string> group;  // catalog name and parameters, or a spec file path
  std::optional<std::string> mu, p0, x0, theta0;
  double T = 10.0;
  double step = 1e-3;
  std::string method = "rk4";
  std::optional<double> tol;
  std::uint64_t seed = 1;
  std::size_t samples = 100;
  std::optional<std::string> out, format, plot;
  std::string family = "corrected";
  bool strict = false, all_f = false, emit_connection = false, integrability = false, metric_line = false;
  bool full = false;
};

struct resolved_group {
  std::string name;
  group_model model;
  std::optional<catalog_entry> entry;
  std::optional<std::vector<std::size_t>> first_layer;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::vector<rational> rationals(const std::string& flag, const std::string& s) {
  std::vector<rational> out;
  for (const auto& w : split_list(s)) {
    try {
      out.push_back(parse_rational(w));
    } catch (const validation_error&) {
      throw usage_error(flag + ": '" + w + "' is not a number");
    }
  }
  return out;
}

inline std::vector<double> doubles(const std::string& flag, const std::optional<std::string>& s, std::size_t n) {
  if (!s) return std::vector<double>(n, 0.0);
  std::vector<double> out;
  for (const auto& r : rationals(flag, *s)) out.push_back(r.get_d());
  if (out.size() != n)
    throw usage_error(flag + " expects " + std::to_string(n) + " values, got " + std::to_string(out.size()));
  return out;
}

inline resolved_group resolve(const std::vector<std::string>& words) {
  if (words.empty()) throw usage_error("a group (catalog name or spec file) is required");
  const std::string& head = words[0];
  std::error_code ec;
  if (std::filesystem::is_regular_file(head, ec)) {
    if (words.size() > 1) throw usage_error("unexpected arguments after the spec file");
    std::ifstream in(head);
    std::stringstream ss;
    ss << in.rdbuf();
    auto spec = parse_group_spec(ss.str());
    return {head, make_group_model(spec.algebra, spec.split), std::nullopt, spec.first_layer};
  }
  auto e = catalog::get(head, {words.begin() + 1, words.end()});
  return {e.name, e.model, e, e.first_layer};
}

inline momentum momentum_for(const run_config& c, const resolved_group& g) {
  const std::size_t m = g.model.space().m;
  if (!c.mu) {
    if (g.entry && g.entry->mu) return *g.entry->mu;
    throw usage_error("--mu is required (" + std::to_string(m) + " values)");
  }
  momentum mu{rationals("--mu", *c.mu)};
  if (mu.size() != m) throw usage_error("--mu expects " + std::to_string(m) + " values, got " + std::to_string(mu.size()));
  return mu;
}

inline integration_method method_of(const std::string& s) {
  if (s == "rk4") return integration_method::rk4;
  if (s == "midpoint" || s == "implicit-midpoint") return integration_method::implicit_midpoint;
  throw usage_error("--method must be rk4 or midpoint");
}

inline std::string format_of(const run_config& c, const std::string& fallback) {
  std::string f = c.format.value_or(fallback);
  if (f != "csv" && f != "json" && f != "text") throw usage_error("--format must be csv or json");
  return f;
}

/// Writes the artifact to --out when given, otherwise to `out`.
inline void emit(const run_config& c, std::ostream& out, const std::string& text) {
  if (!c.out) {
    out << text;
    return;
  }
  std::ofstream f(*c.out, std::ios::binary);
  if (!f) throw usage_error("cannot write " + *c.out);
  f << text;
}

inline std::string dump(const report::json& j) { return j.dump(2) + "\n"; }

inline void write_plot_files(const run_config& c, const trajectory& reduced, const reduced_system& sys, std::ostream& out) {
  if (!c.plot) return;
  const std::string traj = *c.plot + ".trajectory.dat";
  std::ofstream tf(traj);
  if (!tf) throw usage_error("cannot write " + traj);
  report::write_trajectory_dat(tf, reduced);
  out << "wrote " << traj << "\n";
  const std::size_t n = reduced.space.n;
  if (n > 2 || reduced.size() == 0) return;
  std::vector<double> lo(n, std::numeric_limits<double>::infinity()), hi(n, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < reduced.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], reduced.x(k, i));
      hi[i] = std::max(hi[i], reduced.x(k, i));
    }
  for (std::size_t i = 0; i < n; ++i) {
    const double pad = std::max(0.5, 0.25 * (hi[i] - lo[i]));
    lo[i] -= pad;
    hi[i] += pad;
  }
  const std::string level = *c.plot + ".potential.dat";
  std::ofstream lf(level);
  if (!lf) throw usage_error("cannot write " + level);
  report::write_potential_dat(lf, sys.V, lo, hi, n == 1 ? 801 : 161, 2.0 * reduced.energy.front());
  out << "wrote " << level << "\n";
}

inline trajectory integrate_reduced(const run_config& c, const reduced_system& sys) {
  const std::size_t n = sys.space.n;
  auto p0 = doubles("--p0", c.p0, n), x0 = doubles("--x0", c.x0, n);
  std::vector<double> start(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    start[sys.space.p_x(i)] = p0[i];
    start[sys.space.x(i)] = x0[i];
  }
  integrate_options opt;
  opt.strict = c.strict;
  if (c.tol) opt.energy_tolerance = *c.tol;
  return integrate(sys.H, start, c.T, c.step, method_of(c.method), opt);
}

inline std::string trajectory_summary(const trajectory& tr) {
  std::ostringstream os;
  os << "method " << to_string(tr.method) << ", step " << carnot::detail::format_double(tr.step) << ", "
     << tr.size() << " samples to t = " << carnot::detail::format_double(tr.duration()) << "\n";
  os << "max relative energy drift " << carnot::detail::format_double(tr.max_drift);
  if (tr.flagged) os << " (exceeds tolerance from t = " << carnot::detail::format_double(*tr.first_violation) << ")";
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------------------------

inline int cmd_reduce(const run_config& c, std::ostream& out) {
  auto g = resolve(c.group);
  const bool symbolic = !c.mu && !(g.entry && g.entry->mu);
  reduced_system r = symbolic ? reduce_symbolic(g.model) : reduce(g.model, momentum_for(c, g));
  auto text = [&](const polynomial& p) { return symbolic ? symbolic_text(p) : p.to_string(); };
  const auto& split = g.model.split();
  const auto& labels = g.model.algebra.labels();
  auto y_sum = [&](const lie_vector_polynomial& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k].is_zero()) continue;
      s += (s.empty() ? "" : " + ") + std::string("(") + v[k].to_string() + ")*" + labels[split.y[k]];
    }
    return s.empty() ? std::string("0") : s;
  };

  if (format_of(c, "text") == "json") {
    auto j = report::header("reduce", g.name);
    j["mu"] = report::momentum_json(r.mu);
    j["reduced"] = report::reduction_json(r, symbolic);
    if (c.emit_connection) {
      report::json A = report::json::object(), beta = report::json::object();
      for (std::size_t i = 0; i < split.x.size(); ++i) A[labels[split.x[i]]] = y_sum(g.model.connection.A[i]);
      for (std::size_t l = 0; l < split.y.size(); ++l) beta[labels[split.y[l]]] = y_sum(g.model.connection.beta[l]);
      j["connection"] = {{"A", A}, {"beta", beta}};
    }
    emit(c, out, dump(j));
    return ok;
  }
  std::ostringstream os;
  os << "group " << g.name << " (dim " << g.model.algebra.dim() << ", n = " << split.x.size() << ", m = "
     << split.y.size() << ", n1 = " << split.n1 << ")\n";
  if (symbolic) os << "momentum kept symbolic: a1..a" << split.y.size() << "\n";
  os << "H_mu = " << text(r.H) << "\n";
  os << "V_mu = " << text(r.V) << "\n";
  for (std::size_t i = 0; i < r.F.size(); ++i) os << "F" << i + 1 << " = " << text(r.F[i]) << "\n";
  if (c.emit_connection) {
    for (std::size_t i = 0; i < split.x.size(); ++i)
      os << "A(" << labels[split.x[i]] << ") = " << y_sum(g.model.connection.A[i]) << "\n";
    for (std::size_t l = 0; l < split.y.size(); ++l)
      os << "beta(" << labels[split.y[l]] << ") = " << y_sum(g.model.connection.beta[l]) << "\n";
  }
  emit(c, out, os.str());
  return ok;
}

inline int cmd_integrate(const run_config& c, std::ostream& out, bool lifted) {
  auto g = resolve(c.group);
  const auto mu = momentum_for(c, g);
  const auto sys = reduce(g.model, mu);
  trajectory reduced = integrate_reduced(c, sys);
  trajectory tr = reduced;
  if (lifted || c.full) {
    lift_options lopt;
    tr = lift(reduced, doubles("--theta0", c.theta0, g.model.space().m), g.model, mu, lopt);
  }
  const std::string command = lifted ? "lift" : "integrate";
  const std::string fmt = format_of(c, "csv");
  if (fmt == "json") {
    auto j = report::header(command, g.name);
    j["mu"] = report::momentum_json(mu);
    j["trajectory"] = report::trajectory_json(tr, true);
    emit(c, out, dump(j));
  } else {
    std::ostringstream os;
    write_csv(os, tr);
    emit(c, out, os.str());
  }
  if (c.out) out << command << " " << g.name << ": " << trajectory_summary(tr) << "wrote " << *c.out << "\n";
  write_plot_files(c, reduced, sys, out);
  return ok;
}

inline int cmd_cut_time(const run_config& c, std::ostream& out) {
  auto g = resolve(c.group);
  const auto mu = momentum_for(c, g);
  const auto sys = reduce(g.model, mu);
  trajectory reduced = integrate_reduced(c, sys);
  const double tol = c.tol.value_or(1e-6);
  auto L = detect_period(reduced, tol);

  // Only the covector at t = 0 is needed to test the horizontal-start condition.
  const auto s = g.model.space();
  trajectory start;
  start.space = s;
  start.times = {0.0};
  std::vector<double> z(s.size(), 0.0);
  auto theta0 = doubles("--theta0", c.theta0, s.m);
  for (std::size_t i = 0; i < s.n; ++i) {
    z[s.p_x(i)] = reduced.p(0, i);
    z[s.x(i)] = reduced.x(0, i);
  }
  for (std::size_t l = 0; l < s.m; ++l) {
    z[s.p_theta(l)] = mu.values[l].get_d();
    z[s.theta(l)] = theta0[l];
  }
  start.states = {z};
  auto r = cut_time_bound(start, g.model, L);

  if (format_of(c, "text") == "json") {
    auto j = report::header("cut-time", g.name);
    j["mu"] = report::momentum_json(mu);
    j["trajectory"] = report::trajectory_json(reduced, false);
    j["recurrence_tolerance"] = tol;
    j["cut_time"] = report::cut_time_json(r);
    emit(c, out, dump(j));
  } else {
    std::ostringstream os;
    os << "cut-time " << g.name << "\n" << trajectory_summary(reduced);
    if (r.period)
      os << "period L = " << carnot::detail::format_double(*r.period) << "\n";
    else
      os << "period: none detected within T = " << carnot::detail::format_double(c.T) << "\n";
    os << "condition " << to_string(r.condition) << ": " << r.reason << "\n";
    if (r.bound)
      os << "bound t_cut <= " << carnot::detail::format_double(*r.bound) << "\n";
    else
      os << "bound: none\n";
    emit(c, out, os.str());
  }
  write_plot_files(c, reduced, sys, out);
  return c.strict && !r.bound ? inconclusive : ok;
}

inline int cmd_integrability(const run_config& c, std::ostream& out) {
  auto g = resolve(c.group);
  engel_family fam;
  if (c.family == "corrected")
    fam = engel_family::corrected;
  else if (c.family == "published")
    fam = engel_family::published;
  else
    throw usage_error("--family must be corrected or published");
  labelled_family family;
  if (g.entry) {
    family = standard_family(*g.entry, fam);
  } else {
    family = labelled_family{g.model.space(), {}, {}};
    family.add(full_hamiltonian(g.model), "H");
    family = with_momenta(std::move(family));
  }
  independence_options opt;
  opt.seed = c.seed;
  opt.samples = c.samples;
  auto r = involution_and_independence(g.model, family, opt);

  if (format_of(c, "text") == "json") {
    auto j = report::header("analyze-integrability", g.name);
    j["integrability"] = report::integrability_json(r, opt);
    emit(c, out, dump(j));
  } else {
    std::ostringstream os;
    os << "integrability " << g.name << ": " << to_string(r.verdict) << "\n";
    os << "integrals:";
    for (const auto& l : r.integrals.labels) os << " " << l;
    os << "\n";
    for (std::size_t k = 0; k < r.integrals.functions.size(); ++k)
      os << "  " << r.integrals.labels[k] << " = " << symbolic_text(r.integrals.functions[k]) << "\n";
    os << "Poisson brackets (exact):\n";
    for (const auto& b : r.residuals)
      os << "  {" << r.integrals.labels[b.i] << ", " << r.integrals.labels[b.j] << "} = " << symbolic_text(b.value) << "\n";
    os << "Jacobian full rank at " << r.full_rank_samples << " of " << r.ranks.size() << " samples (seed " << opt.seed
       << ")\n";
    os << "reason: " << r.reason << "\n";
    emit(c, out, os.str());
  }
  return c.strict && r.verdict == integrability_verdict::not_certified ? inconclusive : ok;
}

inline int cmd_metric_line(const run_config& c, std::ostream& out) {
  auto g = resolve(c.group);
  const auto mu = momentum_for(c, g);
  const auto sys = reduce(g.model, mu);
  trajectory forward = integrate_reduced(c, sys);
  metric_line_options opt;
  opt.all_f = c.all_f;
  auto v = metric_line_test(g.model, sys, forward, opt);

  if (format_of(c, "text") == "json") {
    auto j = report::header("analyze-metric-line", g.name);
    j["mu"] = report::momentum_json(mu);
    j["trajectory"] = report::trajectory_json(forward, false);
    j["metric_line"] = report::metric_line_json(v);
    emit(c, out, dump(j));
  } else {
    const auto& e = v.evidence;
    auto fd = [](double x) { return carnot::detail::format_double(x); };
    std::ostringstream os;
    os << "metric-line " << g.name << ": " << to_string(v.outcome) << "\n" << trajectory_summary(forward);
    os << "level V = " << fd(e.level) << ", Hill component " << to_string(e.component)
       << (e.trapped ? ", orbit trapped" : "") << "\n";
    os << "level set: " << e.level_points << " points, min |grad V| = " << fd(e.min_gradient) << ", "
       << e.critical_points << " critical points near the level" << (e.regular ? " (regular)" : "") << "\n";
    for (const auto& l : e.limits)
      os << "F" << l.index + 1 << ": forward " << fd(l.forward) << " (osc " << fd(l.forward_oscillation) << "), backward "
         << fd(l.backward) << " (osc " << fd(l.backward_oscillation) << ")\n";
    os << "hill average limsup " << fd(e.hill.limsup) << "\n";
    for (const auto& n : e.notes) os << "note: " << n << "\n";
    emit(c, out, os.str());
  }
  write_plot_files(c, forward, sys, out);
  return c.strict && v.outcome == metric_line_outcome::inconclusive ? inconclusive : ok;
}

inline int cmd_catalog(const run_config& c, const std::vector<std::string>& words, std::ostream& out) {
  if (words.empty()) throw usage_error("catalog expects list, show <name> or export <name>");
  const std::string& action = words[0];
  if (action == "list") {
    std::ostringstream os;
    for (const auto& [name, desc] : catalog::list()) os << name << "\t" << desc << "\n";
    emit(c, out, os.str());
    return ok;
  }
  if (action != "show" && action != "export") throw usage_error("unknown catalog action '" + action + "'");
  if (words.size() < 2) throw usage_error("catalog " + action + " needs an entry name");
  auto e = catalog::get(words[1], {words.begin() + 2, words.end()});
  const auto& alg = e.model.algebra;
  const auto& split = e.model.split();
  if (action == "export") {
    emit(c, out, export_group_spec(alg, split, e.first_layer, e.name + ": " + e.description));
    return ok;
  }
  std::ostringstream os;
  os << e.name << ": " << e.description << "\n";
  os << "dim " << alg.dim() << ", step " << alg.step() << "\n";
  os << "brackets:\n";
  for (const auto& b : alg.entries())
    os << "  [" << alg.labels()[b.a] << ", " << alg.labels()[b.b] << "] "
       << (b.coeff == 1 ? "" : "+= " + b.coeff.get_str() + " ") << alg.labels()[b.c] << "\n";
  auto names = [&](const std::vector<std::size_t>& v) {
    std::string s;
    for (auto i : v) s += (s.empty() ? "" : " ") + alg.labels()[i];
    return s;
  };
  os << "A = span{" << names(split.y) << "}, X = {" << names(split.x) << "}, n1 = " << split.n1 << "\n";
  if (e.golden) os << "H_mu = " << symbolic_text(e.golden_polynomial()) << "\n";
  if (e.mu) {
    os << "mu =";
    for (const auto& v : e.mu->values) os << " " << v.get_str();
    os << "\n";
  }
  emit(c, out, os.str());
  return ok;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Normal extremals of metabelian Carnot groups: reduction, integration and analysis", "carnot"};
  app.require_subcommand(1);
  run_config c;
  std::vector<std::string> catalog_words;

  auto group_options = [&](CLI::App* sub) {
    sub->add_option("group", c.group, "catalog entry with parameters, or a group-spec file")->required();
    sub->add_option("--mu", c.mu, "momentum on the basis of A, comma separated (e.g. 1,1/2,0)");
    sub->add_option("--format", c.format, "csv or json");
    sub->add_option("--out", c.out, "write the report or trajectory to this file");
  };
  auto dynamics_options = [&](CLI::App* sub) {
    sub->add_option("--p0", c.p0, "initial p_x, comma separated");
    sub->add_option("--x0", c.x0, "initial x, comma separated");
    sub->add_option("--theta0", c.theta0, "initial theta, comma separated");
    sub->add_option("--T", c.T, "horizon")->capture_default_str();
    sub->add_option("--step", c.step, "time step")->capture_default_str();
    sub->add_option("--method", c.method, "rk4 or midpoint")->capture_default_str();
    sub->add_option("--tol", c.tol, "energy tolerance (integrate, lift) or recurrence tolerance (cut-time)");
    sub->add_option("--plot", c.plot, "prefix for gnuplot .dat files (trajectory, potential)");
    sub->add_flag("--strict", c.strict, "fail on energy drift; exit 5 on inconclusive analyses");
  };

  auto* reduce = app.add_subcommand("reduce", "reduced Hamiltonian H_mu, V_mu and F_mu");
  group_options(reduce);
  reduce->add_flag("--emit-connection", c.emit_connection, "also print the connection A and the frame beta");

  auto* integ = app.add_subcommand("integrate", "integrate the reduced system");
  group_options(integ);
  dynamics_options(integ);
  integ->add_flag("--full", c.full, "lift to the full phase space");

  auto* lift_cmd = app.add_subcommand("lift", "integrate and lift to the full phase space");
  group_options(lift_cmd);
  dynamics_options(lift_cmd);

  auto* cut = app.add_subcommand("cut-time", "period of the reduced motion and the cut-time bound");
  group_options(cut);
  dynamics_options(cut);

  auto* analyze = app.add_subcommand("analyze", "integrability certificate or metric-line test");
  group_options(analyze);
  dynamics_options(analyze);
  auto* integ_flag = analyze->add_flag("--integrability", c.integrability, "Poisson involution and rank checks");
  auto* ml_flag = analyze->add_flag("--metric-line", c.metric_line, "metric-line exclusion test");
  integ_flag->excludes(ml_flag);
  analyze->add_option("--seed", c.seed, "seed for the rank samples")->capture_default_str();
  analyze->add_option("--samples", c.samples, "number of rank samples")->capture_default_str();
  analyze->add_option("--family", c.family, "Eng(n) family for odd n: corrected or published")->capture_default_str();
  analyze->add_flag("--all-f", c.all_f, "use every F_i in the asymptotic test");

  auto* cat = app.add_subcommand("catalog", "list, show or export built-in groups");
  cat->add_option("words", catalog_words, "list | show <name> [params] | export <name> [params]")->required();
  cat->add_option("--out", c.out, "write to this file");

  std::vector<std::string> argv_store{"carnot"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return usage;
  }

  try {
    if (reduce->parsed()) return detail::cmd_reduce(c, out);
    if (integ->parsed()) return detail::cmd_integrate(c, out, false);
    if (lift_cmd->parsed()) return detail::cmd_integrate(c, out, true);
    if (cut->parsed()) return detail::cmd_cut_time(c, out);
    if (analyze->parsed()) {
      if (c.integrability) return detail::cmd_integrability(c, out);
      if (c.metric_line) return detail::cmd_metric_line(c, out);
      throw usage_error("analyze needs --integrability or --metric-line");
    }
    return detail::cmd_catalog(c, catalog_words, out);
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case error_kind::parse: return usage;
      case error_kind::validation: return validation;
      default: return numeric;
    }
  }
}

}  // namespace carnot::cli

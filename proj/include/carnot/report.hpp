#pragma once

// JSON reports (schema 1) and gnuplot data files. Reports carry no timestamps or host data, so a
// fixed configuration gives byte-identical output.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "dynamics.hpp"
#include "reduction.hpp"

namespace carnot::report {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

inline json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline json momentum_json(const std::optional<momentum>& mu) {
  if (!mu) return nullptr;
  json a = json::array();
  for (const auto& v : mu->values) a.push_back(v.get_str());
  return a;
}

inline json header(const std::string& command, const std::string& group) {
  return json{{"schema", schema_version}, {"command", command}, {"group", group}};
}

inline json reduction_json(const reduced_system& r, bool symbolic) {
  auto text = [&](const polynomial& p) { return symbolic ? symbolic_text(p) : p.to_string(); };
  json F = json::array();
  for (const auto& f : r.F) F.push_back(text(f));
  return json{{"H", text(r.H)}, {"V", text(r.V)}, {"F", F}};
}

inline json trajectory_json(const trajectory& tr, bool samples) {
  json j{{"method", to_string(tr.method)},
         {"step", number(tr.step)},
         {"duration", number(tr.duration())},
         {"samples", tr.size()},
         {"energy_initial", tr.energy.empty() ? json(nullptr) : number(tr.energy.front())},
         {"max_relative_drift", number(tr.max_drift)},
         {"flagged", tr.flagged},
         {"first_violation", number(tr.first_violation)}};
  if (samples) {
    json cols = json::array({"t"});
    for (std::size_t v = 0; v < tr.space.size(); ++v) cols.push_back(tr.space.name(v));
    cols.push_back("H");
    json rows = json::array();
    for (std::size_t k = 0; k < tr.size(); ++k) {
      json row = json::array({number(tr.times[k])});
      for (double v : tr.states[k]) row.push_back(number(v));
      row.push_back(number(tr.energy[k]));
      rows.push_back(std::move(row));
    }
    j["columns"] = std::move(cols);
    j["rows"] = std::move(rows);
  }
  return j;
}

inline json cut_time_json(const cut_time_report& r) {
  return json{{"period", number(r.period)},
              {"condition", to_string(r.condition)},
              {"bound", number(r.bound)},
              {"reason", r.reason}};
}

inline json integrability_json(const integrability_report& r, const independence_options& opt) {
  json integrals = json::array();
  for (std::size_t k = 0; k < r.integrals.functions.size(); ++k)
    integrals.push_back({{"label", r.integrals.labels[k]}, {"function", symbolic_text(r.integrals.functions[k])}});
  json residuals = json::array();
  for (const auto& b : r.residuals)
    residuals.push_back({{"pair", json::array({r.integrals.labels[b.i], r.integrals.labels[b.j]})},
                         {"value", symbolic_text(b.value)}});
  return json{{"verdict", to_string(r.verdict)},
              {"involutive", r.involutive},
              {"independent", r.independent},
              {"integrals", integrals},
              {"residuals", residuals},
              {"rank_samples", r.ranks.size()},
              {"full_rank_samples", r.full_rank_samples},
              {"seed", opt.seed},
              {"reason", r.reason}};
}

inline json metric_line_json(const metric_line_verdict& v) {
  const auto& e = v.evidence;
  json limits = json::array();
  for (const auto& l : e.limits)
    limits.push_back({{"F", l.index + 1},
                      {"forward", number(l.forward)},
                      {"backward", number(l.backward)},
                      {"forward_oscillation", number(l.forward_oscillation)},
                      {"backward_oscillation", number(l.backward_oscillation)}});
  return json{{"outcome", to_string(v.outcome)},
              {"evidence",
               {{"horizon", number(e.horizon)},
                {"level", number(e.level)},
                {"orbit_box", {{"lo", numbers(e.box_lo)}, {"hi", numbers(e.box_hi)}}},
                {"hill_component", to_string(e.component)},
                {"component_box", {{"lo", numbers(e.component_lo)}, {"hi", numbers(e.component_hi)}}},
                {"trapped", e.trapped},
                {"level_points", e.level_points},
                {"min_gradient", number(e.min_gradient)},
                {"critical_points_on_level", e.critical_points},
                {"regular", e.regular},
                {"f_limits", limits},
                {"f_converged", e.f_converged},
                {"f_gap", number(e.f_gap)},
                {"hill_average_limsup", number(e.hill.limsup)},
                {"notes", e.notes}}}};
}

/// Columns: t x1..xn p_x1..p_xn H.
inline void write_trajectory_dat(std::ostream& os, const trajectory& tr) {
  const auto& s = tr.space;
  os << "# t";
  for (std::size_t i = 0; i < s.n; ++i) os << " " << s.name(s.x(i));
  for (std::size_t i = 0; i < s.n; ++i) os << " " << s.name(s.p_x(i));
  os << " H\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << detail::format_double(tr.times[k]);
    for (std::size_t i = 0; i < s.n; ++i) os << " " << detail::format_double(tr.x(k, i));
    for (std::size_t i = 0; i < s.n; ++i) os << " " << detail::format_double(tr.p(k, i));
    os << " " << detail::format_double(tr.energy[k]) << "\n";
  }
}

/// Samples V on a regular grid over [lo, hi] (n = 1: "x V"; n = 2: "x y V" blocks for splot, whose
/// contour at the energy level draws the Hill boundary).
inline void write_potential_dat(std::ostream& os, const polynomial& V, const std::vector<double>& lo,
                                const std::vector<double>& hi, std::size_t nodes, double level) {
  const auto s = V.space();
  compiled_polynomial f(V);
  std::vector<double> z(s.size(), 0.0);
  auto coord = [&](std::size_t i, std::size_t k) {
    return lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) / static_cast<double>(nodes - 1);
  };
  os << "# level " << detail::format_double(level) << "\n";
  if (s.n == 1) {
    os << "# x1 V\n";
    for (std::size_t k = 0; k < nodes; ++k) {
      z[s.x(0)] = coord(0, k);
      os << detail::format_double(z[s.x(0)]) << " " << detail::format_double(f(z.data())) << "\n";
    }
  } else if (s.n == 2) {
    os << "# x1 x2 V\n";
    for (std::size_t a = 0; a < nodes; ++a) {
      z[s.x(0)] = coord(0, a);
      for (std::size_t b = 0; b < nodes; ++b) {
        z[s.x(1)] = coord(1, b);
        os << detail::format_double(z[s.x(0)]) << " " << detail::format_double(z[s.x(1)]) << " "
           << detail::format_double(f(z.data())) << "\n";
      }
      os << "\n";
    }
  }
}

}  // namespace carnot::report

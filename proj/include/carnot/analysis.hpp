#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "catalog.hpp"
#include "connection.hpp"
#include "dynamics.hpp"
#include "error.hpp"
#include "polynomial.hpp"
#include "reduction.hpp"

namespace carnot {

// ---------------------------------------------------------------------------------------------
// Integrability

/// {f, H}; the zero polynomial certifies f as a prime integral.
inline polynomial verify_prime_integral(const polynomial& f, const polynomial& h) { return poisson(f, h); }

/// Momentum functions of Eng(n) in the 1-based notation X_1..X_n, Y_0..Y_{n+1}.
struct engel_momenta {
  group_model model;
  std::vector<polynomial> PX;  // PX[i - 1] = P_{X_i}
  std::vector<polynomial> PY;  // PY[l] = P_{Y_l}, l = 0..n+1
  polynomial H;

  std::size_t n() const { return PX.size(); }
  variable_space space() const { return model.space(); }

  /// L_ij = P_{X_i} P_{Y_j} - P_{X_j} P_{Y_i}, 1-based.
  polynomial L(std::size_t i, std::size_t j) const {
    check(i), check(j);
    return PX[i - 1] * PY[j] - PX[j - 1] * PY[i];
  }
  /// C_N = sum_{1 <= i < j <= N} L_ij^2.
  polynomial C(std::size_t N) const {
    check(N);
    polynomial c(space());
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t j = i + 1; j <= N; ++j) c += L(i, j).pow(2);
    return c;
  }

 private:
  void check(std::size_t i) const {
    if (i < 1 || i > n()) throw index_out_of_range("Eng index " + std::to_string(i) + " outside 1.." + std::to_string(n()));
  }
};

inline engel_momenta make_engel_momenta(group_model g) {
  engel_momenta e{std::move(g), {}, {}, polynomial()};
  const auto& split = e.model.split();
  for (auto i : split.x) e.PX.push_back(momentum_function(e.model, i));
  for (auto l : split.y) e.PY.push_back(momentum_function(e.model, l));
  e.H = full_hamiltonian(e.model);
  return e;
}

enum class engel_family { published, corrected };

struct labelled_family {
  variable_space space;
  std::vector<polynomial> functions;
  std::vector<std::string> labels;

  void add(polynomial f, std::string label) {
    functions.push_back(std::move(f));
    labels.push_back(std::move(label));
  }
};

/// Even n = 2v: H, L_12, L_34, ..., L_{2v-1,2v}, C_4, C_6, ..., C_{2v}.
/// Odd n = 2v+1: H, L_23, ..., L_{2v,2v+1} and C_2, C_4, ..., C_{2v} (published) or C_3, C_5, ...,
/// C_{2v+1} (corrected; the published choice fails {C_2, L_23} = 0 once n >= 3).
inline labelled_family engel_integrals(const engel_momenta& e, engel_family family = engel_family::corrected) {
  const std::size_t n = e.n();
  labelled_family f{e.space(), {}, {}};
  f.add(e.H, "H");
  auto L = [&](std::size_t i, std::size_t j) { f.add(e.L(i, j), "L" + std::to_string(i) + "," + std::to_string(j)); };
  auto C = [&](std::size_t N) { f.add(e.C(N), "C" + std::to_string(N)); };
  if (n % 2 == 0) {
    for (std::size_t i = 1; i < n; i += 2) L(i, i + 1);
    for (std::size_t N = 4; N <= n; N += 2) C(N);
  } else {
    for (std::size_t i = 2; i < n; i += 2) L(i, i + 1);
    for (std::size_t N = 2; N < n; N += 2) C(family == engel_family::published ? N : N + 1);
  }
  return f;
}

/// Appends the momenta p_t_1..p_t_m (the A-invariant coordinates).
inline labelled_family with_momenta(labelled_family f) {
  for (std::size_t l = 0; l < f.space.m; ++l)
    f.add(polynomial::variable(f.space, f.space.p_theta(l)), "p_t" + std::to_string(l + 1));
  return f;
}

enum class integrability_verdict { certified, codim1_automatic, not_certified };

inline std::string to_string(integrability_verdict v) {
  switch (v) {
    case integrability_verdict::certified: return "certified";
    case integrability_verdict::codim1_automatic: return "codim1-automatic";
    default: return "not-certified";
  }
}

struct bracket_residual {
  std::size_t i, j;
  polynomial value;
};

struct integrability_report {
  integrability_verdict verdict = integrability_verdict::not_certified;
  labelled_family integrals;
  std::vector<bracket_residual> residuals;  // every pair i < j, in order
  std::vector<std::size_t> ranks;           // numeric Jacobian rank per sample
  std::size_t full_rank_samples = 0;
  bool involutive = false;
  bool independent = false;
  std::string reason;
};

struct independence_options {
  std::size_t samples = 100;
  std::uint64_t seed = 1;
  double rank_threshold = 1e-8;  // relative to the largest singular value
  double required_fraction = 0.9;
  double sample_radius = 1.0;    // points drawn uniformly from [-r, r]^{2(n+m)}
};

inline std::size_t numeric_rank(const Eigen::MatrixXd& J, double threshold) {
  if (J.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > threshold * s[0]) ++r;
  return r;
}

/// Exact pairwise Poisson brackets plus the numeric rank of the Jacobian at seeded random points.
/// Arnold-Liouville additionally needs as many functions as half the phase dimension.
inline integrability_report involution_and_independence(const labelled_family& family, const independence_options& opt = {}) {
  integrability_report r;
  r.integrals = family;
  const auto& s = family.space;
  const auto& fs = family.functions;
  r.involutive = true;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = i + 1; j < fs.size(); ++j) {
      auto b = poisson(fs[i], fs[j]);
      if (!b.is_zero()) r.involutive = false;
      r.residuals.push_back({i, j, std::move(b)});
    }

  std::vector<std::vector<compiled_polynomial>> grad(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t v = 0; v < s.size(); ++v) grad[i].emplace_back(fs[i].partial(v));
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> coord(-opt.sample_radius, opt.sample_radius);
  std::vector<double> z(s.size());
  Eigen::MatrixXd J(static_cast<Eigen::Index>(fs.size()), static_cast<Eigen::Index>(s.size()));
  for (std::size_t k = 0; k < opt.samples; ++k) {
    for (auto& c : z) c = coord(rng);
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t v = 0; v < s.size(); ++v)
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(v)) = grad[i][v](z.data());
    const auto rank = numeric_rank(J, opt.rank_threshold);
    r.ranks.push_back(rank);
    if (rank == fs.size()) ++r.full_rank_samples;
  }
  r.independent = opt.samples > 0 &&
                  static_cast<double>(r.full_rank_samples) >= opt.required_fraction * static_cast<double>(opt.samples);

  const std::size_t needed = s.n + s.m;
  if (!r.involutive)
    r.reason = "some Poisson brackets are nonzero";
  else if (!r.independent)
    r.reason = "Jacobian rank below " + std::to_string(fs.size()) + " at " +
               std::to_string(opt.samples - r.full_rank_samples) + " of " + std::to_string(opt.samples) + " samples";
  else if (fs.size() != needed)
    r.reason = std::to_string(fs.size()) + " independent integrals in involution, " + std::to_string(needed) + " needed";
  else {
    r.verdict = integrability_verdict::certified;
    r.reason = "involutive and independent";
  }
  return r;
}

/// With dim A = dim G - 1 the flow is integrable whatever integrals are supplied.
inline integrability_report involution_and_independence(const group_model& g, const labelled_family& family,
                                                        const independence_options& opt = {}) {
  auto r = involution_and_independence(family, opt);
  if (g.space().n == 1) {
    r.verdict = integrability_verdict::codim1_automatic;
    r.reason = "dim A = dim G - 1";
  }
  return r;
}

/// Cartan group: C = a3 P_X1 - a2 P_X2 + a1 a3 x2 + a3^2/2 x2^2 with a_l = p_t_l.
inline polynomial f23_integral(const group_model& g) {
  return parse_polynomial("p_t3*p_x1 - p_t2*p_x2 + p_t1*p_t3*x2 + p_t3^2/2*x2^2", g.space());
}

/// N_{6,2,5a*}: I = P_X1 P_Y3 - P_X2 P_Y2 + 1/2 P_Y1^2.
inline polynomial n6_integral(const group_model& g) {
  auto P = [&](std::size_t i) { return momentum_function(g, i); };
  return P(0) * P(4) - P(1) * P(3) + P(2).pow(2) * rational(1, 2);
}

/// H, the integrals known for the entry, and the momenta p_t.
inline labelled_family standard_family(const catalog_entry& e, engel_family family = engel_family::corrected) {
  const auto& g = e.model;
  if (e.name.rfind("eng(", 0) == 0) return with_momenta(engel_integrals(make_engel_momenta(g), family));
  labelled_family f{g.space(), {}, {}};
  f.add(full_hamiltonian(g), "H");
  if (e.name == "f23") f.add(f23_integral(g), "C");
  if (e.name == "n6_2_5a") f.add(n6_integral(g), "I");
  return with_momenta(std::move(f));
}

// ---------------------------------------------------------------------------------------------
// Metric lines

struct hill_average_result {
  std::vector<double> times;
  std::vector<double> values;  // s(T) = (1/T) int_0^T sqrt(max(0, 1 - |xdot|^2)) dt
  double limsup = 0.0;         // sup of s over the trailing half
};

inline hill_average_result hill_average(const trajectory& tr) {
  hill_average_result r;
  const std::size_t N = tr.size();
  if (N < 2) return r;
  std::vector<double> f(N);
  for (std::size_t k = 0; k < N; ++k) {
    double v2 = 0.0;
    for (std::size_t i = 0; i < tr.space.n; ++i) v2 += tr.xdot(k, i) * tr.xdot(k, i);
    f[k] = std::sqrt(std::max(0.0, 1.0 - v2));
  }
  auto I = cumulative_simpson(f, tr.step);
  for (std::size_t k = 1; k < N; ++k) {
    r.times.push_back(tr.times[k]);
    r.values.push_back(I[k] / tr.times[k]);
  }
  const double half = 0.5 * tr.duration();
  r.limsup = 0.0;
  for (std::size_t k = 0; k < r.times.size(); ++k)
    if (r.times[k] >= half) r.limsup = std::max(r.limsup, r.values[k]);
  return r;
}

enum class metric_line_outcome { excluded_by_1, excluded_by_2, inconclusive };

inline std::string to_string(metric_line_outcome o) {
  switch (o) {
    case metric_line_outcome::excluded_by_1: return "excluded-by-1";
    case metric_line_outcome::excluded_by_2: return "excluded-by-2";
    default: return "inconclusive";
  }
}

struct metric_line_options {
  double epsilon = 1e-3;        // level band |V - c| <= epsilon
  double delta = 1e-6;          // regularity threshold on |grad V|
  std::size_t level_grid = 64;  // nodes per axis, n <= 3
  double f_oscillation = 1e-4;
  double f_gap = 1e-3;
  bool all_f = false;           // use F_i for every i instead of i <= n1
  double energy_tolerance = 1e-9;
};

enum class component_status { bounded, unbounded, not_detected };

inline std::string to_string(component_status c) {
  switch (c) {
    case component_status::bounded: return "bounded";
    case component_status::unbounded: return "unbounded";
    default: return "not-detected";
  }
}

struct f_limit {
  std::size_t index;  // 0-based F index
  double forward, backward;
  double forward_oscillation, backward_oscillation;
};

struct metric_line_evidence {
  double horizon = 0.0;
  double level = 1.0;  // c = 2 H: turning points satisfy V = c
  std::vector<double> box_lo, box_hi;
  component_status component = component_status::not_detected;
  std::vector<double> component_lo, component_hi;
  bool trapped = false;
  std::size_t level_points = 0;
  double min_gradient = std::numeric_limits<double>::infinity();
  std::size_t critical_points = 0;  // critical points of V found within epsilon of the level
  bool regular = false;
  std::vector<f_limit> limits;
  bool f_converged = false;
  double f_gap = 0.0;
  hill_average_result hill;
  std::vector<std::string> notes;
};

struct metric_line_verdict {
  metric_line_outcome outcome = metric_line_outcome::inconclusive;
  metric_line_evidence evidence;
};

namespace detail {

struct grid_box {
  std::vector<double> lo, hi;
  std::size_t nodes;

  std::size_t dim() const { return lo.size(); }
  std::size_t total() const {
    std::size_t t = 1;
    for (std::size_t i = 0; i < dim(); ++i) t *= nodes;
    return t;
  }
  double coord(std::size_t i, std::size_t k) const {
    return lo[i] + (hi[i] - lo[i]) * static_cast<double>(k) / static_cast<double>(nodes - 1);
  }
  void point(std::size_t flat, std::vector<double>& x, std::vector<std::size_t>& idx) const {
    for (std::size_t i = 0; i < dim(); ++i) {
      idx[i] = flat % nodes;
      flat /= nodes;
      x[i] = coord(i, idx[i]);
    }
  }
};

/// Scatters x into a reduced phase point (p = 0) for evaluating x-only polynomials.
inline void embed(const variable_space& s, const std::vector<double>& x, std::vector<double>& z) {
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t i = 0; i < s.n; ++i) z[s.x(i)] = x[i];
}

/// Flood fill of {V <= c + eps} from x0 on a uniform grid; reports whether it stays off the border.
inline std::optional<std::pair<std::vector<double>, std::vector<double>>> flood_component(
    const compiled_polynomial& V, const variable_space& s, const grid_box& box, const std::vector<double>& x0,
    double cap) {
  const std::size_t d = box.dim(), total = box.total();
  std::vector<char> seen(total, 0);
  std::vector<double> x(d), z(s.size());
  std::vector<std::size_t> idx(d);
  std::size_t start = 0, stride = 1;
  for (std::size_t i = 0; i < d; ++i) {
    double u = (x0[i] - box.lo[i]) / (box.hi[i] - box.lo[i]) * static_cast<double>(box.nodes - 1);
    start += static_cast<std::size_t>(std::llround(std::clamp(u, 0.0, static_cast<double>(box.nodes - 1)))) * stride;
    stride *= box.nodes;
  }
  auto allowed = [&](std::size_t flat) {
    box.point(flat, x, idx);
    embed(s, x, z);
    return V(z.data()) <= cap;
  };
  if (!allowed(start)) return std::nullopt;
  std::vector<double> lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  std::deque<std::size_t> queue{start};
  seen[start] = 1;
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    box.point(cur, x, idx);
    for (std::size_t i = 0; i < d; ++i) {
      if (idx[i] == 0 || idx[i] + 1 == box.nodes) return std::nullopt;
      lo[i] = std::min(lo[i], x[i]);
      hi[i] = std::max(hi[i], x[i]);
    }
    std::size_t st = 1;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t nb : {cur - st, cur + st})
        if (!seen[nb]) {
          seen[nb] = 1;
          if (allowed(nb)) queue.push_back(nb);
        }
      st *= box.nodes;
    }
  }
  // One cell of slack on each side: the true boundary lies between the last allowed node and the next.
  for (std::size_t i = 0; i < d; ++i) {
    double h = (box.hi[i] - box.lo[i]) / static_cast<double>(box.nodes - 1);
    lo[i] -= h;
    hi[i] += h;
  }
  return std::make_pair(lo, hi);
}

}  // namespace detail

/// Sufficient conditions for a reduced normal extremal not to come from a metric line: (1) the
/// orbit is trapped in a bounded Hill component whose boundary level is regular for V_mu, or (2)
/// F_mu(x(t)) has distinct limits as t -> +inf and t -> -inf. Never concludes that a curve is a
/// metric line. The backward half is obtained by integrating from (-p0, x0).
inline metric_line_verdict metric_line_test(const group_model& g, const reduced_system& sys, const trajectory& forward,
                                            const metric_line_options& opt = {}) {
  if (!g.splitting.x_abelian) throw precondition_x_not_abelian("span(X) is not an abelian subalgebra");
  const auto& s = sys.space;
  if (forward.space.n != s.n || forward.space.m != 0 || s.m != 0)
    throw dimension_mismatch("metric_line_test expects a reduced trajectory and a numeric reduction");
  if (forward.size() < 8) throw bad_parameter("trajectory too short for the metric-line test");
  compiled_polynomial Hc(sys.H);
  const double h0 = Hc(forward.states[0].data());
  if (std::abs(h0 - 0.5) > opt.energy_tolerance)
    throw not_unit_energy("H(start) = " + std::to_string(h0) + ", expected 1/2");

  metric_line_verdict out;
  auto& ev = out.evidence;
  ev.horizon = forward.duration();
  ev.level = 2.0 * h0;

  std::vector<double> back_start = forward.states[0];
  for (std::size_t i = 0; i < s.n; ++i) back_start[s.p_x(i)] = -back_start[s.p_x(i)];
  integrate_options iopt;
  iopt.strict = false;
  iopt.energy_tolerance = std::max(1e-6, 2 * forward.max_drift);
  const trajectory backward = integrate(sys.H, back_start, forward.duration(), forward.step, forward.method, iopt);

  const std::size_t n = s.n;
  ev.box_lo.assign(n, std::numeric_limits<double>::infinity());
  ev.box_hi.assign(n, -std::numeric_limits<double>::infinity());
  for (const trajectory* tr : {&forward, &backward})
    for (std::size_t k = 0; k < tr->size(); ++k)
      for (std::size_t i = 0; i < n; ++i) {
        ev.box_lo[i] = std::min(ev.box_lo[i], tr->x(k, i));
        ev.box_hi[i] = std::max(ev.box_hi[i], tr->x(k, i));
      }

  // Condition (1): trapping in a bounded component of {V <= c}.
  const compiled_polynomial V(sys.V);
  std::vector<double> x0(n);
  for (std::size_t i = 0; i < n; ++i) x0[i] = forward.x(0, i);
  if (n <= 2) {
    const std::size_t nodes = n == 1 ? 4097 : 257;
    ev.component = component_status::unbounded;
    for (double scale = 2.0; scale <= 1024.0; scale *= 2.0) {
      detail::grid_box window{std::vector<double>(n), std::vector<double>(n), nodes};
      for (std::size_t i = 0; i < n; ++i) {
        const double c = 0.5 * (ev.box_lo[i] + ev.box_hi[i]);
        const double w = std::max(0.5 * (ev.box_hi[i] - ev.box_lo[i]), 1e-3) * scale;
        window.lo[i] = c - w;
        window.hi[i] = c + w;
      }
      auto comp = detail::flood_component(V, s, window, x0, ev.level + opt.epsilon);
      if (comp) {
        ev.component = component_status::bounded;
        ev.component_lo = comp->first;
        ev.component_hi = comp->second;
        break;
      }
    }
    if (ev.component == component_status::bounded) {
      ev.trapped = true;
      for (std::size_t i = 0; i < n; ++i)
        if (ev.box_lo[i] < ev.component_lo[i] || ev.box_hi[i] > ev.component_hi[i]) ev.trapped = false;
    } else {
      ev.notes.push_back("Hill component of the start point reaches the search window border");
    }
  } else {
    ev.notes.push_back("Hill component detection is only available for n <= 2; finite-horizon box reported");
  }

  if (n <= 3) {
    // Level set sampled on a grid over the component (or the orbit box) dilated by 25%.
    const auto& lo0 = ev.component == component_status::bounded ? ev.component_lo : ev.box_lo;
    const auto& hi0 = ev.component == component_status::bounded ? ev.component_hi : ev.box_hi;
    detail::grid_box grid{std::vector<double>(n), std::vector<double>(n), opt.level_grid};
    for (std::size_t i = 0; i < n; ++i) {
      const double w = std::max(hi0[i] - lo0[i], 1e-3);
      grid.lo[i] = lo0[i] - 0.25 * w;
      grid.hi[i] = hi0[i] + 0.25 * w;
    }
    std::vector<compiled_polynomial> dV;
    for (std::size_t i = 0; i < n; ++i) dV.emplace_back(sys.V.partial(s.x(i)));
    std::vector<double> x(n), y(n), z(s.size());
    std::vector<std::size_t> idx(n);
    auto value = [&](const std::vector<double>& p) {
      detail::embed(s, p, z);
      return V(z.data()) - ev.level;
    };
    auto gradient_at = [&](const std::vector<double>& p) {
      detail::embed(s, p, z);
      double g2 = 0.0;
      for (const auto& d : dV) g2 += d(z.data()) * d(z.data());
      ev.min_gradient = std::min(ev.min_gradient, std::sqrt(g2));
      ++ev.level_points;
    };
    const std::size_t total = grid.total();
    for (std::size_t flat = 0; flat < total; ++flat) {
      grid.point(flat, x, idx);
      const double fx = value(x);
      if (std::abs(fx) <= opt.epsilon) gradient_at(x);
      for (std::size_t i = 0; i < n; ++i) {
        if (idx[i] + 1 == grid.nodes) continue;
        y = x;
        y[i] = grid.coord(i, idx[i] + 1);
        const double fy = value(y);
        if ((fx < 0) == (fy < 0)) continue;
        double a = x[i], b = y[i], fa = fx;
        std::vector<double> m = x;
        for (int it = 0; it < 60; ++it) {
          m[i] = 0.5 * (a + b);
          const double fm = value(m);
          if ((fm < 0) == (fa < 0)) {
            a = m[i];
            fa = fm;
          } else {
            b = m[i];
          }
        }
        m[i] = 0.5 * (a + b);
        gradient_at(m);
      }
    }
    // Grid sampling misses level sets that touch a critical point tangentially, so critical points
    // are also located directly: Newton on grad V = 0 from every discrete local minimum of |grad V|.
    std::vector<std::vector<compiled_polynomial>> d2V(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d2V[i].emplace_back(sys.V.partial(s.x(i)).partial(s.x(j)));
    std::vector<double> gnorm(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
      grid.point(flat, x, idx);
      detail::embed(s, x, z);
      double g2 = 0.0;
      for (const auto& d : dV) g2 += d(z.data()) * d(z.data());
      gnorm[flat] = g2;
    }
    for (std::size_t flat = 0; flat < total; ++flat) {
      grid.point(flat, x, idx);
      bool local_min = true;
      std::size_t st = 1;
      for (std::size_t i = 0; i < n && local_min; ++i) {
        if (idx[i] > 0 && gnorm[flat - st] < gnorm[flat]) local_min = false;
        if (idx[i] + 1 < grid.nodes && gnorm[flat + st] < gnorm[flat]) local_min = false;
        st *= grid.nodes;
      }
      if (!local_min) continue;
      Eigen::VectorXd p(static_cast<Eigen::Index>(n)), grad(static_cast<Eigen::Index>(n));
      Eigen::MatrixXd hess(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) p[static_cast<Eigen::Index>(i)] = x[i];
      for (int it = 0; it < 100; ++it) {
        for (std::size_t i = 0; i < n; ++i) y[i] = p[static_cast<Eigen::Index>(i)];
        detail::embed(s, y, z);
        for (std::size_t i = 0; i < n; ++i) {
          grad[static_cast<Eigen::Index>(i)] = dV[i](z.data());
          for (std::size_t j = 0; j < n; ++j)
            hess(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d2V[i][j](z.data());
        }
        if (grad.norm() <= opt.delta * 1e-3) break;
        p -= hess.completeOrthogonalDecomposition().solve(grad);
      }
      bool inside = true;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = p[static_cast<Eigen::Index>(i)];
        if (!(y[i] >= grid.lo[i] && y[i] <= grid.hi[i])) inside = false;
      }
      if (!inside) continue;
      detail::embed(s, y, z);
      double g2 = 0.0;
      for (const auto& d : dV) g2 += d(z.data()) * d(z.data());
      if (std::sqrt(g2) <= opt.delta && std::abs(V(z.data()) - ev.level) <= opt.epsilon) {
        ++ev.critical_points;
        gradient_at(y);
      }
    }
    ev.regular = ev.min_gradient > opt.delta;
  } else {
    ev.notes.push_back("level-set regularity grid is capped at n <= 3");
  }

  if (ev.trapped && ev.regular) out.outcome = metric_line_outcome::excluded_by_1;

  // Condition (2): limits of F along both ends from windows [T/4, T/2] and [T/2, T].
  const std::size_t f_count = opt.all_f ? sys.F.size() : std::min(sys.n1, sys.F.size());
  if (f_count == 0) ev.notes.push_back("no F components to test (n1 = 0)");
  bool all_converged = f_count > 0;
  double worst_osc = 0.0, gap = 0.0;
  const double T = forward.duration();
  for (std::size_t fi = 0; fi < f_count; ++fi) {
    compiled_polynomial F(sys.F[fi]);
    auto tail = [&](const trajectory& tr, double& osc) {
      double sum1 = 0, sum2 = 0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
      std::size_t n1 = 0, n2 = 0;
      for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.times[k];
        if (t < T / 4) continue;
        const double v = F(tr.states[k].data());
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if (t < T / 2) {
          sum1 += v;
          ++n1;
        } else {
          sum2 += v;
          ++n2;
        }
      }
      const double m1 = n1 ? sum1 / n1 : 0.0, m2 = n2 ? sum2 / n2 : 0.0;
      osc = std::max(hi - lo, std::abs(m2 - m1));
      return m2;
    };
    f_limit lim{fi, 0, 0, 0, 0};
    lim.forward = tail(forward, lim.forward_oscillation);
    lim.backward = tail(backward, lim.backward_oscillation);
    worst_osc = std::max({worst_osc, lim.forward_oscillation, lim.backward_oscillation});
    if (lim.forward_oscillation >= opt.f_oscillation || lim.backward_oscillation >= opt.f_oscillation)
      all_converged = false;
    gap = std::max(gap, std::abs(lim.forward - lim.backward));
    ev.limits.push_back(lim);
  }
  ev.f_converged = all_converged;
  ev.f_gap = gap;
  if (out.outcome == metric_line_outcome::inconclusive && all_converged &&
      gap > std::max(opt.f_gap, 10.0 * worst_osc))
    out.outcome = metric_line_outcome::excluded_by_2;

  ev.hill = hill_average(forward);
  return out;
}

}  // namespace carnot

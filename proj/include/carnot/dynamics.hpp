#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "connection.hpp"
#include "error.hpp"
#include "polynomial.hpp"
#include "reduction.hpp"

namespace carnot {

enum class integration_method { rk4, implicit_midpoint };

inline std::string to_string(integration_method m) { return m == integration_method::rk4 ? "rk4" : "implicit-midpoint"; }

/// Hamiltonian vector field generated from exact partial derivatives, evaluated in doubles.
/// dq/dt = dH/dp, dp/dt = -dH/dq.
class hamiltonian_field {
 public:
  explicit hamiltonian_field(const polynomial& h) : space_(h.space()), h_(h) {
    for (std::size_t v = 0; v < space_.size(); ++v) {
      std::size_t c = space_.conjugate(v);
      polynomial d = h.partial(c);
      if (space_.is_momentum(v)) d = -d;
      rates_.emplace_back(d);
    }
  }

  const variable_space& space() const { return space_; }
  double energy(const double* z) const { return h_(z); }
  void operator()(const double* z, double* dz) const {
    for (std::size_t v = 0; v < rates_.size(); ++v) dz[v] = rates_[v](z);
  }

 private:
  variable_space space_;
  compiled_polynomial h_;
  std::vector<compiled_polynomial> rates_;
};

struct trajectory {
  variable_space space;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> rates;  // time derivative of the state at each sample
  std::vector<double> energy;
  std::vector<double> mu;  // momentum coefficients (p_t) carried by the run
  double step = 0.0;
  integration_method method = integration_method::rk4;
  bool flagged = false;                  // energy drift exceeded the tolerance somewhere
  std::optional<double> first_violation; // time of the first such sample
  double max_drift = 0.0;

  std::size_t size() const { return times.size(); }
  double duration() const { return times.empty() ? 0.0 : times.back(); }
  double x(std::size_t k, std::size_t i) const { return states[k][space.x(i)]; }
  double p(std::size_t k, std::size_t i) const { return states[k][space.p_x(i)]; }
  double theta(std::size_t k, std::size_t l) const { return states[k][space.theta(l)]; }
  double xdot(std::size_t k, std::size_t i) const { return rates[k][space.x(i)]; }
};

struct integrate_options {
  double energy_tolerance = 1e-6;  // relative to max(1, |H(0)|)
  bool strict = true;              // throw on drift instead of only flagging the run
  double midpoint_tolerance = 1e-12;
  int midpoint_max_iterations = 50;
};

/// Fixed-step integration of Hamilton's equations over [0, T]. The step is adjusted down so that
/// the grid ends exactly at T.
inline trajectory integrate(const polynomial& h, const std::vector<double>& start, double T, double step,
                            integration_method method = integration_method::rk4, const integrate_options& opt = {}) {
  const auto s = h.space();
  if (start.size() != s.size())
    throw dimension_mismatch("initial state has " + std::to_string(start.size()) + " coordinates, expected " +
                             std::to_string(s.size()));
  if (!(step > 0.0) || !std::isfinite(step)) throw bad_parameter("step must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) throw bad_parameter("duration must be non-negative");
  for (double v : start)
    if (!std::isfinite(v)) throw non_finite_state(0.0);

  hamiltonian_field field(h);
  const std::size_t dim = s.size();
  const std::size_t steps = T == 0.0 ? 0 : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T / step)));
  const double dt = steps == 0 ? step : T / static_cast<double>(steps);

  trajectory tr;
  tr.space = s;
  tr.step = dt;
  tr.method = method;
  tr.times.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  tr.rates.reserve(steps + 1);
  tr.energy.reserve(steps + 1);
  for (std::size_t l = 0; l < s.m; ++l) tr.mu.push_back(start[s.p_theta(l)]);

  std::vector<double> z = start, k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim), next(dim), mid(dim);
  const double h0 = field.energy(z.data());
  const double scale = std::max(1.0, std::abs(h0));

  auto record = [&](double t) {
    for (double v : z)
      if (!std::isfinite(v)) throw non_finite_state(t);
    field(z.data(), k1.data());
    const double e = field.energy(z.data());
    const double drift = std::abs(e - h0) / scale;
    tr.max_drift = std::max(tr.max_drift, drift);
    if (drift > opt.energy_tolerance && !tr.flagged) {
      tr.flagged = true;
      tr.first_violation = t;
      if (opt.strict) throw energy_drift_exceeded(t, drift);
    }
    tr.times.push_back(t);
    tr.states.push_back(z);
    tr.rates.push_back(k1);
    tr.energy.push_back(e);
  };

  record(0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    if (method == integration_method::rk4) {
      field(z.data(), k1.data());
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + 0.5 * dt * k1[i];
      field(tmp.data(), k2.data());
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + 0.5 * dt * k2[i];
      field(tmp.data(), k3.data());
      for (std::size_t i = 0; i < dim; ++i) tmp[i] = z[i] + dt * k3[i];
      field(tmp.data(), k4.data());
      for (std::size_t i = 0; i < dim; ++i) z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    } else {
      field(z.data(), k1.data());
      for (std::size_t i = 0; i < dim; ++i) next[i] = z[i] + dt * k1[i];
      bool converged = false;
      for (int it = 0; it < opt.midpoint_max_iterations && !converged; ++it) {
        for (std::size_t i = 0; i < dim; ++i) mid[i] = 0.5 * (z[i] + next[i]);
        field(mid.data(), k2.data());
        double change = 0.0, size = 1.0;
        for (std::size_t i = 0; i < dim; ++i) {
          double updated = z[i] + dt * k2[i];
          change = std::max(change, std::abs(updated - next[i]));
          size = std::max(size, std::abs(updated));
          next[i] = updated;
        }
        converged = change <= opt.midpoint_tolerance * size;
      }
      if (!converged)
        throw numeric_error("implicit midpoint iteration did not converge at t = " + std::to_string(static_cast<double>(k) * dt));
      z = next;
    }
    record(k == steps ? T : static_cast<double>(k) * dt);
  }
  return tr;
}

/// Cumulative integral of uniformly sampled values: composite Simpson at even nodes, a
/// three-point rule on the last interval at odd nodes.
inline std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n == 2) {
    out[1] = 0.5 * h * (f[0] + f[1]);
    return out;
  }
  for (std::size_t k = 2; k < n; k += 2) out[k] = out[k - 2] + h / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
  for (std::size_t k = 1; k < n; k += 2) {
    if (k + 1 < n)
      out[k] = out[k - 1] + h / 12.0 * (5.0 * f[k - 1] + 8.0 * f[k] - f[k + 1]);
    else
      out[k] = out[k - 1] + h / 12.0 * (-f[k - 2] + 8.0 * f[k - 1] + 5.0 * f[k]);
  }
  return out;
}

struct lift_options {
  double quadrature_tolerance = 1e-8;  // Richardson error estimate bound, relative to max(1, |theta|)
};

/// theta_i(t) = theta0_i + int_0^t dH/dp_t_i along the reduced trajectory with p_t = mu. The
/// integrand equals sum_j (p_x_j + <mu,A_j>) A_j^i + sum_{l <= n1} <mu,beta_l> beta_l^i.
inline trajectory lift(const trajectory& reduced, const std::vector<double>& theta0, const group_model& g,
                       const momentum& mu, const lift_options& opt = {}) {
  const auto s = g.space();
  if (reduced.space.n != s.n || reduced.space.m != 0) throw dimension_mismatch("lift expects a reduced trajectory on T*R^n");
  if (theta0.size() != s.m || mu.size() != s.m) throw dimension_mismatch("theta0 and mu must have m entries");
  const std::size_t N = reduced.size();
  if (N < 5) throw grid_too_coarse("lift needs at least five samples");

  const polynomial h = full_hamiltonian(g);
  const auto map = detail::reduced_variable_map(s);
  std::vector<compiled_polynomial> rate;
  for (std::size_t l = 0; l < s.m; ++l) {
    polynomial r = h.partial(s.p_theta(l));
    for (std::size_t j = 0; j < s.m; ++j) r = r.substitute(s.p_theta(j), polynomial::constant(s, mu.values[j]));
    rate.emplace_back(r.remap(reduced.space, map));
  }
  hamiltonian_field full_field(h);

  trajectory out;
  out.space = s;
  out.times = reduced.times;
  out.step = reduced.step;
  out.method = reduced.method;
  out.flagged = reduced.flagged;
  out.first_violation = reduced.first_violation;
  out.max_drift = reduced.max_drift;
  out.energy = reduced.energy;
  for (const auto& v : mu.values) out.mu.push_back(v.get_d());
  out.states.assign(N, std::vector<double>(s.size(), 0.0));
  out.rates.assign(N, std::vector<double>(s.size(), 0.0));
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t i = 0; i < s.n; ++i) {
      out.states[k][s.p_x(i)] = reduced.p(k, i);
      out.states[k][s.x(i)] = reduced.x(k, i);
    }
    for (std::size_t l = 0; l < s.m; ++l) out.states[k][s.p_theta(l)] = out.mu[l];
  }

  for (std::size_t l = 0; l < s.m; ++l) {
    std::vector<double> f(N);
    for (std::size_t k = 0; k < N; ++k) f[k] = rate[l](reduced.states[k].data());
    auto fine = cumulative_simpson(f, reduced.step);
    // Richardson check against the half-resolution rule at shared nodes (multiples of 4).
    std::vector<double> coarse_f;
    for (std::size_t k = 0; k < N; k += 2) coarse_f.push_back(f[k]);
    auto coarse = cumulative_simpson(coarse_f, 2.0 * reduced.step);
    for (std::size_t k = 0; k + 1 < N; k += 4) {
      const double estimate = std::abs(fine[k] - coarse[k / 2]) / 15.0;
      if (estimate > opt.quadrature_tolerance * std::max(1.0, std::abs(fine[k])))
        throw grid_too_coarse("lift quadrature error estimate " + std::to_string(estimate) + " at t = " +
                              std::to_string(reduced.times[k]));
    }
    for (std::size_t k = 0; k < N; ++k) out.states[k][s.theta(l)] = theta0[l] + fine[k];
  }
  for (std::size_t k = 0; k < N; ++k) full_field(out.states[k].data(), out.rates[k].data());
  return out;
}

/// (p_x, x) part of a full trajectory.
inline trajectory project(const trajectory& full) {
  const auto& s = full.space;
  trajectory r = full;
  r.space = variable_space{s.n, 0, s.degree_cap};
  for (std::size_t k = 0; k < full.size(); ++k) {
    std::vector<double> z(2 * s.n), dz(2 * s.n);
    for (std::size_t i = 0; i < s.n; ++i) {
      z[r.space.p_x(i)] = full.states[k][s.p_x(i)];
      z[r.space.x(i)] = full.states[k][s.x(i)];
      dz[r.space.p_x(i)] = full.rates[k][s.p_x(i)];
      dz[r.space.x(i)] = full.rates[k][s.x(i)];
    }
    r.states[k] = std::move(z);
    r.rates[k] = std::move(dz);
  }
  return r;
}

namespace detail {

/// Cubic Hermite interpolation of the state at time t using the stored derivatives.
inline std::vector<double> hermite_state(const trajectory& tr, double t) {
  const double h = tr.step;
  std::size_t k = static_cast<std::size_t>(std::floor(t / h));
  if (k + 1 >= tr.size()) k = tr.size() - 2;
  const double u = (t - tr.times[k]) / h;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  std::vector<double> z(tr.states[k].size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = h00 * tr.states[k][i] + h10 * h * tr.rates[k][i] + h01 * tr.states[k + 1][i] + h11 * h * tr.rates[k + 1][i];
  return z;
}

inline double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace detail

/// Smallest L > 0 with |z(t + L) - z(t)| <= tol over a window, using the full reduced state
/// (momenta and positions). Candidates are local minima of |z(t) - z(0)| refined by golden
/// section search on the Hermite interpolant.
inline std::optional<double> detect_period(const trajectory& tr, double tol = 1e-6) {
  const std::size_t N = tr.size();
  if (N < 8) return std::nullopt;
  const auto& z0 = tr.states[0];
  std::vector<double> d(N);
  for (std::size_t k = 0; k < N; ++k) d[k] = detail::distance(tr.states[k], z0);

  // The orbit must first leave a neighbourhood of the start, otherwise it is an equilibrium.
  const double depart = std::max(100.0 * tol, 1e-6);
  std::size_t k = 1;
  while (k < N && d[k] < depart) ++k;
  if (k >= N) return std::nullopt;

  for (; k + 1 < N; ++k) {
    if (!(d[k] <= d[k - 1] && d[k] <= d[k + 1])) continue;
    // Local minimum; refine inside [t_{k-1}, t_{k+1}].
    double a = tr.times[k - 1], b = tr.times[k + 1];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto f = [&](double t) { return detail::distance(detail::hermite_state(tr, t), z0); };
    double c = b - g * (b - a), e = a + g * (b - a), fc = f(c), fe = f(e);
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, b); ++it) {
      if (fc < fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = f(e);
      }
    }
    const double L = 0.5 * (a + b);
    if (f(L) > tol) continue;
    // Recurrence over a window of samples.
    bool ok = true;
    const double window = std::min(L, tr.duration() - L);
    for (std::size_t j = 0; j < N && tr.times[j] <= window && ok; j += std::max<std::size_t>(1, N / 2000))
      ok = detail::distance(detail::hermite_state(tr, tr.times[j] + L), tr.states[j]) <= tol;
    if (ok) return L;
  }
  return std::nullopt;
}

enum class cut_condition { abelian_complement, horizontal_start, none };

inline std::string to_string(cut_condition c) {
  switch (c) {
    case cut_condition::abelian_complement: return "abelian-complement";
    case cut_condition::horizontal_start: return "start-tangent-to-A";
    default: return "none";
  }
}

struct cut_time_report {
  std::optional<double> period;
  cut_condition condition = cut_condition::none;
  std::optional<double> bound;  // t_cut <= bound
  std::string reason;
};

/// Bound t_cut <= L for a normal extremal whose reduction is L-periodic, when span(X) is abelian or
/// P_{X_i}(lambda(0)) = 0 for every i.
inline cut_time_report cut_time_bound(const trajectory& full, const group_model& g, std::optional<double> L,
                                      double tol = 1e-9) {
  cut_time_report r;
  r.period = L;
  if (!L) {
    r.reason = "no period detected for the reduced trajectory";
    return r;
  }
  if (g.splitting.x_abelian) {
    r.condition = cut_condition::abelian_complement;
    r.bound = *L;
    r.reason = "span(X) is an abelian subalgebra";
    return r;
  }
  if (full.space.m != g.space().m || full.size() == 0) {
    r.reason = "a full trajectory is needed to evaluate P_X at the start";
    return r;
  }
  double worst = 0.0;
  for (auto i : g.split().x) {
    compiled_polynomial px(momentum_function(g, i));
    worst = std::max(worst, std::abs(px(full.states[0].data())));
  }
  if (worst <= tol) {
    r.condition = cut_condition::horizontal_start;
    r.bound = *L;
    r.reason = "P_X(lambda(0)) = 0 for every X in the complement";
  } else {
    r.reason = "span(X) is not abelian and max |P_X(lambda(0))| = " + std::to_string(worst);
  }
  return r;
}

namespace detail {
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

/// CSV with header t,p_x1..,p_t1..,x1..,t1..,H (17 significant digits).
inline void write_csv(std::ostream& os, const trajectory& tr) {
  os << "t";
  for (std::size_t v = 0; v < tr.space.size(); ++v) os << "," << tr.space.name(v);
  os << ",H\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    os << detail::format_double(tr.times[k]);
    for (double v : tr.states[k]) os << "," << detail::format_double(v);
    os << "," << detail::format_double(tr.energy[k]) << "\n";
  }
}

}  // namespace carnot

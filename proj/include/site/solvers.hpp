#pragma once

// Explicit finite-difference solvers on a periodic 1-D grid:
//   advection  u_t + a u_x = 0           forward-time backward-space
//   Burgers    u_t + (u^2/2)_x = 0       MacCormack predictor-corrector
//   KdV        u_t + 6 u u_x + u_xxx = 0 Zabusky-Kruskal leapfrog
// plus manufactured-solution forcing for convergence verification.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "site/error.hpp"
#include "site/grid.hpp"

namespace site {

namespace detail {

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

inline void require_finite(const Eigen::VectorXd& u, const char* who) {
  if (!u.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite input values");
}

}  // namespace detail

/// One FTBS step: u_i <- u_i - a*h*(u_i - u_{i-1}), periodic.
inline Eigen::VectorXd ftbs_step(const Eigen::VectorXd& u, double a, double h) {
  detail::require_finite(u, "ftbs_step");
  const int n = static_cast<int>(u.size());
  const double c = a * h;
  Eigen::VectorXd next(n);
  for (int i = 0; i < n; ++i) next[i] = u[i] - c * (u[i] - u[detail::wrap(i - 1, n)]);
  return next;
}

namespace detail {

// MacCormack with optional forcing: the predictor gets dt*S(t_n), the
// corrector dt/2*S(t_{n+1}), which keeps the scheme second order.
inline Eigen::VectorXd maccormack_forced(const Eigen::VectorXd& u, double h, double dt,
                                         const Eigen::VectorXd* src_now,
                                         const Eigen::VectorXd* src_next) {
  const int n = static_cast<int>(u.size());
  Eigen::VectorXd flux = 0.5 * u.array().square();
  Eigen::VectorXd pred(n);
  for (int i = 0; i < n; ++i) {
    pred[i] = u[i] - h * (flux[wrap(i + 1, n)] - flux[i]);
    if (src_now) pred[i] += dt * (*src_now)[i];
  }
  Eigen::VectorXd pflux = 0.5 * pred.array().square();
  Eigen::VectorXd next(n);
  for (int i = 0; i < n; ++i) {
    next[i] = u[i] - 0.5 * h * ((flux[wrap(i + 1, n)] - flux[i]) + (pflux[i] - pflux[wrap(i - 1, n)]));
    if (src_now) next[i] += 0.5 * dt * (*src_now)[i];
    if (src_next) next[i] += 0.5 * dt * (*src_next)[i];
  }
  return next;
}

// Right-hand side R(u) of the KdV semi-discretization scaled by dt:
// returns dt*R(u) = -h (u_{i+1}+u_i+u_{i-1})(u_{i+1}-u_{i-1})
//                   - h/(2 dx^2)(u_{i+2} - 2u_{i+1} + 2u_{i-1} - u_{i-2}).
inline Eigen::VectorXd kdv_increment(const Eigen::VectorXd& u, double h, double dx) {
  const int n = static_cast<int>(u.size());
  const double disp = h / (2.0 * dx * dx);
  Eigen::VectorXd inc(n);
  for (int i = 0; i < n; ++i) {
    const double um2 = u[wrap(i - 2, n)], um1 = u[wrap(i - 1, n)];
    const double up1 = u[wrap(i + 1, n)], up2 = u[wrap(i + 2, n)];
    inc[i] = -h * (up1 + u[i] + um1) * (up1 - um1) - disp * (up2 - 2.0 * up1 + 2.0 * um1 - um2);
  }
  return inc;
}

}  // namespace detail

/// One MacCormack predictor-corrector step for inviscid Burgers, periodic.
inline Eigen::VectorXd maccormack_step(const Eigen::VectorXd& u, double h) {
  detail::require_finite(u, "maccormack_step");
  return detail::maccormack_forced(u, h, 0.0, nullptr, nullptr);
}

/// Leapfrog Zabusky-Kruskal step u^{j+1} from u^{j-1} and u^j.
inline Eigen::VectorXd zabusky_kruskal_step(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& u_curr,
                                            double h, double dx) {
  detail::require_finite(u_prev, "zabusky_kruskal_step");
  detail::require_finite(u_curr, "zabusky_kruskal_step");
  if (u_prev.size() != u_curr.size()) throw InvalidArgument("zabusky_kruskal_step: level size mismatch");
  return u_prev + 2.0 * detail::kdv_increment(u_curr, h, dx);
}

/// Uncentered starter for the first Zabusky-Kruskal step (half-weighted update).
inline Eigen::VectorXd zabusky_kruskal_start(const Eigen::VectorXd& u0, double h, double dx) {
  detail::require_finite(u0, "zabusky_kruskal_start");
  return u0 + detail::kdv_increment(u0, h, dx);
}

/// max |u|
inline double max_abs(const Eigen::VectorXd& u) { return u.size() ? u.cwiseAbs().maxCoeff() : 0.0; }

/// Stability number of a scheme, normalized so that values <= 1 are stable.
/// FTBS: a*h. MacCormack: max|u|*h. Zabusky-Kruskal: h*|1/dx^2 - 2 max(u)| / (2/(3 sqrt 3)).
inline double stability_number(Scheme scheme, const Eigen::VectorXd& u, double h, double dx, double a = 1.0) {
  switch (scheme) {
    case Scheme::FTBS: return std::abs(a) * h;
    case Scheme::MacCormack: return max_abs(u) * h;
    case Scheme::ZabuskyKruskal: {
      const double umax = u.size() ? u.maxCoeff() : 0.0;
      return h * std::abs(-2.0 * umax + 1.0 / (dx * dx)) / (2.0 / (3.0 * std::sqrt(3.0)));
    }
  }
  return 0.0;
}

/// CFL number as used to pick the time step: a*dt/dx for advection,
/// max|u0|*dt/dx for Burgers and KdV.
inline double cfl_number(Scheme scheme, const Eigen::VectorXd& u0, double dt, double dx, double a = 1.0) {
  if (scheme == Scheme::FTBS) return std::abs(a) * dt / dx;
  return max_abs(u0) * dt / dx;
}

/// Inverse of cfl_number: the time step realizing a CFL target.
inline double time_step_for_cfl(Scheme scheme, const Eigen::VectorXd& u0, double cfl, double dx, double a = 1.0) {
  if (!(cfl > 0.0)) throw InvalidArgument("cfl must be positive");
  const double speed = scheme == Scheme::FTBS ? std::abs(a) : max_abs(u0);
  if (!(speed > 0.0)) throw InvalidArgument("cannot derive a time step from a zero characteristic speed");
  return cfl * dx / speed;
}

/// Exact solution and forcing such that exact_solution satisfies PDE + source.
struct ManufacturedCase {
  std::function<double(double, double)> exact_solution;
  std::function<double(double, double)> source_term;
};

/// Manufactured case built on u(x,t) = sin(2 pi (x+t)) + 0.001.
inline ManufacturedCase manufactured_case(Scheme scheme, double a = 1.0) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  auto exact = [](double x, double t) { return std::sin(two_pi * (x + t)) + 0.001; };
  switch (scheme) {
    case Scheme::FTBS:
      return {exact, [a](double x, double t) { return two_pi * std::cos(two_pi * (x + t)) * (1.0 + a); }};
    case Scheme::MacCormack:
      return {exact, [](double x, double t) {
                const double u = std::sin(two_pi * (x + t)) + 0.001;
                return two_pi * std::cos(two_pi * (x + t)) * (1.0 + u);
              }};
    case Scheme::ZabuskyKruskal:
      return {exact, [](double x, double t) {
                const double u = std::sin(two_pi * (x + t)) + 0.001;
                const double c = std::cos(two_pi * (x + t));
                return two_pi * c * (1.0 + 6.0 * u) - two_pi * two_pi * two_pi * c;
              }};
  }
  throw InvalidArgument("manufactured_case: unknown scheme");
}

struct SimulationOptions {
  double advection_speed = 1.0;
  std::optional<ManufacturedCase> mms;
  /// Called once if any step exceeds the scheme's stability limit.
  bool warn_on_instability = true;
};

namespace detail {

inline Eigen::VectorXd sample_source(const ManufacturedCase& mms, const Grid1D& g, double t) {
  Eigen::VectorXd s(g.nx);
  for (int i = 0; i < g.nx; ++i) s[i] = mms.source_term(g.x(i), t);
  return s;
}

}  // namespace detail

/// Advance `steps` steps from u0, calling `visit(level, u)` for every level
/// including the initial one. Returns true if a stability limit was exceeded.
template <class Visitor>
bool integrate(Scheme scheme, const Eigen::VectorXd& u0, const Grid1D& grid, int steps,
               const SimulationOptions& opt, Visitor&& visit) {
  if (u0.size() != grid.nx) throw InvalidArgument("initial condition length does not match nx");
  if (!u0.allFinite()) throw InvalidArgument("initial condition has non-finite values");
  const double h = grid.h();
  const double dt = grid.dt;
  const ManufacturedCase* mms = opt.mms ? &*opt.mms : nullptr;
  bool unstable = false;
  auto check = [&](const Eigen::VectorXd& u) {
    if (!unstable && stability_number(scheme, u, h, grid.dx, opt.advection_speed) > 1.0) {
      unstable = true;
      if (opt.warn_on_instability) {
        std::ostringstream os;
        os << to_string(scheme) << ": stability limit exceeded (number "
           << stability_number(scheme, u, h, grid.dx, opt.advection_speed) << ")";
        warn(os.str());
      }
    }
  };
  auto finite_or_throw = [](const Eigen::VectorXd& u, int level) {
    if (!u.allFinite()) throw BlowUp(level, "non-finite value in solution");
  };

  visit(0, u0);
  Eigen::VectorXd prev, curr = u0;
  for (int n = 0; n < steps; ++n) {
    check(curr);
    const double t = grid.t(n);
    Eigen::VectorXd next;
    switch (scheme) {
      case Scheme::FTBS:
        next = ftbs_step(curr, opt.advection_speed, h);
        if (mms) next += dt * detail::sample_source(*mms, grid, t);
        break;
      case Scheme::MacCormack:
        if (mms) {
          const Eigen::VectorXd s0 = detail::sample_source(*mms, grid, t);
          const Eigen::VectorXd s1 = detail::sample_source(*mms, grid, grid.t(n + 1));
          next = detail::maccormack_forced(curr, h, dt, &s0, &s1);
        } else {
          next = maccormack_step(curr, h);
        }
        break;
      case Scheme::ZabuskyKruskal:
        if (n == 0) {
          next = zabusky_kruskal_start(curr, h, grid.dx);
          if (mms) next += dt * detail::sample_source(*mms, grid, t);
        } else {
          next = zabusky_kruskal_step(prev, curr, h, grid.dx);
          if (mms) next += 2.0 * dt * detail::sample_source(*mms, grid, t);
        }
        break;
    }
    finite_or_throw(next, n + 1);
    visit(n + 1, next);
    prev = std::move(curr);
    curr = std::move(next);
  }
  return unstable;
}

/// Run a scheme for grid.nt - 1 steps and keep every level.
inline SolutionField run_simulation(Scheme scheme, const Eigen::VectorXd& u0, const Grid1D& grid,
                                    const SimulationOptions& opt = {}) {
  SolutionField field;
  field.grid = grid;
  field.scheme = scheme;
  field.values.resize(grid.nt, grid.nx);
  field.cfl = cfl_number(scheme, u0, grid.dt, grid.dx, opt.advection_speed);
  field.stability_warning = integrate(scheme, u0, grid, grid.nt - 1, opt, [&](int level, const Eigen::VectorXd& u) {
    field.values.row(level) = u.transpose();
  });
  return field;
}

struct ConvergenceRow {
  int nx = 0;
  int steps = 0;
  double dt = 0.0;
  double l2_error = 0.0;
  double linf_error = 0.0;
  /// Order against the previous resolution (L2 based); NaN for the first row.
  double order = std::numeric_limits<double>::quiet_NaN();
  bool ok = true;
  std::string failure;
};

/// Evaluation time used for MMS runs: 0.1 (FTBS, MacCormack), 1e-8 (Zabusky-Kruskal).
inline double default_mms_time(Scheme scheme) { return scheme == Scheme::ZabuskyKruskal ? 1e-8 : 0.1; }

/// Manufactured-solution refinement study at constant CFL.
inline std::vector<ConvergenceRow> mms_convergence(Scheme scheme, const std::vector<int>& resolutions, double cfl,
                                                   std::optional<double> t_test = std::nullopt) {
  if (resolutions.size() < 2) throw InvalidArgument("mms_convergence: need at least two resolutions");
  const double t_end = t_test.value_or(default_mms_time(scheme));
  const ManufacturedCase mms = manufactured_case(scheme);
  std::vector<ConvergenceRow> rows;
  for (int nx : resolutions) {
    ConvergenceRow row;
    row.nx = nx;
    try {
      if (nx <= 4) throw InvalidArgument("resolution too small");
      const Eigen::VectorXd x = sample_grid(nx);
      Eigen::VectorXd u0(nx);
      for (int i = 0; i < nx; ++i) u0[i] = mms.exact_solution(x[i], 0.0);
      const double dt_target = time_step_for_cfl(scheme, u0, cfl, 1.0 / nx);
      const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt_target - 1e-9)));
      const Grid1D grid = Grid1D::make(nx, steps + 1, t_end / steps);
      SimulationOptions opt;
      opt.mms = mms;
      Eigen::VectorXd last;
      integrate(scheme, u0, grid, steps, opt, [&](int level, const Eigen::VectorXd& u) {
        if (level == steps) last = u;
      });
      double sq = 0.0, mx = 0.0;
      for (int i = 0; i < nx; ++i) {
        const double e = last[i] - mms.exact_solution(x[i], t_end);
        sq += e * e;
        mx = std::max(mx, std::abs(e));
      }
      row.steps = steps;
      row.dt = grid.dt;
      row.l2_error = std::sqrt(sq / nx);
      row.linf_error = mx;
    } catch (const Error& e) {
      row.ok = false;
      row.failure = e.what();
    }
    if (!rows.empty() && row.ok && rows.back().ok && row.l2_error > 0.0) {
      row.order = std::log(rows.back().l2_error / row.l2_error) / std::log(static_cast<double>(nx) / rows.back().nx);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace site

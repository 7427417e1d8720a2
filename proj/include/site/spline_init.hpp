#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <vector>

#include "site/error.hpp"
#include "site/grid.hpp"
#include "site/library.hpp"
#include "site/precondition.hpp"
#include "site/pso.hpp"
#include "site/solvers.hpp"
#include "site/spline.hpp"

namespace site {

/// Everything needed to turn an initial condition into a library.
struct IcProblem {
  Scheme scheme = Scheme::FTBS;
  int nx = 300;
  int nt = 17;
  double cfl = 0.01;
  double advection_speed = 1.0;
  LibrarySpec library;
  VifOptions vif;
};

/// Forward solve from u0 at the problem's CFL number.
inline SolutionField simulate_from_ic(const IcProblem& p, const Eigen::VectorXd& u0, bool warn_on_instability = true) {
  const double dx = 1.0 / p.nx;
  const double dt = time_step_for_cfl(p.scheme, u0, p.cfl, dx, p.advection_speed);
  SimulationOptions opt;
  opt.advection_speed = p.advection_speed;
  opt.warn_on_instability = warn_on_instability;
  return run_simulation(p.scheme, u0, Grid1D::make(p.nx, p.nt, dt), opt);
}

/// RMS-VIF of the library generated from u0; +infinity for unstable or failed runs.
inline double ic_fitness(const IcProblem& p, const Eigen::VectorXd& u0) {
  try {
    const SolutionField field = simulate_from_ic(p, u0, false);
    if (field.stability_warning) return std::numeric_limits<double>::infinity();
    const CandidateLibrary lib = build_library(field, p.library);
    const double f = rms_vif(lib.theta, p.vif);
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct OptimizedIC {
  PeriodicSpline spline;
  Eigen::VectorXd u0;
  /// Best RMS-VIF after each swarm iteration.
  std::vector<double> trace;
  double fitness = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  int evaluations = 0;
};

inline PeriodicSpline make_spline(const Eigen::VectorXd& phi, int degree) {
  PeriodicSpline s;
  s.degree = degree;
  s.control = phi;
  s.validate();
  return s;
}

/// Particle-swarm search over the control values of a periodic spline IC,
/// minimizing the RMS-VIF of the resulting library.
inline OptimizedIC optimize_ic(const IcProblem& problem, int knots, int degree, const SwarmConfig& swarm) {
  if (knots < 1) throw InvalidArgument("optimize_ic: knots must be >= 1");
  const Eigen::VectorXd x = sample_grid(problem.nx);
  auto fitness = [&](const Eigen::VectorXd& phi) {
    return ic_fitness(problem, evaluate_spline(make_spline(phi, degree), x));
  };
  SwarmResult r;
  try {
    r = particle_swarm(knots, fitness, swarm);
  } catch (const Error& e) {
    throw Error(std::string("optimize_ic: ") + e.what() + " (every spline IC gave an unstable run or a degenerate library)");
  }
  OptimizedIC out;
  out.spline = make_spline(r.best_position, degree);
  out.u0 = evaluate_spline(out.spline, x);
  out.trace = std::move(r.trace);
  out.fitness = r.best_fitness;
  out.seed = swarm.seed;
  out.evaluations = r.evaluations;
  return out;
}

}  // namespace site

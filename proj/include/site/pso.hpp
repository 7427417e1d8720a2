#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "site/error.hpp"

namespace site {

/// Global-best particle swarm settings. The inertia/acceleration defaults are
/// the usual constriction-factor values.
struct SwarmConfig {
  int particles = 50;
  int iterations = 100;
  double inertia = 0.729;
  double cognitive = 1.49445;
  double social = 1.49445;
  std::uint64_t seed = 1;
  double lower = -1.0;
  double upper = 1.0;
  /// Velocity components are clamped to +-velocity_clamp*(upper-lower).
  double velocity_clamp = 0.5;
  /// Worker threads for fitness evaluation (results do not depend on it).
  int jobs = 1;

  void validate() const {
    if (particles < 1) throw InvalidArgument("swarm: particles must be >= 1");
    if (iterations < 1) throw InvalidArgument("swarm: iterations must be >= 1");
    if (!(upper > lower)) throw InvalidArgument("swarm: upper bound must exceed lower bound");
    if (!(velocity_clamp > 0.0)) throw InvalidArgument("swarm: velocity_clamp must be positive");
  }
};

struct SwarmResult {
  Eigen::VectorXd best_position;
  double best_fitness = std::numeric_limits<double>::infinity();
  /// Global-best fitness after each iteration (non-increasing).
  std::vector<double> trace;
  int evaluations = 0;
};

/// Run `fn(i)` for i in [0, n) on up to `jobs` threads.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Minimize `fitness` over the box [lower, upper]^dim. Random numbers are
/// drawn serially, fitness values are evaluated (possibly in parallel) into
/// fixed slots and reduced in index order, so the result depends only on the seed.
/// Non-finite fitness values and exceptions count as +infinity.
inline SwarmResult particle_swarm(int dim, const std::function<double(const Eigen::VectorXd&)>& fitness,
                                  const SwarmConfig& cfg) {
  cfg.validate();
  if (dim < 1) throw InvalidArgument("swarm: dimension must be >= 1");
  const double inf = std::numeric_limits<double>::infinity();
  const double range = cfg.upper - cfg.lower;
  const double vmax = cfg.velocity_clamp * range;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const int np = cfg.particles;
  std::vector<Eigen::VectorXd> pos(np, Eigen::VectorXd(dim)), vel(np, Eigen::VectorXd(dim));
  for (int i = 0; i < np; ++i) {
    for (int d = 0; d < dim; ++d) pos[i][d] = cfg.lower + range * unit(rng);
    for (int d = 0; d < dim; ++d) vel[i][d] = (2.0 * unit(rng) - 1.0) * 0.1 * range;
  }

  std::vector<double> fit(np, inf);
  auto evaluate_all = [&] {
    parallel_for(np, cfg.jobs, [&](int i) {
      double f = inf;
      try {
        f = fitness(pos[i]);
      } catch (const std::exception&) {
        f = inf;
      }
      fit[i] = std::isfinite(f) ? f : inf;
    });
  };

  SwarmResult res;
  std::vector<Eigen::VectorXd> pbest = pos;
  std::vector<double> pbest_fit(np, inf);
  Eigen::VectorXd gbest = pos[0];
  double gbest_fit = inf;

  for (int it = 0; it < cfg.iterations; ++it) {
    if (it > 0) {
      for (int i = 0; i < np; ++i) {
        for (int d = 0; d < dim; ++d) {
          const double r1 = unit(rng), r2 = unit(rng);
          double v = cfg.inertia * vel[i][d] + cfg.cognitive * r1 * (pbest[i][d] - pos[i][d]) +
                     cfg.social * r2 * (gbest[d] - pos[i][d]);
          v = std::clamp(v, -vmax, vmax);
          double x = pos[i][d] + v;
          if (x < cfg.lower || x > cfg.upper) {
            x = std::clamp(x, cfg.lower, cfg.upper);
            v = 0.0;
          }
          vel[i][d] = v;
          pos[i][d] = x;
        }
      }
    }
    evaluate_all();
    res.evaluations += np;
    for (int i = 0; i < np; ++i) {
      if (fit[i] < pbest_fit[i]) {
        pbest_fit[i] = fit[i];
        pbest[i] = pos[i];
      }
      if (fit[i] < gbest_fit) {
        gbest_fit = fit[i];
        gbest = pos[i];
      }
    }
    res.trace.push_back(gbest_fit);
  }
  if (!std::isfinite(gbest_fit)) throw Error("particle swarm: every candidate was infeasible (infinite fitness)");
  res.best_position = gbest;
  res.best_fitness = gbest_fit;
  return res;
}

}  // namespace site

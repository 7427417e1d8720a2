#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>

#include "site/pso.hpp"
#include "site/spline.hpp"
#include "site/spline_init.hpp"

namespace {

// Cardinal B-spline of degree p supported on [0, p+1].
double cardinal(int p, double t) {
  if (t < 0.0 || t >= p + 1) return 0.0;
  if (p == 0) return 1.0;
  return (t * cardinal(p - 1, t) + (p + 1 - t) * cardinal(p - 1, t - 1)) / p;
}

double spline_oracle(const Eigen::VectorXd& c, int p, double x) {
  const int k = static_cast<int>(c.size());
  const double t = x * k;
  double s = 0.0;
  for (int i = -2 * (p + 1); i <= k + p; ++i) {
    const int idx = ((i % k) + k) % k;
    s += c[idx] * cardinal(p, t - i);
  }
  return s;
}

double sphere(const Eigen::VectorXd& x) { return (x.array() - 0.3).square().sum(); }

}  // namespace

TEST(Spline, MatchesCardinalBasisSum) {
  Eigen::VectorXd c(7);
  c << 0.3, -0.2, 0.9, 0.1, -0.7, 0.4, 0.05;
  for (int p : {0, 1, 3, 8}) {
    const auto s = site::make_spline(c, p);
    for (double x = 0.0; x < 1.0; x += 0.013) EXPECT_NEAR(site::evaluate_spline(s, x), spline_oracle(c, p, x), 1e-13) << p;
  }
}

TEST(Spline, PartitionOfUnity) {
  const auto s = site::make_spline(Eigen::VectorXd::Constant(15, 2.5), 8);
  for (double x = 0.0; x < 1.0; x += 0.01) EXPECT_NEAR(site::evaluate_spline(s, x), 2.5, 1e-13);
}

TEST(Spline, PeriodicAndSmoothAcrossBoundary) {
  Eigen::VectorXd c(11);
  for (int i = 0; i < 11; ++i) c[i] = std::sin(1.0 + 3.7 * i);
  const auto s = site::make_spline(c, 8);
  EXPECT_NEAR(site::evaluate_spline(s, 0.0), site::evaluate_spline(s, 1.0), 1e-14);
  const double e = 1e-5;
  const double left = (site::evaluate_spline(s, 1.0 - e) - site::evaluate_spline(s, 1.0 - 2 * e)) / e;
  const double right = (site::evaluate_spline(s, e) - site::evaluate_spline(s, 0.0)) / e;
  EXPECT_NEAR(left, right, 1e-3 * std::max(1.0, std::abs(left)));
}

TEST(Spline, LocalSupport) {
  const int k = 15, p = 3;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
  c[5] = 1.0;
  const auto s = site::make_spline(c, p);
  for (double x = 0.0; x < 1.0; x += 0.005) {
    const double t = x * k;
    if (t < 5.0 || t > 5.0 + p + 1) EXPECT_NEAR(site::evaluate_spline(s, x), 0.0, 1e-15);
  }
  EXPECT_GT(site::evaluate_spline(s, (5.0 + 2.0) / k), 0.5);
}

TEST(Spline, RationalWeightsOfOneAreIgnored) {
  Eigen::VectorXd c(6);
  c << 1, 2, 3, 4, 5, 6;
  auto plain = site::make_spline(c, 4);
  auto rational = plain;
  rational.weights = Eigen::VectorXd::Ones(6);
  for (double x = 0.0; x < 1.0; x += 0.05) EXPECT_NEAR(site::evaluate_spline(plain, x), site::evaluate_spline(rational, x), 1e-13);
  rational.weights[2] = -1.0;
  EXPECT_THROW(rational.validate(), site::InvalidArgument);
}

TEST(Spline, GaussIsSymmetricAndPeaked) {
  const Eigen::VectorXd x = site::sample_grid(100);
  const Eigen::VectorXd u = site::gauss_ic(x);
  EXPECT_NEAR(u[50], 1.0 + 2 * std::exp(-50.0), 1e-15);
  for (int i = 1; i < 50; ++i) EXPECT_NEAR(u[50 - i], u[50 + i], 1e-14);
}

TEST(Swarm, FindsMinimumWithMonotoneTrace) {
  site::SwarmConfig cfg;
  cfg.particles = 20;
  cfg.iterations = 60;
  const auto r = site::particle_swarm(3, sphere, cfg);
  EXPECT_LT(r.best_fitness, 1e-6);
  EXPECT_EQ(static_cast<int>(r.trace.size()), cfg.iterations);
  for (size_t i = 1; i < r.trace.size(); ++i) EXPECT_LE(r.trace[i], r.trace[i - 1]);
  EXPECT_EQ(r.trace.back(), r.best_fitness);
  EXPECT_EQ(r.evaluations, cfg.particles * cfg.iterations);
  EXPECT_TRUE((r.best_position.array() >= cfg.lower).all() && (r.best_position.array() <= cfg.upper).all());
}

TEST(Swarm, DeterministicAndIndependentOfJobs) {
  site::SwarmConfig cfg;
  cfg.particles = 12;
  cfg.iterations = 15;
  cfg.seed = 42;
  const auto a = site::particle_swarm(4, sphere, cfg);
  const auto b = site::particle_swarm(4, sphere, cfg);
  cfg.jobs = 3;
  const auto c = site::particle_swarm(4, sphere, cfg);
  EXPECT_EQ(a.best_position, b.best_position);
  EXPECT_EQ(a.trace, b.trace);
  EXPECT_EQ(a.best_position, c.best_position);
  EXPECT_EQ(a.trace, c.trace);
  cfg.seed = 43;
  EXPECT_NE(site::particle_swarm(4, sphere, cfg).trace, a.trace);
}

TEST(Swarm, SingleParticleSingleIteration) {
  site::SwarmConfig cfg;
  cfg.particles = 1;
  cfg.iterations = 1;
  const auto r = site::particle_swarm(2, sphere, cfg);
  EXPECT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.evaluations, 1);
  EXPECT_DOUBLE_EQ(r.best_fitness, sphere(r.best_position));
}

TEST(Swarm, FailuresCountAsInfinity) {
  site::SwarmConfig cfg;
  cfg.particles = 10;
  cfg.iterations = 10;
  auto picky = [](const Eigen::VectorXd& x) -> double {
    if (x[0] < 0.0) throw std::runtime_error("bad");
    if (x[1] < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sphere(x);
  };
  const auto r = site::particle_swarm(2, picky, cfg);
  EXPECT_TRUE(std::isfinite(r.best_fitness));
  EXPECT_GE(r.best_position[0], 0.0);
  EXPECT_GE(r.best_position[1], 0.0);
  auto never = [](const Eigen::VectorXd&) { return std::numeric_limits<double>::infinity(); };
  EXPECT_THROW(site::particle_swarm(2, never, cfg), site::Error);
}

TEST(Swarm, ConfigValidation) {
  site::SwarmConfig cfg;
  cfg.particles = 0;
  EXPECT_THROW(cfg.validate(), site::InvalidArgument);
  cfg = {};
  cfg.upper = cfg.lower;
  EXPECT_THROW(cfg.validate(), site::InvalidArgument);
}

TEST(Swarm, ParallelForVisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(37);
  site::parallel_for(37, 4, [&](int i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(SplineInit, SmallOptimizationImprovesFitness) {
  site::IcProblem p;
  p.nx = 60;
  p.library.max_single_derivative_order = 3;
  p.library.max_u_power = 2;
  site::SwarmConfig cfg;
  cfg.particles = 6;
  cfg.iterations = 4;
  const auto ic = site::optimize_ic(p, 7, 4, cfg);
  EXPECT_EQ(ic.u0.size(), 60);
  EXPECT_EQ(ic.trace.size(), 4u);
  EXPECT_LE(ic.trace.back(), ic.trace.front());
  EXPECT_DOUBLE_EQ(ic.fitness, site::ic_fitness(p, ic.u0));
  EXPECT_EQ(ic.seed, 1u);
}

TEST(SplineInit, UnstableRunsAreInfinitelyBad) {
  site::IcProblem p;
  p.nx = 40;
  p.cfl = 1.5;
  p.library.max_single_derivative_order = 2;
  p.library.max_u_power = 1;
  EXPECT_TRUE(std::isinf(site::ic_fitness(p, site::gauss_ic(site::sample_grid(40)))));
}

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "site/error.hpp"

namespace site {

/// Uniform periodic (rational) B-spline on [0,1). Knots sit at i/K for
/// i in Z, so the K control values wrap around and the curve is
/// C^{degree-1} across x = 0 ~ 1.
struct PeriodicSpline {
  int degree = 8;
  /// Control values; their count equals the number of knots inside [0,1).
  Eigen::VectorXd control;
  /// Rational weights (empty: all ones, i.e. a plain B-spline).
  Eigen::VectorXd weights;

  int knots() const { return static_cast<int>(control.size()); }

  void validate() const {
    if (degree < 0) throw InvalidArgument("spline: degree must be non-negative");
    if (control.size() < 1) throw InvalidArgument("spline: need at least one control value");
    if (weights.size() != 0 && weights.size() != control.size())
      throw InvalidArgument("spline: weights must match control values");
    if (weights.size() && (weights.array() <= 0.0).any()) throw InvalidArgument("spline: weights must be positive");
  }
};

/// Evaluate by de Boor's algorithm on the wrapped control polygon.
inline double evaluate_spline(const PeriodicSpline& s, double x) {
  const int k = s.knots();
  const int p = s.degree;
  double t = (x - std::floor(x)) * k;
  int span = static_cast<int>(std::floor(t));
  if (span >= k) {
    span = k - 1;
  }
  const bool rational = s.weights.size() != 0;
  std::vector<double> num(p + 1), den(p + 1);
  for (int j = 0; j <= p; ++j) {
    int idx = (span - p + j) % k;
    if (idx < 0) idx += k;
    const double w = rational ? s.weights[idx] : 1.0;
    num[j] = w * s.control[idx];
    den[j] = w;
  }
  // Knot i sits at parameter i; the relevant knots are span-p+1 .. span+p.
  for (int r = 1; r <= p; ++r) {
    for (int j = p; j >= r; --j) {
      const double left = span - p + j;
      const double alpha = (t - left) / (p + 1 - r);
      num[j] = (1.0 - alpha) * num[j - 1] + alpha * num[j];
      if (rational) den[j] = (1.0 - alpha) * den[j - 1] + alpha * den[j];
    }
  }
  return rational ? num[p] / den[p] : num[p];
}

inline Eigen::VectorXd evaluate_spline(const PeriodicSpline& s, const Eigen::VectorXd& x) {
  s.validate();
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = evaluate_spline(s, x[i]);
  return out;
}

/// Periodized Gaussian bell: exp(-50(x-0.5)^2) + exp(-50(x+0.5)^2) + exp(-50(x-1.5)^2).
inline Eigen::VectorXd gauss_ic(const Eigen::VectorXd& x) {
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    u[i] = std::exp(-50.0 * (v - 0.5) * (v - 0.5)) + std::exp(-50.0 * (v + 0.5) * (v + 0.5)) +
           std::exp(-50.0 * (v - 1.5) * (v - 1.5));
  }
  return u;
}

}  // namespace site

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <utility>
#include <vector>

#include "site/error.hpp"
#include "site/grid.hpp"

namespace site {

/// Centered finite-difference stencil for d^d/dx^d with formal accuracy `accuracy`.
/// Coefficients are for unit spacing; divide by step^d when applying.
struct Stencil {
  int derivative_order = 0;
  int accuracy = 0;
  std::vector<int> offsets;
  std::vector<double> coefficients;

  int half_width() const { return offsets.empty() ? 0 : -offsets.front(); }
  int width() const { return static_cast<int>(offsets.size()); }
  /// Coefficient for offset j (0 outside the stencil).
  double at(int j) const {
    const int k = j + half_width();
    return (k < 0 || k >= width()) ? 0.0 : coefficients[k];
  }
};

/// Number of points of the centered stencil: 2*floor((d+1)/2) - 1 + a (one point for d = 0).
inline int centered_stencil_width(int d, int accuracy) {
  if (d == 0) return 1;
  return 2 * ((d + 1) / 2) - 1 + accuracy;
}

namespace detail {

// Fornberg's recursion for weights at z = 0 over integer nodes, evaluated in
// extended precision. Returns the weights for derivative order `d`.
inline std::vector<long double> fornberg_weights(const std::vector<int>& nodes, int d) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<long double>> c(n, std::vector<long double>(d + 1, 0.0L));
  long double c1 = 1.0L;
  long double c4 = nodes[0];
  c[0][0] = 1.0L;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, d);
    long double c2 = 1.0L;
    const long double c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      const long double c3 = static_cast<long double>(nodes[i]) - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<long double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][d];
  return w;
}

}  // namespace detail

/// Build the centered stencil of derivative order d and (even) accuracy a.
/// The weights satisfy the moment conditions sum_j c_j j^m = m! delta_{m,d}.
inline Stencil make_centered_stencil(int d, int accuracy) {
  if (d < 0) throw InvalidArgument("stencil: derivative order must be non-negative");
  if (accuracy <= 0 || accuracy % 2 != 0) throw InvalidArgument("stencil: accuracy must be a positive even integer");
  Stencil s;
  s.derivative_order = d;
  s.accuracy = accuracy;
  const int width = centered_stencil_width(d, accuracy);
  const int half = (width - 1) / 2;
  for (int j = -half; j <= half; ++j) s.offsets.push_back(j);
  const auto w = detail::fornberg_weights(s.offsets, d);
  s.coefficients.resize(width);
  // Enforce exact (anti)symmetry; the recursion is symmetric only up to rounding.
  const long double sign = (d % 2 == 0) ? 1.0L : -1.0L;
  for (int k = 0; k < width; ++k) {
    const long double sym = 0.5L * (w[k] + sign * w[width - 1 - k]);
    s.coefficients[k] = static_cast<double>(sym);
  }
  if (d % 2 == 1) s.coefficients[half] = 0.0;
  return s;
}

/// Cached stencil lookup, safe for concurrent callers.
inline const Stencil& centered_stencil(int d, int accuracy) {
  static std::map<std::pair<int, int>, Stencil> cache;
  static std::shared_mutex mutex;
  const auto key = std::make_pair(d, accuracy);
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  Stencil s = make_centered_stencil(d, accuracy);
  std::unique_lock lock(mutex);
  return cache.try_emplace(key, std::move(s)).first->second;
}

/// Derivative along x of every row of `values` (periodic in x).
inline Eigen::MatrixXd spatial_derivative(const Eigen::Ref<const Eigen::MatrixXd>& values, double dx, int d,
                                          int accuracy) {
  if (d == 0) return values;
  const Stencil& s = centered_stencil(d, accuracy);
  const int nx = static_cast<int>(values.cols());
  if (s.width() > nx) throw InvalidArgument("spatial derivative: stencil width exceeds nx");
  const int half = s.half_width();
  const bool odd = d % 2 == 1;
  const double scale = 1.0 / std::pow(dx, d);
  Eigen::MatrixXd out(values.rows(), nx);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (int i = 0; i < nx; ++i) {
      double acc = 0.0;
      for (int j = half; j >= 1; --j) {
        const double up = values(r, (i + j) % nx);
        const double dn = values(r, (i - j + nx) % nx);
        acc += s.at(j) * (odd ? (up - dn) : (up + dn));
      }
      if (!odd) acc += s.at(0) * values(r, i);
      out(r, i) = acc * scale;
    }
  }
  return out;
}

/// Spatial derivative of a solution field at every stored level.
inline Eigen::MatrixXd apply_spatial(const SolutionField& field, int d, int accuracy) {
  return spatial_derivative(field.values, field.grid.dx, d, accuracy);
}

/// Levels kept after dropping `pad_t` levels at both ends.
inline int retained_levels(int nt, int pad_t) { return nt - 2 * pad_t; }

/// Derivative along t on the interior levels [pad_t, nt - pad_t); never one-sided.
inline Eigen::MatrixXd temporal_derivative(const Eigen::Ref<const Eigen::MatrixXd>& values, double dt, int d,
                                           int accuracy, int pad_t) {
  const int nt = static_cast<int>(values.rows());
  const int kept = retained_levels(nt, pad_t);
  if (kept < 1) {
    throw InvalidArgument("temporal derivative: need at least " + std::to_string(2 * pad_t + 1) +
                          " levels for pad_t=" + std::to_string(pad_t) + ", have " + std::to_string(nt));
  }
  if (d == 0) return values.middleRows(pad_t, kept);
  const Stencil& s = centered_stencil(d, accuracy);
  if (s.half_width() > pad_t) {
    throw InvalidArgument("temporal derivative: pad_t=" + std::to_string(pad_t) + " below stencil half-width " +
                          std::to_string(s.half_width()));
  }
  const int half = s.half_width();
  const bool odd = d % 2 == 1;
  const double scale = 1.0 / std::pow(dt, d);
  Eigen::MatrixXd out(kept, values.cols());
  for (int k = 0; k < kept; ++k) {
    const int r = pad_t + k;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(values.cols());
    for (int j = half; j >= 1; --j) {
      if (odd)
        acc += s.at(j) * (values.row(r + j) - values.row(r - j));
      else
        acc += s.at(j) * (values.row(r + j) + values.row(r - j));
    }
    if (!odd) acc += s.at(0) * values.row(r);
    out.row(k) = acc * scale;
  }
  return out;
}

inline Eigen::MatrixXd apply_temporal(const SolutionField& field, int d, int accuracy, int pad_t) {
  return temporal_derivative(field.values, field.grid.dt, d, accuracy, pad_t);
}

}  // namespace site

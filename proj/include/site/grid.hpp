#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <string_view>

#include "site/error.hpp"

namespace site {

enum class Scheme { FTBS, MacCormack, ZabuskyKruskal };

inline std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::FTBS: return "ftbs";
    case Scheme::MacCormack: return "maccormack";
    case Scheme::ZabuskyKruskal: return "zabusky_kruskal";
  }
  return "unknown";
}

inline Scheme scheme_from_string(std::string_view name) {
  if (name == "ftbs" || name == "FTBS") return Scheme::FTBS;
  if (name == "maccormack" || name == "MacCormack") return Scheme::MacCormack;
  if (name == "zabusky_kruskal" || name == "ZabuskyKruskal" || name == "zk") return Scheme::ZabuskyKruskal;
  throw InvalidArgument("unknown scheme '" + std::string(name) + "'");
}

/// Uniform periodic grid on [0,1) with `nt` stored time levels.
struct Grid1D {
  int nx = 0;
  int nt = 0;
  double dx = 0.0;
  double dt = 0.0;

  static Grid1D make(int nx, int nt, double dt) {
    if (nx <= 0) throw InvalidArgument("grid: nx must be positive");
    if (nt <= 0) throw InvalidArgument("grid: nt must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("grid: dt must be positive and finite");
    return Grid1D{nx, nt, 1.0 / nx, dt};
  }

  double x(int i) const { return i * dx; }
  double t(int level) const { return level * dt; }
  /// Time-step to space-step ratio dt/dx.
  double h() const { return dt / dx; }
};

/// Solver output u(x,t): row j is time level j, column i is x_i = i*dx.
struct SolutionField {
  Grid1D grid;
  Eigen::MatrixXd values;
  Scheme scheme = Scheme::FTBS;
  double cfl = 0.0;
  bool stability_warning = false;
};

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

inline Eigen::VectorXd sample_grid(int nx) {
  Eigen::VectorXd x(nx);
  for (int i = 0; i < nx; ++i) x[i] = static_cast<double>(i) / nx;
  return x;
}

}  // namespace site

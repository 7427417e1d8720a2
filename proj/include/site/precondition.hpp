#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "site/error.hpp"
#include "site/library.hpp"

namespace site {

/// Singular values in descending order. Tall matrices are reduced by a
/// Householder QR first; the singular values of R equal those of the input.
inline Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() == 0 || m.cols() == 0) throw InvalidArgument("singular_values: empty matrix");
  if (m.rows() > 2 * m.cols()) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
    return Eigen::JacobiSVD<Eigen::MatrixXd>(r).singularValues();
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

/// sigma_max / sigma_min; +infinity when sigma_min is zero.
inline double condition_number(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::VectorXd s = singular_values(m);
  const double smin = s[s.size() - 1];
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / smin;
}

struct VifOptions {
  /// Upper bound reported when R^2 -> 1.
  double cap = 1e12;
  /// Include an intercept in the auxiliary regressions.
  bool with_intercept = true;
};

/// Variance inflation factors of the non-constant columns.
struct VifResult {
  std::vector<Eigen::Index> columns;
  std::vector<double> values;
};

/// VIF_i = 1/(1 - R_i^2), with R_i^2 from regressing column i on all other
/// columns. (The printed form "1 - 1/(1-R^2)" would make VIF negative and
/// decrease with collinearity, so the standard definition is used.)
///
/// All auxiliary regressions are evaluated at once: with Z the centered,
/// unit-norm columns and Z = Q R, R = U S V^T, one has
/// VIF_i = [(Z^T Z)^{-1}]_ii = sum_j V_ij^2 / s_j^2. Directions with s_j at
/// rounding level are exact collinearities; columns taking part in them are
/// reported at the cap.
inline VifResult compute_vif(const Eigen::Ref<const Eigen::MatrixXd>& theta, const VifOptions& opt = {}) {
  if (theta.cols() < 2) throw InvalidArgument("compute_vif: need at least two columns");
  VifResult out;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < theta.cols(); ++c) {
    const auto col = theta.col(c);
    if (col.maxCoeff() != col.minCoeff()) cols.push_back(c);
    else if (col.cwiseAbs().maxCoeff() == 0.0) throw InvalidArgument("compute_vif: zero column " + std::to_string(c));
  }
  const Eigen::Index m = static_cast<Eigen::Index>(cols.size());
  if (m == 0) return out;
  if (m == 1) {
    out.columns = cols;
    out.values = {1.0};
    return out;
  }
  Eigen::MatrixXd z(theta.rows(), m);
  for (Eigen::Index k = 0; k < m; ++k) {
    Eigen::VectorXd c = theta.col(cols[k]);
    if (opt.with_intercept) c.array() -= c.mean();
    const double nrm = c.norm();
    z.col(k) = nrm > 0.0 ? Eigen::VectorXd(c / nrm) : c;
  }
  Eigen::MatrixXd r;
  if (z.rows() > m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
    r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  } else {
    r = z;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  const double tiny = s[0] * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(z.rows(), m));
  for (Eigen::Index i = 0; i < m; ++i) {
    double vif = 0.0;
    bool collinear = false;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (s[j] <= tiny) {
        if (std::abs(v(i, j)) > 1e-6) collinear = true;
        continue;
      }
      vif += v(i, j) * v(i, j) / (s[j] * s[j]);
    }
    out.columns.push_back(cols[i]);
    out.values.push_back(collinear ? opt.cap : std::min(opt.cap, std::max(1.0, vif)));
  }
  return out;
}

/// sqrt(mean(VIF_i^2)) over the reported columns.
inline double rms_vif(const VifResult& vif) {
  if (vif.values.empty()) throw InvalidArgument("rms_vif: no columns");
  double s = 0.0;
  for (double v : vif.values) s += v * v;
  return std::sqrt(s / static_cast<double>(vif.values.size()));
}

inline double rms_vif(const Eigen::Ref<const Eigen::MatrixXd>& theta, const VifOptions& opt = {}) {
  return rms_vif(compute_vif(theta, opt));
}

/// Scaled (and optionally puffer-transformed) regression system.
struct PreconditionedSystem {
  Eigen::MatrixXd theta;
  Eigen::VectorXd target;
  /// Column norms S_kk of the raw library; physical xi = scaled xi / S_kk.
  Eigen::VectorXd scale;
  bool puffer_applied = false;
  const CandidateLibrary* source = nullptr;

  Eigen::VectorXd unscale(const Eigen::VectorXd& scaled) const { return scaled.cwiseQuotient(scale); }
};

/// Divide every column by its 2-norm so that diag(Theta^T Theta) = 1.
inline PreconditionedSystem scale_columns(const CandidateLibrary& lib) {
  PreconditionedSystem sys;
  sys.source = &lib;
  sys.scale.resize(lib.theta.cols());
  sys.theta.resize(lib.theta.rows(), lib.theta.cols());
  for (Eigen::Index c = 0; c < lib.theta.cols(); ++c) {
    const double nrm = lib.theta.col(c).norm();
    if (!(nrm > 0.0) || !std::isfinite(nrm)) {
      const std::string name = c < static_cast<Eigen::Index>(lib.terms.size()) ? describe_term(lib.terms[c]) : "#" + std::to_string(c);
      throw InvalidArgument("scale_columns: column '" + name + "' is identically zero or non-finite");
    }
    sys.scale[c] = nrm;
    sys.theta.col(c) = lib.theta.col(c) / nrm;
  }
  sys.target = lib.target;
  return sys;
}

struct PufferOptions {
  /// Singular values below rank_tolerance * sigma_max are treated as zero.
  double rank_tolerance = 1e-13;
};

/// Left-multiply by F = U D^{-1} U^T from the thin SVD Theta = U D V^T; the
/// transformed design equals U V^T and has orthonormal columns.
inline PreconditionedSystem puffer_transform(const PreconditionedSystem& in, const PufferOptions& opt = {}) {
  const Eigen::Index n = in.theta.rows(), p = in.theta.cols();
  if (n <= p) throw InvalidArgument("puffer_transform: need more samples than terms (n > p)");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(in.theta);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& d = svd.singularValues();
  const double cutoff = opt.rank_tolerance * d[0];
  if (d[p - 1] <= cutoff) {
    std::ostringstream os;
    os << "puffer_transform: design is rank deficient; singular values below " << cutoff << ":";
    for (Eigen::Index k = 0; k < p; ++k)
      if (d[k] <= cutoff) os << ' ' << d[k];
    throw RankDeficient(os.str());
  }
  const Eigen::MatrixXd u = q * svd.matrixU();
  PreconditionedSystem out = in;
  out.theta = u * svd.matrixV().transpose();
  out.target = u * (u.transpose() * in.target).cwiseQuotient(d);
  out.puffer_applied = true;
  return out;
}

}  // namespace site

#pragma once

// Piecewise-constant control parameterization on a uniform grid of
// subintervals: u(t) = u_(i) for t in (tau_{i-1}, tau_i], with the left
// horizon endpoint assigned to the first subinterval.

#include <Eigen/Core>

#include "nsoc/errors.hpp"

namespace nsoc {

struct ControlGrid {
  double t0 = 0.0;
  double tf = 1.0;
  Eigen::Index n_s = 1;
  Eigen::Index n_u = 1;
  Eigen::MatrixXd values;  // n_s x n_u, row i holds u_(i+1)

  // Reshape a decision vector p = (u_(1), ..., u_(n_s)) into a grid.
  static ControlGrid from_vector(const Eigen::VectorXd& p, Eigen::Index n_s,
                                 Eigen::Index n_u, double t0, double tf) {
    if (n_s < 1 || n_u < 1) throw RangeError("control grid: n_s and n_u must be >= 1");
    if (p.size() != n_s * n_u) {
      throw DimensionError("control grid: decision vector length " +
                           std::to_string(p.size()) + " != n_s*n_u");
    }
    if (tf < t0) throw RangeError("control grid: tf < t0");
    ControlGrid g;
    g.t0 = t0;
    g.tf = tf;
    g.n_s = n_s;
    g.n_u = n_u;
    g.values.resize(n_s, n_u);
    for (Eigen::Index i = 0; i < n_s; ++i) {
      g.values.row(i) = p.segment(i * n_u, n_u).transpose();
    }
    return g;
  }

  Eigen::VectorXd to_vector() const {
    Eigen::VectorXd p(n_s * n_u);
    for (Eigen::Index i = 0; i < n_s; ++i) {
      p.segment(i * n_u, n_u) = values.row(i).transpose();
    }
    return p;
  }

  double breakpoint(Eigen::Index i) const {
    return t0 + double(i) * (tf - t0) / double(n_s);
  }

  // 0-based index of the subinterval containing t (half-open convention).
  Eigen::Index interval_index(double t) const {
    if (t < t0 || t > tf) {
      throw RangeError("control grid: query time " + std::to_string(t) +
                       " outside horizon [" + std::to_string(t0) + ", " +
                       std::to_string(tf) + "]");
    }
    if (tf == t0) return 0;
    const double h = (tf - t0) / double(n_s);
    auto idx = Eigen::Index(std::ceil((t - t0) / h));
    if (idx < 1) idx = 1;
    if (idx > n_s) idx = n_s;
    return idx - 1;
  }

  Eigen::VectorXd at(double t) const {
    return values.row(interval_index(t)).transpose();
  }
};

}  // namespace nsoc

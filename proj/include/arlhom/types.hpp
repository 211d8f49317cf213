#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace arlhom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Tentative effective coefficient: a positive scalar or a full 2x2 tensor.
struct KBar {
  bool is_matrix = false;
  double s = 1.0;
  Mat2 m = Mat2::Identity();

  static KBar scalar(double v) {
    KBar k;
    k.is_matrix = false;
    k.s = v;
    return k;
  }
  static KBar matrix(const Mat2& t) {
    KBar k;
    k.is_matrix = true;
    k.m = t;
    return k;
  }
  Mat2 tensor() const { return is_matrix ? m : s * Mat2::Identity(); }

  /// Coefficients of the affine expansion of the coarse stiffness:
  /// one entry in scalar mode, (k11, k12, k21, k22) in matrix mode.
  Vec params() const {
    if (!is_matrix) {
      Vec p(1);
      p << s;
      return p;
    }
    Vec p(4);
    p << m(0, 0), m(0, 1), m(1, 0), m(1, 1);
    return p;
  }
  static KBar from_params(const Vec& p) {
    if (p.size() == 1) return scalar(p[0]);
    Mat2 t;
    t << p[0], p[1], p[2], p[3];
    return matrix(t);
  }
};

}  // namespace arlhom

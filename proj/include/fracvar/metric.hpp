#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "fracvar/quadrature.hpp"

namespace fracvar {

/// Gram matrix of the W^{s,2} inner product (plus an optional L^2 mass
/// term) on the interior hat functions, assembled on the same node set as
/// the functionals. Used to turn nodal gradients into Sobolev gradients.
class SobolevMetric {
 public:
  explicit SobolevMetric(const NonlocalQuadrature& quad, double mass = 0.0);

  const Eigen::MatrixXd& matrix() const { return a_; }
  int size() const { return static_cast<int>(a_.rows()); }

  /// M^{-1} g.
  Eigen::VectorXd solve(const Eigen::VectorXd& g) const;
  std::vector<double> solve(const std::vector<double>& g) const;
  /// x^T M y.
  double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

 private:
  Eigen::MatrixXd a_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

inline Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace fracvar

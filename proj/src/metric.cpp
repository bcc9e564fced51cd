#include "fracvar/metric.hpp"

#include <cmath>

#include "fracvar/errors.hpp"

namespace fracvar {

SobolevMetric::SobolevMetric(const NonlocalQuadrature& quad, double mass) {
  const Mesh1D& mesh = quad.mesh();
  const int n_nodes = mesh.n_nodes();
  const double order = quad.kernel().dim() + 2.0 * quad.kernel().s();
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n_nodes, n_nodes);

  // Each entry contributes w (e_i(x) - e_i(y)) (e_j(x) - e_j(y)); the four
  // basis functions touching x or y span that difference.
  for (const PairEntry& e : quad.entries()) {
    const double w = e.geo * std::pow(e.dist, -order);
    const int idx[4] = {e.ex, e.ex + 1, e.ey, e.ey + 1};
    const double val[4] = {1.0 - e.xi_x, e.xi_x, -(1.0 - e.xi_y), -e.xi_y};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) full(idx[a], idx[b]) += w * val[a] * val[b];
  }
  const auto vol = quad.volume();
  const auto ext = quad.exterior_metric();
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double w = vol[j].weight * (2.0 * ext[j] + mass);
    const int i0 = vol[j].elem;
    const double v0 = 1.0 - vol[j].xi, v1 = vol[j].xi;
    full(i0, i0) += w * v0 * v0;
    full(i0, i0 + 1) += w * v0 * v1;
    full(i0 + 1, i0) += w * v1 * v0;
    full(i0 + 1, i0 + 1) += w * v1 * v1;
  }
  const int n = mesh.n_dof();
  a_ = full.block(1, 1, n, n);
  a_ = 0.5 * (a_ + a_.transpose());
  llt_.compute(a_);
  if (llt_.info() != Eigen::Success) throw DomainError("Sobolev metric is not positive definite");
}

Eigen::VectorXd SobolevMetric::solve(const Eigen::VectorXd& g) const { return llt_.solve(g); }

std::vector<double> SobolevMetric::solve(const std::vector<double>& g) const {
  const Eigen::VectorXd x = llt_.solve(as_vector(g));
  return {x.data(), x.data() + x.size()};
}

double SobolevMetric::inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const { return x.dot(a_ * y); }

}  // namespace fracvar

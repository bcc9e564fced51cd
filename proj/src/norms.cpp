#include "fracvar/norms.hpp"

#include <cmath>

#include "fracvar/errors.hpp"

namespace fracvar {

namespace {

void check_mesh(const GridFunction& u, const NonlocalQuadrature& quad) {
  if (!u.mesh().same_nodes(quad.mesh()))
    throw ConfigurationError("grid function and quadrature use different meshes");
}

}  // namespace

double gagliardo_seminorm_pow(const GridFunction& u, const NonlocalQuadrature& quad, Weight mode,
                              std::optional<double> p) {
  check_mesh(u, quad);
  const double exponent = p.value_or(quad.kernel().p());
  if (!(exponent >= 1.0)) throw DomainError("seminorm exponent must be >= 1");
  const auto nodes = u.nodal_values();
  if (exponent == 2.0) return sum_pairs(quad, nodes, mode, [](double t) { return t * t; });
  return sum_pairs(quad, nodes, mode, [exponent](double t) { return std::pow(std::abs(t), exponent); });
}

double gagliardo_seminorm(const GridFunction& u, const NonlocalQuadrature& quad, Weight mode,
                          std::optional<double> p) {
  const double exponent = p.value_or(quad.kernel().p());
  return std::pow(gagliardo_seminorm_pow(u, quad, mode, exponent), 1.0 / exponent);
}

double w0_norm(const GridFunction& u, const NonlocalQuadrature& quad) {
  return gagliardo_seminorm(u, quad, Weight::reference);
}

double sobolev_norm(const GridFunction& u, const NonlocalQuadrature& quad) {
  const double p = quad.kernel().p();
  const double total = lq_norm_pow(u, p, quad.rule().gauss_order) + gagliardo_seminorm_pow(u, quad);
  return std::pow(total, 1.0 / p);
}

double exterior_tail_bound(const GridFunction& u, const NonlocalQuadrature& quad) {
  check_mesh(u, quad);
  const double p = quad.kernel().p();
  const auto vol = quad.volume();
  const auto tail = quad.tail_ref();
  double sum = 0.0;
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double uz = u.nodal(vol[j].elem) * (1.0 - vol[j].xi) + u.nodal(vol[j].elem + 1) * vol[j].xi;
    sum += vol[j].weight * tail[j] * std::pow(std::abs(uz), p);
  }
  return 2.0 * quad.kernel().lambda_cap() * sum;
}

std::vector<double> basis_norms(const NonlocalQuadrature& quad) {
  const Mesh1D& mesh = quad.mesh();
  const double p = quad.kernel().p();
  const int n_nodes = mesh.n_nodes();
  std::vector<double> acc(n_nodes, 0.0);
  auto pw = [p](double t) { return p == 2.0 ? t * t : std::pow(std::abs(t), p); };
  // A pair (x, y) touches at most the four nodes of its two elements.
  for (const PairEntry& e : quad.entries()) {
    const int nodes[4] = {e.ex, e.ex + 1, e.ey, e.ey + 1};
    for (int k = 0; k < 4; ++k) {
      const int i = nodes[k];
      if ((k == 2 || k == 3) && (i == e.ex || i == e.ex + 1)) continue;  // already counted
      auto hat = [&](int elem, double xi) {
        if (i == elem) return 1.0 - xi;
        if (i == elem + 1) return xi;
        return 0.0;
      };
      acc[i] += e.w_ref * pw(hat(e.ex, e.xi_x) - hat(e.ey, e.xi_y));
    }
  }
  const auto vol = quad.volume();
  const auto ref = quad.exterior_ref();
  for (std::size_t j = 0; j < vol.size(); ++j) {
    acc[vol[j].elem] += vol[j].weight * 2.0 * ref[j] * pw(1.0 - vol[j].xi);
    acc[vol[j].elem + 1] += vol[j].weight * 2.0 * ref[j] * pw(vol[j].xi);
  }
  std::vector<double> norms(mesh.n_dof());
  for (int i = 0; i < mesh.n_dof(); ++i) norms[i] = std::pow(acc[i + 1], 1.0 / p);
  return norms;
}

}  // namespace fracvar

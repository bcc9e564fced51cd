#pragma once

#include <optional>

#include "fracvar/mesh.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {

/// [u]^p: int int |u(x) - u(y)|^p w(x, y) over R x R with the zero
/// extension. `mode` selects w = |x-y|^{-(N+sp)} (reference) or K(x, y).
/// The exponent defaults to the kernel's p.
double gagliardo_seminorm_pow(const GridFunction& u, const NonlocalQuadrature& quad,
                              Weight mode = Weight::reference, std::optional<double> p = {});
double gagliardo_seminorm(const GridFunction& u, const NonlocalQuadrature& quad,
                          Weight mode = Weight::reference, std::optional<double> p = {});

/// The W_0^{s,p} norm used throughout: the reference seminorm [u]_{s,p}.
double w0_norm(const GridFunction& u, const NonlocalQuadrature& quad);

/// Full W^{s,p} norm (||u||_p^p + [u]^p)^{1/p} with the reference weight.
double sobolev_norm(const GridFunction& u, const NonlocalQuadrature& quad);

/// Upper bound on the contribution of |y| beyond the truncation radius
/// to [u]^p: 2 Lambda sum_z w_z |u(z)|^p int_{beyond R} |z - y|^{-(N+sp)} dy.
double exterior_tail_bound(const GridFunction& u, const NonlocalQuadrature& quad);

/// W_0 norms [e_i]_{s,p} of the interior hat functions.
std::vector<double> basis_norms(const NonlocalQuadrature& quad);

}  // namespace fracvar

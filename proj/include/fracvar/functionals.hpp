#pragma once

#include <memory>
#include <vector>

#include "fracvar/kernels.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/quadrature.hpp"

namespace fracvar {

/// Problem datum (Phi, K, lambda, q, f) on a mesh. Without a source the
/// model is P1 (-L_Phi u = lambda |u|^{q-2} u); with one it is P2.
///
/// Copies share the precomputed quadrature.
class EnergyModel {
 public:
  EnergyModel(const PhiSpec& phi, const KernelSpec& kernel, double lambda, double q, const Mesh1D& mesh,
              const QuadratureRule& rule = {}, Source source = {});

  const PhiSpec& phi() const { return phi_; }
  const KernelSpec& kernel() const { return kernel_; }
  double lambda() const { return lambda_; }
  double q() const { return q_; }
  double p() const { return phi_.p(); }
  double s() const { return kernel_.s(); }
  /// max of the Phi and K ellipticity constants.
  double lambda_cap() const;
  /// p*_s = Np / (N - sp), infinite when sp >= N.
  double critical_exponent() const;
  /// p' = p / (p - 1).
  double conjugate_exponent() const { return p() / (p() - 1.0); }

  bool has_source() const { return static_cast<bool>(source_); }
  const Source& source() const { return source_; }
  const Mesh1D& mesh() const { return shared_->quad.mesh(); }
  const QuadratureRule& rule() const { return shared_->quad.rule(); }
  const NonlocalQuadrature& quadrature() const { return shared_->quad; }
  /// W_0 norms of the interior hat functions.
  const std::vector<double>& basis_norms() const { return shared_->basis_norms; }
  /// f at the volume points (zeros without a source).
  const std::vector<double>& source_values() const { return source_values_; }

  EnergyModel with_lambda(double lambda) const;
  EnergyModel with_source(Source source) const;
  EnergyModel without_source() const { return with_source({}); }

 private:
  struct Shared {
    NonlocalQuadrature quad;
    std::vector<double> basis_norms;
  };
  void validate() const;
  void cache_source();

  PhiSpec phi_;
  KernelSpec kernel_;
  double lambda_;
  double q_;
  Source source_;
  std::shared_ptr<const Shared> shared_;
  std::vector<double> source_values_;
};

/// Pairings <I'(u), e_i> against the nodal basis.
struct WeakResidual {
  /// max_i |<I'(u), e_i>| / ||e_i||_{W_0}.
  double dual_norm_estimate = 0.0;
  /// <I'(u), e_i> / ||e_i||_{W_0}.
  std::vector<double> per_testfunction;
  /// Raw nodal gradient <I'(u), e_i> (interior nodes), for solvers.
  std::vector<double> gradient;
};

struct EnergyParts {
  double nonlocal = 0.0;   // int int P(u(x)-u(y)) K
  double power = 0.0;      // int |u|^q
  double source = 0.0;     // int f u
  double total = 0.0;      // nonlocal - lambda/q power - source
};

/// <-L_Phi u, v> = int int Phi(u(x)-u(y)) (v(x)-v(y)) K(x,y) dx dy.
double operator_pairing(const GridFunction& u, const GridFunction& v, const EnergyModel& m);
/// Nodal vector <-L_Phi u, e_i> over interior nodes.
std::vector<double> operator_gradient(const GridFunction& u, const EnergyModel& m);

double energy(const GridFunction& u, const EnergyModel& m);
EnergyParts energy_parts(const GridFunction& u, const EnergyModel& m);

/// <I'(u), e_i> = <-L_Phi u, e_i> - lambda int |u|^{q-2} u e_i - int f e_i.
WeakResidual gradient(const GridFunction& u, const EnergyModel& m);
/// P1 residual; the model must not carry a source.
WeakResidual residual_p1(const GridFunction& u, const EnergyModel& m);
/// P2 residual; the model must carry a source.
WeakResidual residual_p2(const GridFunction& u, const EnergyModel& m);

/// int |u|^{q-2} u e_i at the interior nodes.
std::vector<double> power_load(const GridFunction& u, const EnergyModel& m);
/// int f e_i at the interior nodes.
std::vector<double> source_load(const EnergyModel& m);
/// int f u.
double source_pairing(const GridFunction& u, const EnergyModel& m);
/// max_i |g_i| / ||e_i||_{W_0}.
double dual_norm(const std::vector<double>& nodal, const EnergyModel& m);
/// Builds a WeakResidual from a raw nodal vector.
WeakResidual make_residual(std::vector<double> nodal, const EnergyModel& m);

/// Quantities tied to the boundedness argument for Palais-Smale sequences.
struct PsDiagnostic {
  /// q I(u) - <I'(u), u> + (q-1) int f u.
  double qI_minus_pairing = 0.0;
  /// ((q - p Lambda^4) / (Lambda^2 p)) ||u||^p_{W_0} divided by the above.
  double bound_ratio = 0.0;
  /// Same with the numerator q - p Lambda^2.
  double bound_ratio_lambda2 = 0.0;
  /// <-L_Phi u, u> / ||u||^p_{W_0}: lies in [Lambda^-2, Lambda^2].
  double pairing_ratio = 0.0;
  double w0_norm = 0.0;
};

PsDiagnostic ps_diagnostic(const GridFunction& u, const EnergyModel& m);

}  // namespace fracvar

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/functionals.hpp"

namespace fracvar {

/// Finite union of closed intervals (points allowed) inside Omega.
class CompactSet1D {
 public:
  CompactSet1D() = default;
  /// Intervals are sorted; overlapping or touching pieces are an error.
  explicit CompactSet1D(std::vector<std::pair<double, double>> intervals);

  static CompactSet1D point(double x) { return CompactSet1D({{x, x}}); }
  static CompactSet1D interval(double lo, double hi) { return CompactSet1D({{lo, hi}}); }
  /// "empty", "{x}", "[lo:hi]", joined with '+'.
  static CompactSet1D parse(const std::string& text);

  const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  bool contains(double x, double slack = 0.0) const;
  /// Throws DomainError unless every piece lies in the open interval (a, b).
  void check_inside(const Mesh1D& mesh) const;
  /// Inverse of parse(); used as the CSV set_description.
  std::string description() const;

 private:
  std::vector<std::pair<double, double>> intervals_;
};

/// Atoms plus an optional nonnegative density.
struct DiscreteMeasure {
  std::vector<std::pair<double, double>> atoms;  // (location, mass)
  std::optional<GridFunction> density;

  void validate() const;
  /// mu(K).
  double measure_of(const CompactSet1D& k) const;
};

struct CapacityResult {
  explicit CapacityResult(GridFunction phi) : minimizer(std::move(phi)) {}

  /// min ||phi||^q_{W^{s,q}} over admissible mesh functions: an upper bound
  /// to the capacity, since the discrete admissible class is smaller.
  double upper_bound = 0.0;
  GridFunction minimizer;
  std::vector<int> constrained_nodes;
  std::vector<double> energy_trace;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

struct CapacityOptions {
  double tol = 1e-9;
  int max_iter = 500;
  QuadratureRule rule = {};
};

/// Nodes forced to 1: nodes in K and both nodes of every element whose
/// open interior meets K.
std::vector<int> constrained_nodes(const CompactSet1D& k, const Mesh1D& mesh);

/// Minimizes ||phi||_q^q + [phi]^q_{s,q} subject to 0 <= phi <= 1 and
/// phi = 1 on the constrained nodes. The kernel supplies s.
CapacityResult capacity_estimate(const CompactSet1D& k, const Mesh1D& mesh, const KernelSpec& kernel, double q,
                                 const CapacityOptions& options = {});

struct ProbeOptions {
  double C6 = 1.0;
  double C7 = 1.0;
  /// theta in [0, 1] samples of phi_theta = (1 - theta) phi_0 + theta phi*.
  int family_size = 11;
  CapacityOptions capacity = {};
};

struct ProbeReport {
  double measure_of_set = 0.0;
  double capacity_upper_bound = 0.0;
  /// Dual-norm surrogate of -L_Phi u.
  double operator_dual_norm = 0.0;
  /// ||u||_q^{q-1}.
  double u_q_power = 0.0;
  std::vector<double> theta;
  std::vector<double> phi_norm;  // ||phi_theta||_{W^{s,q}}
  std::vector<double> pairing;   // |<-L_Phi u, phi> + int |u|^{q-2} u phi|
  std::vector<double> bound;     // (C6 D + C7 ||u||_q^{q-1}) ||phi||
  double min_bound = 0.0;
  /// mu(K) <= min_bound.
  bool compatible = true;
};

/// Evaluates both sides of the capacity inequality along a family of
/// admissible phi approaching the capacity minimizer. Needs 2 < p < q.
ProbeReport necessary_condition_probe(const GridFunction& u, const EnergyModel& m, const DiscreteMeasure& mu,
                                      const CompactSet1D& k, const ProbeOptions& options = {});

}  // namespace fracvar

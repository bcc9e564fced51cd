#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace fracvar {

enum class PrimitiveMode { closed_form, numeric_quadrature };

/// The nonlinearity Phi with growth exponent p and ellipticity constant
/// Lambda:  Lambda^-1 |t|^p <= Phi(t) t <= Lambda |t|^p,  Phi(0) = 0.
///
/// Immutable after construction; safe to share across threads.
class PhiSpec {
 public:
  enum class Kind { power, perturbed, custom };

  /// Phi(t) = |t|^{p-2} t, Lambda = 1. Primitive in closed form.
  static PhiSpec power(double p);
  /// Phi(t) = |t|^{p-2} t (1.5 + 0.5 cos t) / 1.5, declared with Lambda = 2.
  /// Primitive by adaptive quadrature.
  static PhiSpec perturbed(double p);
  /// User-supplied Phi. Without a primitive, the primitive is integrated
  /// numerically.
  static PhiSpec custom(std::string name, double p, double lambda_cap,
                        std::function<double(double)> phi,
                        std::function<double(double)> primitive = {});

  double operator()(double t) const;
  /// P(t) = int_0^{|t|} Phi(tau) dtau.
  double primitive(double t) const;

  double p() const { return p_; }
  double lambda_cap() const { return lambda_cap_; }
  Kind kind() const { return kind_; }
  PrimitiveMode primitive_mode() const { return mode_; }
  const std::string& name() const { return name_; }

 private:
  PhiSpec(Kind kind, std::string name, double p, double lambda_cap, PrimitiveMode mode);

  Kind kind_;
  std::string name_;
  double p_;
  double lambda_cap_;
  PrimitiveMode mode_;
  std::function<double(double)> custom_phi_;
  std::function<double(double)> custom_primitive_;
};

/// Kernel K(x, y) of order s with
///   (Lambda |x-y|^{N+sp})^-1 <= K(x,y) <= Lambda |x-y|^{-(N+sp)}.
/// Only N = 1 is supported. K need not be symmetric; the energy form
/// symmetrizes it implicitly.
class KernelSpec {
 public:
  enum class Kind { standard, perturbed, custom };

  /// K = |x-y|^{-(N+sp)}, Lambda = 1.
  static KernelSpec standard(double s, double p);
  /// K = (1.5 + 0.5 sin(x+y)) |x-y|^{-(N+sp)}, Lambda = 2.
  static KernelSpec perturbed(double s, double p);
  static KernelSpec custom(std::string name, double s, double p, double lambda_cap,
                           std::function<double(double, double)> kernel);

  double operator()(double x, double y) const;
  /// K(x,y) |x-y|^{N+sp}: the bounded factor of the kernel.
  double normalized(double x, double y) const;

  double s() const { return s_; }
  double p() const { return p_; }
  double lambda_cap() const { return lambda_cap_; }
  int dim() const { return dim_; }
  /// N + s p.
  double order() const { return dim_ + s_ * p_; }
  Kind kind() const { return kind_; }
  bool is_standard() const { return kind_ == Kind::standard; }
  const std::string& name() const { return name_; }

 private:
  KernelSpec(Kind kind, std::string name, double s, double p, double lambda_cap);

  Kind kind_;
  std::string name_;
  double s_;
  double p_;
  double lambda_cap_;
  int dim_ = 1;
  std::function<double(double, double)> custom_;
};

/// Worst-case bound ratios over a sample set.
struct BoundReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double lower_bound = 0.0;  // Lambda^-1
  double upper_bound = 0.0;  // Lambda
  std::size_t samples = 0;
  bool violation = false;
  /// Largest |Phi(t + d) - Phi(t)| over the continuity grid (validate_phi only).
  double continuity_jump = 0.0;
  /// Sampled check of Phi(-t) = -Phi(t) (validate_phi only). The gradient
  /// equals the operator pairing only for odd Phi.
  bool odd = true;
};

double eval_phi(const PhiSpec& spec, double t);
double eval_primitive(const PhiSpec& spec, double t);

/// min/max of Phi(t) t / |t|^p over the nonzero samples.
BoundReport validate_phi(const PhiSpec& spec, const std::vector<double>& samples);
/// min/max of K(x,y) |x-y|^{N+sp}; coincident pairs are a DomainError.
BoundReport validate_kernel(const KernelSpec& spec,
                            const std::vector<std::pair<double, double>>& pairs);

/// 200 points: 100 log-spaced magnitudes in [1e-6, 1e6], both signs.
std::vector<double> default_phi_samples();
/// Random pairs (x != y) in [-2, 3]^2 with log-uniform separations.
std::vector<std::pair<double, double>> random_kernel_pairs(std::size_t count, std::uint64_t seed);

PhiSpec phi_by_name(const std::string& name, double p);
KernelSpec kernel_by_name(const std::string& name, double s, double p);

}  // namespace fracvar

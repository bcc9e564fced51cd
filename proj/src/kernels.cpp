#include "fracvar/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracvar/errors.hpp"
#include "fracvar/random.hpp"

namespace fracvar {

namespace {

double signed_power(double t, double p) {
  if (p == 2.0) return t;
  if (t == 0.0) return 0.0;
  return std::pow(std::abs(t), p - 2.0) * t;
}

void require_finite(double t, const char* what) {
  if (!std::isfinite(t)) throw DomainError(std::string(what) + ": argument must be finite");
}

}  // namespace

// ---------------------------------------------------------------- PhiSpec

PhiSpec::PhiSpec(Kind kind, std::string name, double p, double lambda_cap, PrimitiveMode mode)
    : kind_(kind), name_(std::move(name)), p_(p), lambda_cap_(lambda_cap), mode_(mode) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("Phi exponent p must satisfy p > 1");
  if (!(lambda_cap >= 1.0) || !std::isfinite(lambda_cap))
    throw DomainError("ellipticity constant Lambda must satisfy Lambda >= 1");
}

PhiSpec PhiSpec::power(double p) {
  return PhiSpec(Kind::power, "power", p, 1.0, PrimitiveMode::closed_form);
}

PhiSpec PhiSpec::perturbed(double p) {
  return PhiSpec(Kind::perturbed, "perturbed", p, 2.0, PrimitiveMode::numeric_quadrature);
}

PhiSpec PhiSpec::custom(std::string name, double p, double lambda_cap,
                        std::function<double(double)> phi,
                        std::function<double(double)> primitive) {
  const auto mode = primitive ? PrimitiveMode::closed_form : PrimitiveMode::numeric_quadrature;
  PhiSpec spec(Kind::custom, std::move(name), p, lambda_cap, mode);
  if (!phi) throw DomainError("custom Phi requires a callable");
  if (phi(0.0) != 0.0) throw DomainError("Phi(0) must be exactly 0");
  spec.custom_phi_ = std::move(phi);
  spec.custom_primitive_ = std::move(primitive);
  return spec;
}

double PhiSpec::operator()(double t) const {
  switch (kind_) {
    case Kind::power:
      return signed_power(t, p_);
    case Kind::perturbed:
      return signed_power(t, p_) * (1.5 + 0.5 * std::cos(t)) / 1.5;
    case Kind::custom:
      return custom_phi_(t);
  }
  return 0.0;
}

double PhiSpec::primitive(double t) const {
  const double r = std::abs(t);
  if (r == 0.0) return 0.0;
  if (kind_ == Kind::power) return p_ == 2.0 ? 0.5 * r * r : std::pow(r, p_) / p_;
  if (custom_primitive_) return custom_primitive_(t);
  // [0, min(r, 1)] under tau = r1 w^4, which flattens the |tau|^{p-1}
  // endpoint behaviour; a fixed rule keeps the primitive smooth in t.
  const double r1 = std::min(r, 1.0);
  auto head = [this, r1](double w) {
    const double w3 = w * w * w;
    return 4.0 * r1 * w3 * (*this)(r1 * w3 * w);
  };
  double total = boost::math::quadrature::gauss<double, 30>::integrate(head, 0.0, 1.0);
  if (r <= 1.0) return total;
  // Fixed panels of width <= 2 up to 64, adaptive only far out.
  auto body = [this](double tau) { return (*this)(tau); };
  const double mid = std::min(r, 64.0);
  const int panels = static_cast<int>(std::ceil((mid - 1.0) / 2.0));
  const double width = (mid - 1.0) / panels;
  for (int k = 0; k < panels; ++k)
    total += boost::math::quadrature::gauss<double, 30>::integrate(body, 1.0 + k * width, 1.0 + (k + 1) * width);
  if (r > mid) total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(body, mid, r, 20, 1e-10);
  return total;
}

// ------------------------------------------------------------- KernelSpec

KernelSpec::KernelSpec(Kind kind, std::string name, double s, double p, double lambda_cap)
    : kind_(kind), name_(std::move(name)), s_(s), p_(p), lambda_cap_(lambda_cap) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("kernel order s must lie in (0, 1)");
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("exponent p must satisfy p > 1");
  if (!(p > 2.0 - s / dim_))
    throw DomainError("exponent must satisfy p > 2 - s/N (got p = " + std::to_string(p) + ")");
  if (!(lambda_cap >= 1.0) || !std::isfinite(lambda_cap))
    throw DomainError("ellipticity constant Lambda must satisfy Lambda >= 1");
}

KernelSpec KernelSpec::standard(double s, double p) {
  return KernelSpec(Kind::standard, "standard", s, p, 1.0);
}

KernelSpec KernelSpec::perturbed(double s, double p) {
  return KernelSpec(Kind::perturbed, "perturbed", s, p, 2.0);
}

KernelSpec KernelSpec::custom(std::string name, double s, double p, double lambda_cap,
                              std::function<double(double, double)> kernel) {
  KernelSpec spec(Kind::custom, std::move(name), s, p, lambda_cap);
  if (!kernel) throw DomainError("custom kernel requires a callable");
  spec.custom_ = std::move(kernel);
  return spec;
}

double KernelSpec::normalized(double x, double y) const {
  switch (kind_) {
    case Kind::standard:
      return 1.0;
    case Kind::perturbed:
      return 1.5 + 0.5 * std::sin(x + y);
    case Kind::custom:
      return custom_(x, y) * std::pow(std::abs(x - y), order());
  }
  return 1.0;
}

double KernelSpec::operator()(double x, double y) const {
  const double r = std::abs(x - y);
  switch (kind_) {
    case Kind::standard:
      return std::pow(r, -order());
    case Kind::perturbed:
      return (1.5 + 0.5 * std::sin(x + y)) * std::pow(r, -order());
    case Kind::custom:
      return custom_(x, y);
  }
  return 0.0;
}

// ------------------------------------------------------------- operations

double eval_phi(const PhiSpec& spec, double t) {
  require_finite(t, "eval_phi");
  return spec(t);
}

double eval_primitive(const PhiSpec& spec, double t) {
  require_finite(t, "eval_primitive");
  return spec.primitive(t);
}

BoundReport validate_phi(const PhiSpec& spec, const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("validate_phi: sample list is empty");
  BoundReport report;
  report.lower_bound = 1.0 / spec.lambda_cap();
  report.upper_bound = spec.lambda_cap();
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = -std::numeric_limits<double>::infinity();
  for (double t : samples) {
    require_finite(t, "validate_phi");
    if (t == 0.0) continue;
    const double ratio = spec(t) * t / std::pow(std::abs(t), spec.p());
    report.min_ratio = std::min(report.min_ratio, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    ++report.samples;
    const double mirrored = spec(-t);
    if (std::abs(mirrored + spec(t)) > 1e-12 * (std::abs(spec(t)) + 1e-300)) report.odd = false;
  }
  if (report.samples == 0) throw std::invalid_argument("validate_phi: no nonzero samples");
  constexpr double slack = 1e-12;
  report.violation = report.min_ratio < report.lower_bound * (1.0 - slack) ||
                     report.max_ratio > report.upper_bound * (1.0 + slack);

  // modulus of continuity on [-10, 10]
  constexpr double step = 1e-7;
  for (int i = 0; i <= 2000; ++i) {
    const double t = -10.0 + 0.01 * i;
    report.continuity_jump = std::max(report.continuity_jump, std::abs(spec(t + step) - spec(t)));
  }
  if (spec(0.0) != 0.0 || report.continuity_jump > 1e-3) report.violation = true;
  return report;
}

BoundReport validate_kernel(const KernelSpec& spec,
                            const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw std::invalid_argument("validate_kernel: pair list is empty");
  BoundReport report;
  report.lower_bound = 1.0 / spec.lambda_cap();
  report.upper_bound = spec.lambda_cap();
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : pairs) {
    require_finite(x, "validate_kernel");
    require_finite(y, "validate_kernel");
    if (x == y) throw DomainError("validate_kernel: kernel is singular on the diagonal x = y");
    const double ratio = spec(x, y) * std::pow(std::abs(x - y), spec.order());
    report.min_ratio = std::min(report.min_ratio, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    ++report.samples;
  }
  constexpr double slack = 1e-12;
  report.violation = report.min_ratio < report.lower_bound * (1.0 - slack) ||
                     report.max_ratio > report.upper_bound * (1.0 + slack);
  return report;
}

std::vector<double> default_phi_samples() {
  std::vector<double> samples;
  samples.reserve(200);
  for (int i = 0; i < 100; ++i) {
    const double magnitude = std::pow(10.0, -6.0 + 12.0 * i / 99.0);
    samples.push_back(magnitude);
    samples.push_back(-magnitude);
  }
  return samples;
}

std::vector<std::pair<double, double>> random_kernel_pairs(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<double, double>> pairs;
  pairs.reserve(count);
  while (pairs.size() < count) {
    const double x = rng.uniform(-2.0, 3.0);
    const double gap = std::pow(10.0, rng.uniform(-6.0, 0.5));
    const double y = rng.uniform() < 0.5 ? x - gap : x + gap;
    if (x != y) pairs.emplace_back(x, y);
  }
  return pairs;
}

PhiSpec phi_by_name(const std::string& name, double p) {
  if (name == "power") return PhiSpec::power(p);
  if (name == "perturbed") return PhiSpec::perturbed(p);
  throw ConfigurationError("unknown Phi instance '" + name + "' (expected power|perturbed)");
}

KernelSpec kernel_by_name(const std::string& name, double s, double p) {
  if (name == "standard") return KernelSpec::standard(s, p);
  if (name == "perturbed") return KernelSpec::perturbed(s, p);
  throw ConfigurationError("unknown kernel instance '" + name + "' (expected standard|perturbed)");
}

}  // namespace fracvar

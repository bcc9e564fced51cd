#include "fracvar/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fracvar/errors.hpp"
#include "fracvar/norms.hpp"

namespace fracvar {

// ------------------------------------------------------------ EnergyModel

EnergyModel::EnergyModel(const PhiSpec& phi, const KernelSpec& kernel, double lambda, double q,
                         const Mesh1D& mesh, const QuadratureRule& rule, Source source)
    : phi_(phi), kernel_(kernel), lambda_(lambda), q_(q), source_(std::move(source)) {
  validate();
  NonlocalQuadrature quad(mesh, kernel_, rule);
  auto norms = fracvar::basis_norms(quad);
  shared_ = std::make_shared<const Shared>(Shared{std::move(quad), std::move(norms)});
  cache_source();
}

void EnergyModel::validate() const {
  if (phi_.p() != kernel_.p())
    throw DomainError("Phi and kernel must share the exponent p");
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) throw DomainError("lambda must satisfy lambda > 0");
  const double pstar = critical_exponent();
  if (!(q_ > p() && q_ < pstar))
    throw DomainError("q must satisfy q ∈ (p, p_s^*) (got q = " + format_number(q_) +
                      ", p = " + format_number(p()) + ")");
  if (!(q_ > 2.0)) throw DomainError("q must exceed 2 so that |u|^{q-2}u is continuous at 0");
}

void EnergyModel::cache_source() {
  const auto vol = shared_->quad.volume();
  source_values_.assign(vol.size(), 0.0);
  if (!source_) return;
  for (std::size_t j = 0; j < vol.size(); ++j) {
    source_values_[j] = source_(vol[j].x);
    if (!std::isfinite(source_values_[j])) throw DomainError("source must be finite on Omega");
  }
}

double EnergyModel::lambda_cap() const { return std::max(phi_.lambda_cap(), kernel_.lambda_cap()); }

double EnergyModel::critical_exponent() const {
  const double n = kernel_.dim();
  const double sp = kernel_.s() * p();
  if (sp >= n) return std::numeric_limits<double>::infinity();
  return n * p() / (n - sp);
}

EnergyModel EnergyModel::with_lambda(double lambda) const {
  EnergyModel copy = *this;
  copy.lambda_ = lambda;
  copy.validate();
  return copy;
}

EnergyModel EnergyModel::with_source(Source source) const {
  EnergyModel copy = *this;
  copy.source_ = std::move(source);
  copy.cache_source();
  return copy;
}

// ------------------------------------------------------------- functionals

namespace {

void check_mesh(const GridFunction& u, const EnergyModel& m) {
  if (!u.mesh().same_nodes(m.mesh())) throw ConfigurationError("grid function and model use different meshes");
}

// |t|^e sign(t), zero at t = 0.
double signed_pow(double t, double e) {
  if (e == 1.0) return t;
  if (e == 2.0) return std::abs(t) * t;
  return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), e), t);
}

std::vector<double> interior(const std::vector<double>& nodal) {
  return std::vector<double>(nodal.begin() + 1, nodal.end() - 1);
}

}  // namespace

double operator_pairing(const GridFunction& u, const GridFunction& v, const EnergyModel& m) {
  check_mesh(u, m);
  check_mesh(v, m);
  const PhiSpec& phi = m.phi();
  return sum_pair_products(m.quadrature(), u.nodal_values(), v.nodal_values(), Weight::kernel,
                           [&phi](double t) { return phi(t); });
}

std::vector<double> operator_gradient(const GridFunction& u, const EnergyModel& m) {
  check_mesh(u, m);
  const PhiSpec& phi = m.phi();
  return interior(pair_gradient(m.quadrature(), u.nodal_values(), Weight::kernel,
                                [&phi](double t) { return phi(t); }));
}

EnergyParts energy_parts(const GridFunction& u, const EnergyModel& m) {
  check_mesh(u, m);
  const PhiSpec& phi = m.phi();
  EnergyParts parts;
  parts.nonlocal = sum_pairs(m.quadrature(), u.nodal_values(), Weight::kernel,
                             [&phi](double t) { return phi.primitive(t); });
  const auto vol = m.quadrature().volume();
  const auto& f = m.source_values();
  const double q = m.q();
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double uz = u.nodal(vol[j].elem) * (1.0 - vol[j].xi) + u.nodal(vol[j].elem + 1) * vol[j].xi;
    parts.power += vol[j].weight * std::pow(std::abs(uz), q);
    parts.source += vol[j].weight * f[j] * uz;
  }
  parts.total = parts.nonlocal - m.lambda() / q * parts.power - parts.source;
  return parts;
}

double energy(const GridFunction& u, const EnergyModel& m) { return energy_parts(u, m).total; }

std::vector<double> power_load(const GridFunction& u, const EnergyModel& m) {
  check_mesh(u, m);
  std::vector<double> load(m.mesh().n_nodes(), 0.0);
  const double q = m.q();
  for (const auto& pt : m.quadrature().volume()) {
    const double uz = u.nodal(pt.elem) * (1.0 - pt.xi) + u.nodal(pt.elem + 1) * pt.xi;
    const double c = pt.weight * signed_pow(uz, q - 1.0);
    load[pt.elem] += c * (1.0 - pt.xi);
    load[pt.elem + 1] += c * pt.xi;
  }
  return interior(load);
}

std::vector<double> source_load(const EnergyModel& m) {
  std::vector<double> load(m.mesh().n_nodes(), 0.0);
  const auto vol = m.quadrature().volume();
  const auto& f = m.source_values();
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double c = vol[j].weight * f[j];
    load[vol[j].elem] += c * (1.0 - vol[j].xi);
    load[vol[j].elem + 1] += c * vol[j].xi;
  }
  return interior(load);
}

double source_pairing(const GridFunction& u, const EnergyModel& m) {
  check_mesh(u, m);
  const auto vol = m.quadrature().volume();
  const auto& f = m.source_values();
  double sum = 0.0;
  for (std::size_t j = 0; j < vol.size(); ++j)
    sum += vol[j].weight * f[j] * (u.nodal(vol[j].elem) * (1.0 - vol[j].xi) + u.nodal(vol[j].elem + 1) * vol[j].xi);
  return sum;
}

double dual_norm(const std::vector<double>& nodal, const EnergyModel& m) {
  const auto& norms = m.basis_norms();
  double worst = 0.0;
  for (std::size_t i = 0; i < nodal.size(); ++i) worst = std::max(worst, std::abs(nodal[i]) / norms[i]);
  return worst;
}

WeakResidual make_residual(std::vector<double> nodal, const EnergyModel& m) {
  WeakResidual r;
  const auto& norms = m.basis_norms();
  r.per_testfunction.resize(nodal.size());
  for (std::size_t i = 0; i < nodal.size(); ++i) {
    r.per_testfunction[i] = nodal[i] / norms[i];
    r.dual_norm_estimate = std::max(r.dual_norm_estimate, std::abs(r.per_testfunction[i]));
  }
  r.gradient = std::move(nodal);
  return r;
}

WeakResidual gradient(const GridFunction& u, const EnergyModel& m) {
  auto g = operator_gradient(u, m);
  const auto pl = power_load(u, m);
  const auto fl = source_load(m);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= m.lambda() * pl[i] + fl[i];
  return make_residual(std::move(g), m);
}

WeakResidual residual_p1(const GridFunction& u, const EnergyModel& m) {
  if (m.has_source()) throw ConfigurationError("residual_p1 requires a model without source (problem P1)");
  return gradient(u, m);
}

WeakResidual residual_p2(const GridFunction& u, const EnergyModel& m) {
  if (!m.has_source()) throw ConfigurationError("residual_p2 requires a model with a source (problem P2)");
  return gradient(u, m);
}

PsDiagnostic ps_diagnostic(const GridFunction& u, const EnergyModel& m) {
  PsDiagnostic d;
  const double q = m.q();
  const double p = m.p();
  const double L = m.lambda_cap();
  const auto parts = energy_parts(u, m);
  const auto g = gradient(u, m).gradient;
  double pairing = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) pairing += g[i] * u.values()[i];
  d.qI_minus_pairing = q * parts.total - pairing + (q - 1.0) * parts.source;
  d.w0_norm = w0_norm(u, m.quadrature());
  const double norm_p = std::pow(d.w0_norm, p);
  if (d.qI_minus_pairing != 0.0) {
    d.bound_ratio = (q - p * std::pow(L, 4)) / (L * L * p) * norm_p / d.qI_minus_pairing;
    d.bound_ratio_lambda2 = (q - p * L * L) / (L * L * p) * norm_p / d.qI_minus_pairing;
  }
  if (norm_p > 0.0) d.pairing_ratio = operator_pairing(u, u, m) / norm_p;
  return d;
}

}  // namespace fracvar

#include "fracvar/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fracvar/errors.hpp"
#include "fracvar/gauss.hpp"
#include "fracvar/metric.hpp"
#include "fracvar/norms.hpp"

namespace fracvar {

// ----------------------------------------------------------- CompactSet1D

CompactSet1D::CompactSet1D(std::vector<std::pair<double, double>> intervals) : intervals_(std::move(intervals)) {
  for (const auto& [lo, hi] : intervals_)
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo <= hi)) throw DomainError("compact set piece must have lo <= hi");
  std::sort(intervals_.begin(), intervals_.end());
  for (std::size_t i = 1; i < intervals_.size(); ++i)
    if (intervals_[i].first <= intervals_[i - 1].second)
      throw DomainError("compact set pieces must be pairwise disjoint");
}

CompactSet1D CompactSet1D::parse(const std::string& text) {
  std::vector<std::pair<double, double>> pieces;
  if (text.empty() || text == "empty") return CompactSet1D();
  std::stringstream ss(text);
  std::string piece;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigurationError("bad number '" + s + "' in set '" + text + "'");
    return v;
  };
  while (std::getline(ss, piece, '+')) {
    if (piece.size() >= 3 && piece.front() == '{' && piece.back() == '}') {
      const double x = number(piece.substr(1, piece.size() - 2));
      pieces.emplace_back(x, x);
    } else if (piece.size() >= 5 && piece.front() == '[' && piece.back() == ']') {
      const std::string body = piece.substr(1, piece.size() - 2);
      const auto colon = body.find(':');
      if (colon == std::string::npos) throw ConfigurationError("interval '" + piece + "' needs the form [lo:hi]");
      pieces.emplace_back(number(body.substr(0, colon)), number(body.substr(colon + 1)));
    } else {
      throw ConfigurationError("cannot parse set piece '" + piece + "' (expected {x} or [lo:hi])");
    }
  }
  try {
    return CompactSet1D(std::move(pieces));
  } catch (const DomainError& e) {
    throw ConfigurationError(e.what());
  }
}

bool CompactSet1D::contains(double x, double slack) const {
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](const auto& iv) { return x >= iv.first - slack && x <= iv.second + slack; });
}

void CompactSet1D::check_inside(const Mesh1D& mesh) const {
  for (const auto& [lo, hi] : intervals_)
    if (!(lo > mesh.a() && hi < mesh.b())) throw DomainError("compact set " + description() + " is not inside Omega");
}

std::string CompactSet1D::description() const {
  if (intervals_.empty()) return "empty";
  std::string out;
  for (const auto& [lo, hi] : intervals_) {
    if (!out.empty()) out += '+';
    out += lo == hi ? "{" + format_number(lo) + "}" : "[" + format_number(lo) + ":" + format_number(hi) + "]";
  }
  return out;
}

// --------------------------------------------------------- DiscreteMeasure

void DiscreteMeasure::validate() const {
  for (const auto& [x, w] : atoms)
    if (!(w >= 0.0) || !std::isfinite(x)) throw DomainError("measure atoms need finite locations and masses >= 0");
  if (density)
    for (double v : density->values())
      if (v < 0.0) throw DomainError("measure density must be nonnegative");
}

double DiscreteMeasure::measure_of(const CompactSet1D& k) const {
  double total = 0.0;
  for (const auto& [x, w] : atoms)
    if (k.contains(x)) total += w;
  if (density) {
    // The density is piecewise linear: two Gauss points per clipped element are exact.
    const Mesh1D& mesh = density->mesh();
    const GaussRule& g = gauss_legendre(2);
    for (const auto& [lo, hi] : k.intervals()) {
      for (int e = 0; e < mesh.n_elem(); ++e) {
        const double l = std::max(lo, mesh.node(e)), r = std::min(hi, mesh.node(e + 1));
        if (!(r > l)) continue;
        for (std::size_t j = 0; j < g.nodes.size(); ++j) total += (r - l) * g.weights[j] * (*density)(l + (r - l) * g.nodes[j]);
      }
    }
  }
  return total;
}

// ---------------------------------------------------------------- capacity

std::vector<int> constrained_nodes(const CompactSet1D& k, const Mesh1D& mesh) {
  const double slack = 1e-12 * mesh.length();
  std::vector<char> mark(mesh.n_nodes(), 0);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (k.contains(mesh.node(i), slack)) mark[i] = 1;
  for (int e = 0; e < mesh.n_elem(); ++e) {
    const double xl = mesh.node(e), xr = mesh.node(e + 1);
    for (const auto& [lo, hi] : k.intervals())
      if (lo < xr - slack && hi > xl + slack) mark[e] = mark[e + 1] = 1;
  }
  if (mark.front() || mark.back())
    throw DomainError("compact set " + k.description() + " touches a boundary element; refine the mesh");
  std::vector<int> out;
  for (int i = 1; i < mesh.n_nodes() - 1; ++i)
    if (mark[i]) out.push_back(i);
  return out;
}

namespace {

struct CapacityProblem {
  CapacityProblem(const Mesh1D& mesh, double s, double q, const QuadratureRule& rule)
      : quad(mesh, KernelSpec::standard(s, q), rule), q(q), order(quad.rule().gauss_order), norms(basis_norms(quad)) {}

  double value(const GridFunction& phi) const {
    return lq_norm_pow(phi, q, order) + gagliardo_seminorm_pow(phi, quad, Weight::reference, q);
  }

  std::vector<double> gradient(const GridFunction& phi) const {
    const double qq = q;
    auto dpow = [qq](double t) { return t == 0.0 ? 0.0 : qq * std::copysign(std::pow(std::abs(t), qq - 1.0), t); };
    std::vector<double> g = pair_gradient(quad, phi.nodal_values(), Weight::reference, dpow);
    for (const auto& pt : quad.volume()) {
      const double v = phi.nodal(pt.elem) * (1.0 - pt.xi) + phi.nodal(pt.elem + 1) * pt.xi;
      const double c = pt.weight * dpow(v);
      g[pt.elem] += c * (1.0 - pt.xi);
      g[pt.elem + 1] += c * pt.xi;
    }
    return std::vector<double>(g.begin() + 1, g.end() - 1);
  }

  NonlocalQuadrature quad;
  double q;
  int order;
  std::vector<double> norms;
};

double kkt_residual(const std::vector<double>& x, const std::vector<double>& g, const std::vector<char>& fixed,
                    const std::vector<double>& norms) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (fixed[i]) continue;
    double pg = g[i];
    if (x[i] <= 0.0) pg = std::min(pg, 0.0);
    if (x[i] >= 1.0) pg = std::max(pg, 0.0);
    worst = std::max(worst, std::abs(pg) / norms[i]);
  }
  return worst;
}

GridFunction initial_phi(const Mesh1D& mesh, const std::vector<int>& cons) {
  GridFunction phi(mesh);
  for (int i : cons) phi.values()[i - 1] = 1.0;
  return phi;
}

}  // namespace

CapacityResult capacity_estimate(const CompactSet1D& k, const Mesh1D& mesh, const KernelSpec& kernel, double q,
                                 const CapacityOptions& options) {
  if (!(q > 1.0)) throw DomainError("capacity needs q > 1");
  k.check_inside(mesh);
  const CapacityProblem prob(mesh, kernel.s(), q, options.rule);
  const SobolevMetric metric(prob.quad, 1.0);
  const Eigen::MatrixXd& M = metric.matrix();
  const int n = mesh.n_dof();

  CapacityResult res(initial_phi(mesh, constrained_nodes(k, mesh)));
  res.constrained_nodes = constrained_nodes(k, mesh);
  std::vector<char> fixed(n, 0);
  for (int i : res.constrained_nodes) fixed[i - 1] = 1;

  std::vector<double> x(res.minimizer.values().begin(), res.minimizer.values().end());
  auto as_function = [&](const std::vector<double>& v) { return GridFunction(mesh, v); };
  double e = prob.value(res.minimizer);
  std::vector<double> g = prob.gradient(res.minimizer);
  res.kkt_residual = kkt_residual(x, g, fixed, prob.norms);
  res.energy_trace.push_back(e);
  const double scale = 1.0 / (q * (q - 1.0));

  while (true) {
    if (res.kkt_residual <= options.tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= options.max_iter) break;

    // Near-active bounds (projected Newton): a band no wider than the
    // current projected-gradient step.
    double band = 0.0;
    for (int i = 0; i < n; ++i)
      if (!fixed[i]) band = std::max(band, std::abs(x[i] - std::clamp(x[i] - g[i] / M(i, i), 0.0, 1.0)));
    band = std::min(band, 0.1);
    std::vector<int> free_idx;
    std::vector<double> d(n, 0.0);
    for (int i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      const bool at_lo = x[i] <= band && g[i] > 0.0;
      const bool at_hi = x[i] >= 1.0 - band && g[i] < 0.0;
      if (at_lo || at_hi)
        d[i] = scale * g[i] / M(i, i);
      else
        free_idx.push_back(i);
    }
    if (!free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Eigen::MatrixXd mf(nf, nf);
      Eigen::VectorXd gf(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        gf(a) = g[free_idx[a]];
        for (Eigen::Index b = 0; b < nf; ++b) mf(a, b) = M(free_idx[a], free_idx[b]);
      }
      const Eigen::VectorXd df = mf.llt().solve(gf);
      for (Eigen::Index a = 0; a < nf; ++a) d[free_idx[a]] = scale * df(a);
    }

    double alpha = 1.0;
    bool accepted = false;
    for (int it = 0; it < 60 && !accepted; ++it, alpha *= 0.5) {
      std::vector<double> trial(x);
      double predicted = 0.0;
      for (int i = 0; i < n; ++i) {
        if (fixed[i]) continue;
        trial[i] = std::clamp(x[i] - alpha * d[i], 0.0, 1.0);
        predicted += g[i] * (x[i] - trial[i]);
      }
      const GridFunction phi = as_function(trial);
      const double et = prob.value(phi);
      const double noise = 256.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(e));
      if (predicted > noise) {
        accepted = et <= e - 1e-4 * predicted;
      } else {
        const auto gt = prob.gradient(phi);
        accepted = et <= e + noise && kkt_residual(trial, gt, fixed, prob.norms) < res.kkt_residual;
      }
      if (accepted) {
        x = std::move(trial);
        e = et;
      }
    }
    if (!accepted) break;
    res.minimizer = as_function(x);
    g = prob.gradient(res.minimizer);
    res.kkt_residual = kkt_residual(x, g, fixed, prob.norms);
    res.energy_trace.push_back(e);
    ++res.iterations;
  }
  res.upper_bound = e;
  return res;
}

// -------------------------------------------------------------------- probe

ProbeReport necessary_condition_probe(const GridFunction& u, const EnergyModel& m, const DiscreteMeasure& mu,
                                      const CompactSet1D& k, const ProbeOptions& options) {
  const double p = m.p(), q = m.q();
  if (!(2.0 < p && p < q)) throw PreconditionError("the capacity probe needs 2 < p < q");
  if (!u.mesh().same_nodes(m.mesh())) throw ConfigurationError("grid function and model use different meshes");
  mu.validate();
  const Mesh1D& mesh = m.mesh();
  const CapacityResult cap = capacity_estimate(k, mesh, m.kernel(), q, options.capacity);
  const CapacityProblem prob(mesh, m.s(), q, options.capacity.rule);

  ProbeReport r;
  r.measure_of_set = mu.measure_of(k);
  r.capacity_upper_bound = cap.upper_bound;
  const std::vector<double> op = operator_gradient(u, m);
  const std::vector<double> load = power_load(u, m);
  r.operator_dual_norm = dual_norm(op, m);
  r.u_q_power = std::pow(lq_norm(u, q, m.rule().gauss_order), q - 1.0);
  const double factor = options.C6 * r.operator_dual_norm + options.C7 * r.u_q_power;

  const GridFunction phi0 = initial_phi(mesh, cap.constrained_nodes);
  const int count = std::max(options.family_size, 2);
  r.min_bound = std::numeric_limits<double>::infinity();
  for (int j = 0; j < count; ++j) {
    const double theta = static_cast<double>(j) / (count - 1);
    const GridFunction phi = (1.0 - theta) * phi0 + theta * cap.minimizer;
    double pairing = 0.0;
    for (std::size_t i = 0; i < op.size(); ++i) pairing += (op[i] + load[i]) * phi.values()[i];
    const double norm = std::pow(prob.value(phi), 1.0 / q);
    r.theta.push_back(theta);
    r.phi_norm.push_back(norm);
    r.pairing.push_back(std::abs(pairing));
    r.bound.push_back(factor * norm);
    r.min_bound = std::min(r.min_bound, factor * norm);
  }
  r.compatible = r.measure_of_set <= r.min_bound * (1.0 + 1e-12);
  return r;
}

}  // namespace fracvar

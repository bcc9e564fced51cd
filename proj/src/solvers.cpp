#include "fracvar/solvers.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <chrono>
#include <cmath>
#include <numeric>

#include "fracvar/errors.hpp"
#include "fracvar/metric.hpp"
#include "fracvar/norms.hpp"
#include "fracvar/suite.hpp"

namespace fracvar {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void require(bool ok, const char* what) {
  if (!ok) throw DomainError(what);
}

void check_closed_form_domain(double p, double q, double Lambda) {
  require(p > 1.0 && q > p, "closed forms need 1 < p < q");
  require(Lambda >= 1.0, "closed forms need Lambda >= 1");
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GridFunction from_eigen(const Mesh1D& mesh, const Eigen::VectorXd& v) {
  return GridFunction(mesh, std::vector<double>(v.data(), v.data() + v.size()));
}

double dot(const std::vector<double>& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Line-search acceptance. Once the predicted decrease drops below the
// rounding level of the energy itself, the Armijo test is meaningless and
// the step is accepted on a decrease of the residual instead.
bool below_noise(double predicted, double energy_value) {
  return predicted <= 256.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(energy_value));
}

void record(SolveReport& rep, double e, double r, double nw, double nq) {
  rep.energy_trace.push_back(e);
  rep.residual_trace.push_back(r);
  rep.norm_w_trace.push_back(nw);
  rep.norm_q_trace.push_back(nq);
}

GridFunction sample_function(const Mesh1D& mesh, Rng& rng, int i) {
  return i % 2 == 0 ? random_smooth_function(mesh, rng) : random_nodal_function(mesh, rng);
}

}  // namespace

// ------------------------------------------------------------ closed forms

double lambda1_threshold(double p, double q, double Lambda, double C4, double C5, double f_norm) {
  check_closed_form_domain(p, q, Lambda);
  require(C4 > 0.0 && C5 > 0.0 && f_norm > 0.0, "lambda_1 needs C4, C5, |f| > 0");
  const double pre = q * (p - 1.0) / (Lambda * Lambda * C5 * p * (q - 1.0));
  const double inner = (q - p) / (p * (q - 1.0)) / (std::pow(C4, 1.0 / p) * f_norm);
  return pre * std::pow(inner, (q - p) / (p - 1.0));
}

double r0_maximizer(double p, double q, double Lambda, double lambda, double C5) {
  check_closed_form_domain(p, q, Lambda);
  require(lambda > 0.0 && C5 > 0.0, "r0 needs lambda, C5 > 0");
  return q * (p - 1.0) / (p * (q - 1.0)) / (Lambda * Lambda * lambda * C5);
}

double F_maximizer(double p, double q, double Lambda, double lambda, double C5) {
  return std::pow(r0_maximizer(p, q, Lambda, lambda, C5), 1.0 / (q - p));
}

double F_value(double r, double p, double q, double Lambda, double lambda, double C4, double C5, double f_norm) {
  return std::pow(r, p - 1.0) / (Lambda * Lambda * p) - lambda * C5 * std::pow(r, q - 1.0) / q -
         std::pow(C4, 1.0 / p) * f_norm;
}

bool F_peaks_at(double r, double p, double q, double Lambda, double lambda, double C4, double C5, double f_norm) {
  auto F = [&](double x) { return F_value(x, p, q, Lambda, lambda, C4, C5, f_norm); };
  return F(r) > std::max(F(0.99 * r), F(1.01 * r));
}

// --------------------------------------------------------------- estimates

EmbeddingConstants estimate_embedding_constants(const NonlocalQuadrature& quad, double p, double q, int samples,
                                                std::uint64_t seed) {
  const Mesh1D& mesh = quad.mesh();
  const int order = quad.rule().gauss_order;
  EmbeddingConstants c;
  auto visit = [&](const GridFunction& w) {
    const double n = w0_norm(w, quad);
    if (!(n > 0.0)) return;
    c.C4 = std::max(c.C4, lq_norm_pow(w, p, order) / std::pow(n, p));
    c.C5 = std::max(c.C5, lq_norm_pow(w, q, order) / std::pow(n, q));
    ++c.samples;
  };
  for (const auto& f : test_function_suite(mesh)) visit(f.u);
  Rng rng(seed);
  for (int i = 0; i < samples; ++i) visit(sample_function(mesh, rng, i));
  return c;
}

EmbeddingConstants estimate_embedding_constants(const Mesh1D& mesh, const KernelSpec& kernel, double p, double q,
                                                int samples, std::uint64_t seed, const QuadratureRule& rule) {
  const double pstar = kernel.s() * p >= kernel.dim() ? std::numeric_limits<double>::infinity()
                                                      : kernel.dim() * p / (kernel.dim() - kernel.s() * p);
  require(q > p && q < pstar, "embedding constants need q in (p, p_s^*)");
  const NonlocalQuadrature quad(mesh, KernelSpec::standard(kernel.s(), p), rule);
  return estimate_embedding_constants(quad, p, q, samples, seed);
}

RayleighEstimate rayleigh_inf_estimate(const Mesh1D& mesh, const KernelSpec& kernel, double p, double q,
                                       int samples, const SolverSettings& settings, const QuadratureRule& rule) {
  const EnergyModel m(PhiSpec::power(p), KernelSpec::standard(kernel.s(), p), 1.0, q, mesh, rule);
  SolveReport rep = sphere_constrained_solve(m, settings);
  const auto& quad = m.quadrature();
  const int order = m.rule().gauss_order;
  double best = w0_norm(rep.solution, quad) / lq_norm(rep.solution, q, order);
  Rng rng(settings.seed);
  for (int i = 0; i < samples; ++i) {
    const GridFunction u = sample_function(mesh, rng, i);
    const double nq = lq_norm(u, q, order);
    if (nq > 0.0) best = std::min(best, w0_norm(u, quad) / nq);
  }
  return {best, std::move(rep.solution), rep.converged};
}

// ------------------------------------------------------------------ sphere

namespace {

struct SphereState {
  double energy = 0.0;
  double residual = 0.0;
  double multiplier = 0.0;
  std::vector<double> r;
  Eigen::VectorXd d;  // M^{-1} r, tangent to the constraint
};

SphereState sphere_state(const GridFunction& u, const EnergyModel& m, const SobolevMetric& metric) {
  SphereState s;
  s.energy = energy(u, m);
  const auto g = gradient(u, m).gradient;
  const auto G = power_load(u, m);
  const Eigen::VectorXd a = metric.solve(to_eigen(g));
  const Eigen::VectorXd b = metric.solve(to_eigen(G));
  s.multiplier = to_eigen(G).dot(a) / to_eigen(G).dot(b);
  s.r.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) s.r[i] = g[i] - s.multiplier * G[i];
  s.d = a - s.multiplier * b;
  s.residual = dual_norm(s.r, m);
  return s;
}

}  // namespace

SolveReport sphere_constrained_solve(const EnergyModel& m, const SolverSettings& settings,
                                     const std::optional<GridFunction>& initial) {
  const auto t0 = Clock::now();
  const Mesh1D& mesh = m.mesh();
  const int order = m.rule().gauss_order;
  const double q = m.q();
  const SobolevMetric metric(m.quadrature());

  auto normalize = [&](GridFunction u) {
    const double n = lq_norm(u, q, order);
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("cannot normalize a zero function onto ||u||_q = 1");
    u *= 1.0 / n;
    return u;
  };

  std::optional<GridFunction> start;
  if (initial) {
    start = normalize(*initial);
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : test_function_suite(mesh)) {
      for (double sign : {1.0, -1.0}) {
        GridFunction u = normalize(sign * f.u);
        const double e = energy(u, m);
        if (e < best) best = e, start = std::move(u);
      }
    }
  }
  GridFunction u = std::move(*start);
  SolveReport rep(u);
  SphereState s = sphere_state(u, m, metric);
  record(rep, s.energy, s.residual, w0_norm(u, m.quadrature()), lq_norm(u, q, order));

  while (true) {
    if (s.residual <= settings.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= settings.max_iter) break;
    const double slope = as_vector(s.r).dot(s.d);
    double alpha = 1.0 / (1.0 + s.residual);
    std::optional<GridFunction> next;
    std::optional<SphereState> next_state;
    for (int k = 0; k < 60 && !next; ++k, alpha *= 0.5) {
      GridFunction trial = normalize(u - from_eigen(mesh, alpha * s.d));
      const double e = energy(trial, m);
      if (!below_noise(alpha * slope, s.energy)) {
        if (e <= s.energy - 1e-4 * alpha * slope) next = std::move(trial);
      } else {
        SphereState ts = sphere_state(trial, m, metric);
        if (ts.residual < s.residual) next = std::move(trial), next_state = std::move(ts);
      }
    }
    if (!next) {
      rep.warnings.push_back("line search stalled at residual " + format_number(s.residual));
      break;
    }
    u = std::move(*next);
    s = next_state ? std::move(*next_state) : sphere_state(u, m, metric);
    ++rep.iterations;
    record(rep, s.energy, s.residual, w0_norm(u, m.quadrature()), lq_norm(u, q, order));
  }
  rep.lambda_effective = m.lambda() + s.multiplier;
  rep.solution = std::move(u);
  rep.wallclock = seconds_since(t0);
  return rep;
}

// ----------------------------------------------------------- mountain pass

namespace {

void check_lambda_cap(const EnergyModel& m) {
  const double L = m.lambda_cap();
  const double hi = std::pow(m.q() / m.p(), 0.25);
  if (!(L >= 1.0 && L < hi))
    throw PreconditionError("Lambda = " + format_number(L) + " outside [1, (q/p)^{1/4}) = [1, " + format_number(hi) +
                            ")");
}

double source_dual_norm(const EnergyModel& m) {
  if (!m.has_source()) return 0.0;
  return source_norm(m.source(), m.mesh(), m.conjugate_exponent(), m.rule().gauss_order);
}

struct RayMax {
  double t;
  double J;
};

// Maximizer of t -> I(t v) on the discretized path 0 -> k v.
RayMax ray_max(const GridFunction& v, const EnergyModel& m, double t_hint, double k_min, int points) {
  auto phi = [&](double t) { return energy(t * v, m); };
  auto dphi = [&](double t) { return dot(gradient(t * v, m).gradient, v.values()); };
  double k = std::max(k_min, t_hint);
  for (int i = 0; phi(k) >= 0.0; ++i) {
    if (i > 200) throw DomainError("energy does not become negative along the ray");
    k *= 2.0;
  }
  const int n = std::max(points, 3);
  std::vector<double> t(n), val(n);
  int jmax = 0;
  for (int j = 0; j < n; ++j) {
    t[j] = k * j / (n - 1);
    val[j] = j == 0 ? 0.0 : phi(t[j]);
    if (val[j] > val[jmax]) jmax = j;
  }
  const double lo = t[std::max(jmax - 1, 0)];
  const double hi = t[std::min(jmax + 1, n - 1)];
  double ts = t[jmax];
  const double dlo = dphi(lo), dhi = dphi(hi);
  if (dlo > 0.0 && dhi < 0.0) {
    std::uintmax_t it = 100;
    const auto br = boost::math::tools::toms748_solve(dphi, lo, hi, dlo, dhi,
                                                      boost::math::tools::eps_tolerance<double>(50), it);
    ts = 0.5 * (br.first + br.second);
  } else {
    ts = boost::math::tools::brent_find_minima([&](double x) { return -phi(x); }, lo, hi, 40).first;
  }
  const double J = phi(ts);
  if (J < val[jmax]) return {t[jmax], val[jmax]};
  return {ts, J};
}

}  // namespace

MountainPassGeometry mountain_pass_geometry(const EnergyModel& m, const SolverSettings& settings) {
  check_lambda_cap(m);
  const double p = m.p(), q = m.q(), L = m.lambda_cap(), lambda = m.lambda();
  const auto& quad = m.quadrature();
  const Mesh1D& mesh = m.mesh();

  const EmbeddingConstants c = estimate_embedding_constants(quad, p, q, settings.embedding_samples, settings.seed);
  const double f_norm = source_dual_norm(m);
  const double lambda1 =
      f_norm > 0.0 ? lambda1_threshold(p, q, L, c.C4, c.C5, f_norm) : std::numeric_limits<double>::infinity();
  if (lambda >= 1.1 * lambda1)
    throw PreconditionError("lambda = " + format_number(lambda) + " is not below the estimated lambda_1 = " +
                            format_number(lambda1));

  SolverSettings rs = settings;
  rs.tol = std::max(settings.tol, 1e-8);
  GridFunction w = rayleigh_inf_estimate(mesh, m.kernel(), p, q, 0, rs, m.rule()).minimizer;
  if (m.has_source() && source_pairing(w, m) < 0.0) w *= -1.0;
  w *= 1.0 / w0_norm(w, quad);

  const double r0 = r0_maximizer(p, q, L, lambda, c.C5);
  const double rs0 = F_maximizer(p, q, L, lambda, c.C5);

  MountainPassGeometry g(w);
  g.C4 = c.C4;
  g.C5 = c.C5;
  g.f_norm = f_norm;
  g.lambda1 = lambda1;
  g.r0 = r0;
  g.r0_stationary = rs0;
  g.r0_is_maximizer = F_peaks_at(r0, p, q, L, lambda, c.C4, c.C5, f_norm);
  if (lambda >= 0.9 * lambda1) g.warnings.push_back("lambda is within 10% of the estimated lambda_1");
  if (!g.r0_is_maximizer)
    g.warnings.push_back("closed-form r0 is not a maximizer of F; the geometry uses the stationary point r0^{1/(q-p)}");

  const int np = std::max(settings.profile_points, 2);
  for (int i = 0; i < np; ++i) {
    const double r = rs0 * std::pow(10.0, -2.0 + 4.0 * i / (np - 1));
    g.profile_r.push_back(r);
    g.profile_F.push_back(F_value(r, p, q, L, lambda, c.C4, c.C5, f_norm));
  }

  double k = rs0;
  for (int i = 0; energy(k * w, m) >= 0.0; ++i) {
    if (i > 200) throw DomainError("could not find u1 with I(u1) < 0");
    k *= 2.0;
  }
  g.u1 = k * w;
  g.energy_u1 = energy(g.u1, m);

  Rng rng(settings.seed ^ 0x9e3779b97f4a7c15ULL);
  g.sphere_min_estimate = std::numeric_limits<double>::infinity();
  g.sphere_min_closed_form = std::numeric_limits<double>::infinity();
  for (int i = 0; i < settings.sphere_samples; ++i) {
    GridFunction v = sample_function(mesh, rng, i);
    const double n = w0_norm(v, quad);
    if (!(n > 0.0)) continue;
    g.sphere_min_estimate = std::min(g.sphere_min_estimate, energy((rs0 / n) * v, m));
    g.sphere_min_closed_form = std::min(g.sphere_min_closed_form, energy((r0 / n) * v, m));
  }
  if (!(g.sphere_min_estimate > std::max(0.0, g.energy_u1)))
    g.warnings.push_back("sampled sphere minimum does not exceed max(I(0), I(u1))");
  return g;
}

MountainPassResult mountain_pass_solve(const EnergyModel& m, const SolverSettings& settings) {
  const auto t0 = Clock::now();
  MountainPassGeometry geo = mountain_pass_geometry(m, settings);
  const Mesh1D& mesh = m.mesh();
  const auto& quad = m.quadrature();
  const int order = m.rule().gauss_order;
  const SobolevMetric metric(quad);
  const double k_min = geo.r0_stationary;
  const int points = settings.path_points;

  GridFunction v = (1.0 / w0_norm(geo.u1, quad)) * geo.u1;
  RayMax rm = ray_max(v, m, 0.0, k_min, points);

  struct State {
    std::vector<double> g;
    double residual;
  };
  auto state_at = [&](const GridFunction& dir, double t) {
    auto wr = gradient(t * dir, m);
    return State{std::move(wr.gradient), wr.dual_norm_estimate};
  };
  State s = state_at(v, rm.t);
  SolveReport rep(rm.t * v);
  auto push = [&] {
    const GridFunction u = rm.t * v;
    record(rep, rm.J, s.residual, w0_norm(u, quad), lq_norm(u, m.q(), order));
  };
  push();

  while (true) {
    if (s.residual <= settings.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= settings.max_iter) break;
    const Eigen::VectorXd vv = to_eigen(v.values());
    Eigen::VectorXd d = metric.solve(as_vector(s.g));
    d -= (metric.inner(vv, d) / metric.inner(vv, vv)) * vv;
    const double slope = as_vector(s.g).dot(d);
    double alpha = 1.0 / (1.0 + s.residual);
    bool accepted = false;
    for (int k = 0; k < 60 && !accepted; ++k, alpha *= 0.5) {
      GridFunction trial = v - from_eigen(mesh, (alpha / rm.t) * d);
      trial *= 1.0 / w0_norm(trial, quad);
      const RayMax rt = ray_max(trial, m, rm.t, k_min, points);
      bool ok;
      std::optional<State> st;
      if (!below_noise(alpha * slope, rm.J)) {
        ok = rt.J <= rm.J - 1e-4 * alpha * slope;
      } else {
        st = state_at(trial, rt.t);
        ok = rt.J <= rm.J + 256.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(rm.J)) &&
             st->residual < s.residual;
      }
      if (ok) {
        v = std::move(trial);
        rm = rt;
        s = st ? std::move(*st) : state_at(v, rm.t);
        accepted = true;
      }
    }
    if (!accepted) {
      rep.warnings.push_back("line search stalled at residual " + format_number(s.residual));
      break;
    }
    ++rep.iterations;
    push();
  }
  rep.solution = rm.t * v;
  rep.warnings.insert(rep.warnings.begin(), geo.warnings.begin(), geo.warnings.end());
  rep.wallclock = seconds_since(t0);
  return {std::move(rep), std::move(geo)};
}

// ---------------------------------------------------------------- homotopy

HomotopyReport homotopy_to_p1(const EnergyModel& m, int n_steps, const SolverSettings& settings, double stage_tol) {
  if (n_steps < 2) throw PreconditionError("homotopy needs n_steps >= 2");
  const auto t0 = Clock::now();
  const Mesh1D& mesh = m.mesh();
  const auto& quad = m.quadrature();
  const int order = m.rule().gauss_order;
  const double p = m.p();
  const double L = m.lambda_cap();

  const RayleighEstimate ray =
      rayleigh_inf_estimate(mesh, m.kernel(), p, m.q(), settings.sphere_samples, settings, m.rule());
  HomotopyReport h{SolveReport(GridFunction(mesh))};
  h.rayleigh_estimate = ray.value;
  SolveReport& out = h.report;
  if (m.lambda() > ray.value)
    out.warnings.push_back("lambda = " + format_number(m.lambda()) + " exceeds the Rayleigh estimate " +
                           format_number(ray.value));

  const Source f0 = m.source();
  SolverSettings stage = settings;
  stage.tol = stage_tol;
  std::optional<GridFunction> prev;
  EnergyModel last = m;
  bool all_converged = true;
  for (int n = 0; n <= n_steps; ++n) {
    const double scale = std::ldexp(1.0, -n);
    last = f0 ? m.with_source([f0, scale](double x) { return scale * f0(x); }) : m.without_source();
    SolveReport r = sphere_constrained_solve(last, stage, prev);
    const GridFunction& u = r.solution;
    const double nw = w0_norm(u, quad);
    h.source_scale.push_back(scale);
    h.stage_lambda.push_back(r.lambda_effective);
    h.stage_iterations.push_back(r.iterations);
    h.bound_chain_gap.push_back(std::pow(nw, p) / (L * L) - r.lambda_effective - source_pairing(u, last));
    if (prev) h.cauchy.push_back(w0_norm(u - *prev, quad));
    record(out, r.energy(), r.residual(), nw, lq_norm(u, m.q(), order));
    if (!r.converged) {
      all_converged = false;
      out.warnings.push_back("stage " + std::to_string(n) + " did not converge (residual " +
                             format_number(r.residual()) + ")");
    }
    for (auto& w : r.warnings) out.warnings.push_back("stage " + std::to_string(n) + ": " + w);
    prev = std::move(r.solution);
  }
  out.iterations = n_steps;
  out.solution = std::move(*prev);
  h.lambda_effective = h.stage_lambda.back();
  out.lambda_effective = h.lambda_effective;

  const EnergyModel p1_model = m.without_source();
  h.residual_p1_model = residual_p1(out.solution, p1_model).dual_norm_estimate;
  if (h.lambda_effective > 0.0) {
    h.residual_p1 = residual_p1(out.solution, p1_model.with_lambda(h.lambda_effective)).dual_norm_estimate;
    h.residual_p2_last = last.has_source()
                             ? residual_p2(out.solution, last.with_lambda(h.lambda_effective)).dual_norm_estimate
                             : h.residual_p1;
  } else {
    h.residual_p1 = std::numeric_limits<double>::infinity();
    h.residual_p2_last = std::numeric_limits<double>::infinity();
    out.warnings.push_back("constraint multiplier gives lambda <= 0; no P1 solution on the sphere");
  }
  out.converged = all_converged && h.residual_p1 <= settings.tol;
  out.wallclock = seconds_since(t0);
  return h;
}

}  // namespace fracvar

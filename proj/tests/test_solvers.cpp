#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fracvar/errors.hpp"
#include "fracvar/norms.hpp"
#include "fracvar/solvers.hpp"
#include "fracvar/suite.hpp"

using namespace fracvar;

namespace {

double sine_source(double x) { return 0.1 * std::sin(std::numbers::pi * x); }

EnergyModel model(int n, double s, double p, double q, double lambda, Source f = {}) {
  return EnergyModel(PhiSpec::power(p), KernelSpec::standard(s, p), lambda, q, Mesh1D(0, 1, n), {}, std::move(f));
}

bool non_increasing(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] + slack * (1.0 + std::abs(v[k - 1]))) return false;
  return true;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

TEST_CASE("lambda_1 closed form") {
  CHECK(std::abs(lambda1_threshold(2, 4, 1, 1, 1, 1) - 2.0 / 27.0) <= 1e-14);
  const double base = lambda1_threshold(2.5, 3.5, 1.0, 0.3, 0.2, 0.7);
  CHECK(lambda1_threshold(2.5, 3.5, 2.0, 0.3, 0.2, 0.7) == doctest::Approx(base / 4.0).epsilon(1e-14));
  double previous = INFINITY;
  for (double f : {0.1, 1.0, 10.0, 1e3, 1e6}) {
    const double v = lambda1_threshold(2, 4, 1, 1, 1, f);
    CHECK(v < previous);
    previous = v;
  }
  CHECK(previous < 1e-12);
  CHECK_THROWS_AS(lambda1_threshold(2, 2, 1, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(lambda1_threshold(2, 4, 0.5, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(lambda1_threshold(2, 4, 1, 0, 1, 1), DomainError);
  CHECK_THROWS_AS(lambda1_threshold(2, 4, 1, 1, 1, 0), DomainError);
}

TEST_CASE("r0 closed form and the stationary point of F") {
  CHECK(std::abs(r0_maximizer(2, 4, 1, 1, 1) - 2.0 / 3.0) <= 1e-14);
  CHECK(r0_maximizer(2.2, 3.7, 1.1, 2.0, 0.4) == doctest::Approx(0.5 * r0_maximizer(2.2, 3.7, 1.1, 1.0, 0.4)).epsilon(1e-14));
  CHECK_THROWS_AS(r0_maximizer(2, 4, 1, 0, 1), DomainError);
  // q - p = 1: both radii agree
  CHECK(F_maximizer(2, 3, 1, 0.7, 0.4) == doctest::Approx(r0_maximizer(2, 3, 1, 0.7, 0.4)).epsilon(1e-14));
  CHECK(F_maximizer(2, 4, 1, 1, 1) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));

  // the stationary point maximizes F on a grid over [r/10, 10 r] when lambda < lambda_1
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform(1.5, 3.0), q = p + rng.uniform(0.2, 2.0);
    const double L = i % 2 ? 1.0 : rng.uniform(1.0, 1.5), C4 = rng.uniform(0.01, 1.0), C5 = rng.uniform(0.01, 1.0);
    const double f = rng.uniform(0.01, 1.0);
    const double lambda = rng.uniform(0.05, 0.95) * lambda1_threshold(p, q, L, C4, C5, f);
    const double r = F_maximizer(p, q, L, lambda, C5);
    CHECK(F_peaks_at(r, p, q, L, lambda, C4, C5, f));
    const double top = F_value(r, p, q, L, lambda, C4, C5, f);
    // positivity below lambda_1 is only guaranteed for Lambda = 1
    if (L == 1.0) CHECK(top > 0.0);
    for (int k = 0; k <= 40; ++k) {
      const double rr = r * std::pow(10.0, -1.0 + k / 20.0);
      CHECK(F_value(rr, p, q, L, lambda, C4, C5, f) <= top + 1e-12 * std::abs(top));
    }
  }
  // for Lambda > 1 the threshold misses a factor Lambda^2 inside the bracket
  const double l1 = lambda1_threshold(2, 4, 1.1, 1, 1, 1);
  CHECK(F_value(F_maximizer(2, 4, 1.1, 0.99 * l1, 1), 2, 4, 1.1, 0.99 * l1, 1, 1, 1) < 0.0);
  CHECK(F_value(0.5, 2, 4, 1, 1, 1, 1, 1) == doctest::Approx(0.25 - 0.03125 - 1.0));
}

TEST_CASE("embedding constants") {
  const Mesh1D mesh(0, 1, 32);
  const KernelSpec kernel = KernelSpec::standard(0.5, 2.0);
  const NonlocalQuadrature quad(mesh, kernel);
  const EmbeddingConstants c500 = estimate_embedding_constants(quad, 2.0, 3.0, 500, 1);
  const EmbeddingConstants c1000 = estimate_embedding_constants(quad, 2.0, 3.0, 1000, 1);
  CHECK(c500.C4 > 0.0);
  CHECK(std::isfinite(c500.C5));
  CHECK(c500.samples > 500);  // suite members included
  CHECK(c1000.C4 >= c500.C4);
  CHECK(c1000.C5 >= c500.C5);
  CHECK(c1000.C4 <= 1.05 * c500.C4);
  CHECK(c1000.C5 <= 1.05 * c500.C5);
  for (const auto& f : test_function_suite(mesh)) {
    const GridFunction w = (1.0 / w0_norm(f.u, quad)) * f.u;
    CHECK(lq_norm_pow(w, 2.0) <= c500.C4 * (1.0 + 1e-12));
    CHECK(lq_norm_pow(w, 3.0) <= c500.C5 * (1.0 + 1e-12));
  }
  const EmbeddingConstants same = estimate_embedding_constants(mesh, kernel, 2.0, 3.0, 500, 1);
  CHECK(same.C4 == c500.C4);
  CHECK_THROWS_AS(estimate_embedding_constants(mesh, KernelSpec::standard(0.3, 2.0), 2.0, 6.0), DomainError);
}

TEST_CASE("mountain pass on the reference problem") {
  const EnergyModel probe = model(64, 0.5, 2.0, 4.0, 1.0, sine_source);
  const MountainPassGeometry g0 = mountain_pass_geometry(probe);
  REQUIRE(std::isfinite(g0.lambda1));
  const EnergyModel m = probe.with_lambda(0.5 * g0.lambda1);
  const MountainPassResult res = mountain_pass_solve(m);
  const SolveReport& rep = res.report;
  const MountainPassGeometry& g = res.geometry;

  CHECK(g.lambda1 == doctest::Approx(g0.lambda1).epsilon(1e-14));
  CHECK(g.lambda1 == doctest::Approx(lambda1_threshold(2, 4, 1, g.C4, g.C5, g.f_norm)).epsilon(1e-14));
  CHECK(g.r0 == doctest::Approx(r0_maximizer(2, 4, 1, m.lambda(), g.C5)).epsilon(1e-14));
  CHECK(g.r0_stationary == doctest::Approx(F_maximizer(2, 4, 1, m.lambda(), g.C5)).epsilon(1e-14));
  CHECK(F_value(g.r0_stationary, 2, 4, 1, m.lambda(), g.C4, g.C5, g.f_norm) > 0.0);
  CHECK(g.energy_u1 < 0.0);
  CHECK(g.energy_u1 == doctest::Approx(energy(g.u1, m)).epsilon(1e-14));
  CHECK(g.sphere_min_estimate > std::max(0.0, g.energy_u1));
  CHECK(g.profile_r.size() == 101);
  CHECK(g.profile_F.size() == g.profile_r.size());

  CHECK(rep.converged);
  CHECK(rep.residual() <= 1e-6);
  CHECK(rep.iterations <= 2000);
  CHECK(rep.energy_trace.size() == static_cast<std::size_t>(rep.iterations) + 1);
  CHECK(rep.residual_trace.size() == rep.energy_trace.size());
  CHECK(residual_p2(rep.solution, m).dual_norm_estimate == doctest::Approx(rep.residual()).epsilon(1e-12));
  CHECK(rep.energy() > 0.0);
  // u* maximizes I along its ray, which crosses the sphere of radius r0
  const double nu = w0_norm(rep.solution, m.quadrature());
  const double on_sphere = energy((g.r0_stationary / nu) * rep.solution, m);
  CHECK(rep.energy() >= on_sphere);
  CHECK(on_sphere > std::max(0.0, g.energy_u1));
  // random sampling only bounds the sphere infimum from above
  CHECK(g.sphere_min_estimate >= on_sphere);
  // the path maximum only decreases
  CHECK(non_increasing(rep.energy_trace, 1e-12));
  // bounded iterates
  const double med = median(rep.norm_w_trace);
  for (double n : rep.norm_w_trace) CHECK(n <= 10.0 * med);
}

TEST_CASE("mountain pass preconditions") {
  const EnergyModel probe = model(16, 0.5, 2.0, 4.0, 1.0, sine_source);
  SolverSettings quick;
  quick.embedding_samples = 50;
  quick.sphere_samples = 20;
  const double l1 = mountain_pass_geometry(probe, quick).lambda1;
  CHECK_THROWS_AS(mountain_pass_geometry(probe.with_lambda(1.2 * l1), quick), PreconditionError);
  CHECK_THROWS_AS(mountain_pass_solve(probe.with_lambda(2.0 * l1), quick), PreconditionError);
  const MountainPassGeometry near = mountain_pass_geometry(probe.with_lambda(0.95 * l1), quick);
  CHECK_FALSE(near.warnings.empty());
  // Lambda = 2 is outside [1, 2^{1/4})
  const EnergyModel wide(PhiSpec::power(2.0), KernelSpec::perturbed(0.5, 2.0), 1.0, 4.0, Mesh1D(0, 1, 16), {},
                         sine_source);
  CHECK_THROWS_AS(mountain_pass_geometry(wide, quick), PreconditionError);
  // without a source lambda_1 is unbounded
  CHECK(mountain_pass_geometry(probe.without_source(), quick).lambda1 == INFINITY);
}

TEST_CASE("sphere-constrained minimization") {
  const EnergyModel m = model(32, 0.6, 2.0, 2.5, 1.0);
  const SolveReport rep = sphere_constrained_solve(m);
  CHECK(rep.converged);
  CHECK(rep.residual() <= 1e-6);
  for (double nq : rep.norm_q_trace) CHECK(std::abs(nq - 1.0) <= 1e-10);
  CHECK(std::abs(lq_norm(rep.solution, 2.5) - 1.0) <= 1e-10);
  CHECK(non_increasing(rep.energy_trace, 1e-12));
  for (const auto& f : test_function_suite(m.mesh())) {
    const GridFunction w = (1.0 / lq_norm(f.u, 2.5)) * f.u;
    CHECK(rep.energy() <= energy(w, m) + 1e-12);
  }
  // the solution is a free critical point at the effective lambda
  CHECK(residual_p1(rep.solution, m.with_lambda(rep.lambda_effective)).dual_norm_estimate <= 1e-5);

  const EnergyModel p2 = model(32, 0.5, 2.0, 3.0, 1.0, sine_source);
  const SolveReport r2 = sphere_constrained_solve(p2);
  CHECK(r2.converged);
  CHECK(std::abs(lq_norm(r2.solution, 3.0) - 1.0) <= 1e-10);
  const SolveReport warm = sphere_constrained_solve(p2, {}, r2.solution);
  CHECK(warm.iterations <= 1);
}

TEST_CASE("Rayleigh quotient estimate") {
  SolverSettings settings;
  settings.sphere_samples = 50;
  const KernelSpec kernel = KernelSpec::standard(0.5, 2.0);
  const RayleighEstimate r64 = rayleigh_inf_estimate(Mesh1D(0, 1, 64), kernel, 2.0, 3.0, 50, settings);
  const RayleighEstimate r128 = rayleigh_inf_estimate(Mesh1D(0, 1, 128), kernel, 2.0, 3.0, 50, settings);
  CHECK(r64.converged);
  CHECK(std::abs(r64.value - r128.value) <= 0.02 * r128.value);
  CHECK(std::abs(lq_norm(r64.minimizer, 3.0) - 1.0) <= 1e-10);

  const Mesh1D mesh(0, 1, 64);
  const NonlocalQuadrature quad(mesh, kernel);
  const auto ratio = [&](const GridFunction& u) { return w0_norm(u, quad) / lq_norm(u, 3.0); };
  CHECK(ratio(r64.minimizer) == doctest::Approx(r64.value).epsilon(1e-12));
  CHECK(ratio(-3.0 * r64.minimizer) == doctest::Approx(r64.value).epsilon(1e-12));
  Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const GridFunction u = i % 2 ? random_nodal_function(mesh, rng) : random_smooth_function(mesh, rng);
    CHECK(r64.value <= ratio(u));
    CHECK(ratio(2.5 * u) == doctest::Approx(ratio(u)).epsilon(1e-12));
  }
}

TEST_CASE("homotopy to the problem without source") {
  SolverSettings settings;
  settings.sphere_samples = 50;
  const Mesh1D mesh(0, 1, 64);
  const double rq = rayleigh_inf_estimate(mesh, KernelSpec::standard(0.5, 2.0), 2.0, 3.0, 50, settings).value;
  const EnergyModel m = model(64, 0.5, 2.0, 3.0, 0.5 * rq, sine_source);
  const HomotopyReport h = homotopy_to_p1(m, 12, settings);
  REQUIRE(h.cauchy.size() == 12);
  CHECK(h.source_scale.size() == 13);
  CHECK(h.source_scale.back() == std::ldexp(1.0, -12));
  for (std::size_t n = 3; n + 1 < h.cauchy.size(); ++n) CHECK(h.cauchy[n + 1] < h.cauchy[n]);
  CHECK(h.residual_p1 <= 1e-5);
  CHECK(std::abs(lq_norm(h.report.solution, 3.0) - 1.0) <= 1e-10);
  CHECK(h.rayleigh_estimate == doctest::Approx(rq).epsilon(0.02));
  CHECK(h.lambda_effective > 0.0);
  for (double gap : h.bound_chain_gap) CHECK(gap <= 1e-10);
  // the last stage solution is almost critical for the tiny remaining source
  const double fmax = 0.1 * std::ldexp(1.0, -12);
  double bound = 0.0;
  for (double n : m.basis_norms()) bound = std::max(bound, 1.0 / n);
  CHECK(h.residual_p2_last <= 1e-5 + fmax * bound);

  CHECK_THROWS_AS(homotopy_to_p1(m, 1, settings), PreconditionError);

  // no source: every stage solves the same problem
  const HomotopyReport flat = homotopy_to_p1(m.without_source(), 3, settings);
  for (double c : flat.cauchy) CHECK(c <= 1e-6);

  // lambda above the Rayleigh estimate is flagged
  const HomotopyReport high = homotopy_to_p1(m.with_lambda(2.0 * rq), 2, settings);
  const bool flagged = std::any_of(high.report.warnings.begin(), high.report.warnings.end(),
                                   [](const std::string& w) { return w.find("Rayleigh") != std::string::npos; });
  CHECK(flagged);
}

#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>

#include "fracvar/errors.hpp"
#include "fracvar/metric.hpp"
#include "fracvar/norms.hpp"
#include "fracvar/suite.hpp"
#include "oracles.hpp"

using namespace fracvar;

namespace {

GridFunction hat(const Mesh1D& mesh) {
  return GridFunction::interpolate(mesh, [&](double x) {
    const double t = (x - mesh.a()) / mesh.length();
    return 1.0 - std::abs(2.0 * t - 1.0);
  });
}

// Seminorm^p of the tent function 1 - |2x - 1| on (0, 1) over R x R,
// evaluated independently with 30-digit adaptive quadrature.
struct TentValue {
  double s, p, value;
};
constexpr TentValue kTent[] = {
    {0.5, 2.0, 5.5451774444795624753},  // = 8 ln 2
    {0.3, 2.5, 3.7033368114636325943},
    {0.75, 3.0, 11.244590291105005964},
};

}  // namespace

TEST_CASE("mesh geometry") {
  const Mesh1D m(-1.0, 2.0, 6);
  CHECK(m.h() == doctest::Approx(0.5));
  CHECK(m.n_nodes() == 7);
  CHECK(m.n_dof() == 5);
  CHECK(m.node(0) == -1.0);
  CHECK(m.node(6) == doctest::Approx(2.0));
  CHECK(m.tail_radius() == doctest::Approx(30.0));
  CHECK(Mesh1D(0, 1, 4, 2.5).tail_radius() == 2.5);
  CHECK_THROWS(Mesh1D(1.0, 1.0, 4));
  CHECK_THROWS(Mesh1D(0.0, 1.0, 1));
}

TEST_CASE("grid functions vanish on the boundary and outside") {
  const Mesh1D m(0, 1, 4);
  GridFunction u = hat(m);
  CHECK(u.values().size() == 3);
  CHECK(u.nodal(0) == 0.0);
  CHECK(u.nodal(4) == 0.0);
  CHECK(u(0.5) == 1.0);
  CHECK(u(0.375) == doctest::Approx(0.75));
  CHECK(u(-0.1) == 0.0);
  CHECK(u(1.3) == 0.0);
  const GridFunction v = 2.0 * u - u;
  CHECK(v(0.25) == doctest::Approx(0.5));
  GridFunction other(Mesh1D(0, 1, 8));
  CHECK_THROWS_AS(u += other, ConfigurationError);
  CHECK_THROWS(GridFunction(m, {1.0, std::nan(""), 0.0}));
  CHECK_THROWS(GridFunction(m, {1.0}));
}

TEST_CASE("L^q norms and duality pairing") {
  const Mesh1D m2(0, 1, 2);
  const GridFunction h2 = hat(m2);
  CHECK(lq_norm(GridFunction(m2), 2.0) == 0.0);
  CHECK(lq_norm(h2, 1.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lq_norm(h2, 2.0) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
  CHECK(duality_pairing([](double) { return 0.0; }, h2) == 0.0);
  CHECK(duality_pairing([](double) { return 1.0; }, h2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(duality_pairing(h2, h2) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(duality_pairing(h2, hat(Mesh1D(0, 1, 4))), ConfigurationError);
  // refined quadrature agrees with the closed form
  CHECK(lq_norm(hat(Mesh1D(0, 1, 64)), 3.0, 5) == doctest::Approx(std::pow(0.25, 1.0 / 3.0)).epsilon(1e-13));
}

TEST_CASE("CSV round trip") {
  const Mesh1D m(0.5, 2.0, 5);
  Rng rng(3);
  const GridFunction u = random_smooth_function(m, rng);
  std::stringstream ss;
  write_csv(ss, u);
  const std::string text = ss.str();
  CHECK(text.rfind("# schema=1\n# mesh a=0.5 b=2 n=5\nx,value\n", 0) == 0);
  const GridFunction back = read_csv(ss);
  REQUIRE(back.mesh().same_nodes(m));
  for (std::size_t i = 0; i < u.values().size(); ++i) CHECK(back.values()[i] == u.values()[i]);
  std::stringstream bad("# schema=1\nx,value\n0,0\n");
  CHECK_THROWS(read_csv(bad));
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1e-300) == "1e-300");
}

TEST_CASE("quadrature node set matches the independent regeneration") {
  Rng rng(11);
  for (int n : {4, 5, 8}) {
    for (int order : {2, 3}) {
      for (auto sp : {std::pair{0.5, 2.0}, std::pair{0.3, 2.5}, std::pair{0.8, 1.5}}) {
        const Mesh1D mesh(0, 1, n);
        QuadratureRule rule;
        rule.gauss_order = order;
        rule.diagonal_refinement = 4;
        const NonlocalQuadrature quad(mesh, KernelSpec::standard(sp.first, sp.second), rule);
        CHECK(quad.entries().size() == oracle::interior_nodes(mesh, order, 4).size());
        const GridFunction u = random_nodal_function(mesh, rng);
        const double lib = gagliardo_seminorm_pow(u, quad);
        const double ref = oracle::seminorm_pow(u, sp.first, sp.second, order, 4);
        CHECK(oracle::rel_err(lib, ref) <= 1e-12);
      }
    }
  }
}

TEST_CASE("seminorm converges to the continuum value of the tent function") {
  for (const auto& t : kTent) {
    double previous = INFINITY;
    for (int n : {8, 32, 128}) {
      const Mesh1D mesh(0, 1, n);
      const NonlocalQuadrature quad(mesh, KernelSpec::standard(t.s, t.p));
      const double err = std::abs(gagliardo_seminorm_pow(hat(mesh), quad) - t.value) / t.value;
      CHECK(err < previous);
      previous = err;
    }
    CHECK(previous < (t.s * t.p > 1.0 ? 1e-4 : 1e-6));
  }
}

TEST_CASE("seminorm properties") {
  const Mesh1D mesh(0, 1, 16);
  const NonlocalQuadrature quad(mesh, KernelSpec::standard(0.5, 2.0));
  Rng rng(5);
  const GridFunction u = random_smooth_function(mesh, rng);
  CHECK(gagliardo_seminorm(GridFunction(mesh), quad) == 0.0);
  CHECK(gagliardo_seminorm(2.0 * u, quad) == doctest::Approx(2.0 * gagliardo_seminorm(u, quad)).epsilon(1e-13));
  CHECK(gagliardo_seminorm(-1.0 * u, quad) == doctest::Approx(gagliardo_seminorm(u, quad)).epsilon(1e-14));
  const double full = sobolev_norm(u, quad);
  CHECK(full >= gagliardo_seminorm(u, quad));
  CHECK(std::abs(full * full - (lq_norm_pow(u, 2.0) + gagliardo_seminorm_pow(u, quad))) <= 1e-12 * full * full);
  CHECK(sobolev_norm(GridFunction(mesh), quad) == 0.0);
  CHECK(w0_norm(u, quad) == gagliardo_seminorm(u, quad));
}

TEST_CASE("kernel-weighted seminorm lies between the reference bounds") {
  const Mesh1D mesh(0, 1, 12);
  const NonlocalQuadrature quad(mesh, KernelSpec::perturbed(0.4, 2.5));
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const GridFunction u = random_smooth_function(mesh, rng);
    const double ref = gagliardo_seminorm_pow(u, quad, Weight::reference);
    const double ker = gagliardo_seminorm_pow(u, quad, Weight::kernel);
    CHECK(ker >= ref * 0.5);
    CHECK(ker <= ref * 2.0);
  }
}

TEST_CASE("mesh refinement changes the seminorm of a smooth profile by less than 1%") {
  for (double s : {0.2, 0.5, 0.7}) {
    double v[2];
    int k = 0;
    for (int n : {64, 128}) {
      const Mesh1D mesh(0, 1, n);
      const NonlocalQuadrature quad(mesh, KernelSpec::standard(s, 2.0));
      v[k++] = gagliardo_seminorm(GridFunction::interpolate(mesh, [](double x) { return std::sin(std::numbers::pi * x); }), quad);
    }
    CHECK(std::abs(v[1] - v[0]) / v[1] < 0.01);
  }
}

TEST_CASE("exterior truncation stays within the analytic tail bound") {
  Rng rng(21);
  for (auto kernel : {KernelSpec::standard(0.5, 2.0), KernelSpec::perturbed(0.5, 2.0)}) {
    const GridFunction u0 = random_smooth_function(Mesh1D(0, 1, 16), rng);
    const Mesh1D m1(0, 1, 16, 2.0), m2(0, 1, 16, 40.0);
    QuadratureRule rule;
    rule.tail = TailMode::graded_numeric;
    const NonlocalQuadrature q1(m1, kernel, rule), q2(m2, kernel, rule);
    const GridFunction u1(m1, {u0.values().begin(), u0.values().end()});
    const GridFunction u2(m2, {u0.values().begin(), u0.values().end()});
    const double a = gagliardo_seminorm_pow(u1, q1, Weight::kernel);
    const double b = gagliardo_seminorm_pow(u2, q2, Weight::kernel);
    CHECK(std::abs(a - b) <= exterior_tail_bound(u1, q1));
  }
  CHECK_THROWS_AS(
      [] {
        QuadratureRule rule;
        rule.tail = TailMode::analytic;
        NonlocalQuadrature(Mesh1D(0, 1, 4), KernelSpec::perturbed(0.5, 2.0), rule);
      }(),
      ConfigurationError);
  QuadratureRule bad;
  bad.gauss_order = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigurationError);
  bad.gauss_order = 3;
  bad.diagonal_refinement = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigurationError);
}

TEST_CASE("exterior weights of the standard kernel are exact") {
  const Mesh1D mesh(0, 1, 8);
  const NonlocalQuadrature quad(mesh, KernelSpec::standard(0.4, 2.0));
  const auto vol = quad.volume();
  const auto ext = quad.exterior_ref();
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double z = vol[j].x;
    const double exact = (std::pow(z, -0.8) + std::pow(1.0 - z, -0.8)) / 0.8;
    CHECK(std::abs(ext[j] - exact) <= 1e-9 * exact);
  }
}

TEST_CASE("discrete Poincare constant from the generalized eigenproblem") {
  // ||u||_2^2 <= C [u]^2 with C = 1 / lambda_min(A, Mass) on the mesh space.
  const Mesh1D mesh(0, 1, 32);
  const NonlocalQuadrature quad(mesh, KernelSpec::standard(0.5, 2.0));
  const SobolevMetric with_mass(quad, 1.0), seminorm(quad, 0.0);
  const Eigen::MatrixXd A = seminorm.matrix();
  const Eigen::MatrixXd B = with_mass.matrix() - A;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  const double C = 1.0 / es.eigenvalues().minCoeff();
  Rng rng(2);
  std::vector<GridFunction> members;
  for (const auto& f : test_function_suite(mesh)) members.push_back(f.u);
  for (int i = 0; i < 20; ++i) members.push_back(random_nodal_function(mesh, rng));
  for (const auto& u : members) CHECK(lq_norm_pow(u, 2.0) <= C * gagliardo_seminorm_pow(u, quad) * (1.0 + 1e-12));
}

TEST_CASE("reductions do not depend on the thread count") {
  const Mesh1D mesh(0, 1, 48);
  const NonlocalQuadrature quad(mesh, KernelSpec::perturbed(0.5, 2.0));
  Rng rng(4);
  const GridFunction u = random_smooth_function(mesh, rng);
  std::vector<double> values;
  for (const char* threads : {"1", "2", "3", "8"}) {
    setenv("FRACVAR_THREADS", threads, 1);
    values.push_back(gagliardo_seminorm_pow(u, quad, Weight::kernel));
  }
  unsetenv("FRACVAR_THREADS");
  for (double v : values) CHECK(v == values.front());
}

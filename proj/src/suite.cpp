#include "fracvar/suite.hpp"

#include <cmath>
#include <numbers>

namespace fracvar {

std::vector<NamedFunction> test_function_suite(const Mesh1D& mesh) {
  using std::numbers::pi;
  const double a = mesh.a();
  const double L = mesh.length();
  auto on_unit = [&](auto f) {
    return GridFunction::interpolate(mesh, [&, f](double x) { return f((x - a) / L); });
  };
  auto hat = [](double peak) {
    return [peak](double t) { return t <= peak ? t / peak : (1.0 - t) / (1.0 - peak); };
  };
  std::vector<NamedFunction> suite;
  suite.push_back({"sin1", on_unit([](double t) { return std::sin(pi * t); })});
  suite.push_back({"sin2", on_unit([](double t) { return std::sin(2.0 * pi * t); })});
  suite.push_back({"sin3", on_unit([](double t) { return std::sin(3.0 * pi * t); })});
  suite.push_back({"sin1_cubed", on_unit([](double t) { return std::pow(std::sin(pi * t), 3.0); })});
  suite.push_back({"parabola", on_unit([](double t) { return t * (1.0 - t); })});
  suite.push_back({"skew_cubic", on_unit([](double t) { return t * t * (1.0 - t); })});
  suite.push_back({"sqrt_profile", on_unit([](double t) { return std::sqrt(t * (1.0 - t)); })});
  suite.push_back({"hat_mid", on_unit(hat(0.5))});
  suite.push_back({"hat_third", on_unit(hat(1.0 / 3.0))});
  suite.push_back({"bump", on_unit([](double t) {
                     const double r = (t - 0.5) / 0.25;
                     return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0;
                   })});
  suite.push_back({"plateau", on_unit([](double t) {
                     if (t < 0.25) return t / 0.25;
                     if (t > 0.75) return (1.0 - t) / 0.25;
                     return 1.0;
                   })});
  return suite;
}

GridFunction random_smooth_function(const Mesh1D& mesh, Rng& rng) {
  using std::numbers::pi;
  double coeff[8];
  for (int k = 0; k < 8; ++k) coeff[k] = rng.uniform(-1.0, 1.0) / (k + 1);
  const double a = mesh.a();
  const double L = mesh.length();
  return GridFunction::interpolate(mesh, [&](double x) {
    double sum = 0.0;
    for (int k = 0; k < 8; ++k) sum += coeff[k] * std::sin((k + 1) * pi * (x - a) / L);
    return sum;
  });
}

GridFunction random_nodal_function(const Mesh1D& mesh, Rng& rng) {
  std::vector<double> values(mesh.n_dof());
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  return GridFunction(mesh, std::move(values));
}

}  // namespace fracvar

#pragma once

#include <string>
#include <vector>

#include "fracvar/mesh.hpp"
#include "fracvar/random.hpp"

namespace fracvar {

struct NamedFunction {
  std::string name;
  GridFunction u;
};

/// Fixed family of profiles on Omega (sines, polynomials, hats, bumps,
/// plateaus) used for embedding constants, Poincare checks and sweeps.
std::vector<NamedFunction> test_function_suite(const Mesh1D& mesh);

/// sum_{k<=8} c_k / k sin(k pi (x-a)/L), c_k uniform in [-1, 1].
GridFunction random_smooth_function(const Mesh1D& mesh, Rng& rng);
/// Independent uniform nodal values in [-1, 1].
GridFunction random_nodal_function(const Mesh1D& mesh, Rng& rng);

}  // namespace fracvar

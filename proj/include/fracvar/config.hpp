#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/functionals.hpp"

namespace fracvar {

/// Flat run configuration. Every field has a default, so an empty file is
/// a valid configuration.
struct RunConfig {
  // domain
  double a = 0.0;
  double b = 1.0;
  int n_elem = 64;
  double tail_radius = 0.0;  // <= 0: 10 (b - a)
  // physics
  double s = 0.5;
  double p = 2.0;
  double q = 4.0;
  double lambda = 1.0;
  /// > 0: lambda = lambda_scale * (lambda_1 estimate for solve-p2 and
  /// geometry, Rayleigh estimate for homotopy and sphere-min).
  double lambda_scale = 0.0;
  /// Declared ellipticity constant; must not be below the built-in
  /// constants of phi and kernel. Unset: taken from the instances.
  std::optional<double> Lambda;
  std::string phi = "power";
  std::string kernel = "standard";
  // source
  std::string source = "sin";  // none | sin | const | file
  double source_amplitude = 0.1;
  std::string source_file;
  // solver
  double tol = 1e-6;
  int max_iter = 2000;
  std::uint64_t seed = 1;
  int samples = 500;
  int n_steps = 12;
  // quadrature
  int gauss_order = 3;
  int diag_levels = 6;
  // capacity
  std::string set = "[0.4:0.6]";
  double C6 = 1.0;
  double C7 = 1.0;
  // output
  std::string output = "out";
};

/// Keys accepted by set_option, in echo order.
const std::vector<std::string>& config_keys();
/// One-line description of a key for --help.
std::string config_help(const std::string& key);

/// Throws ConfigurationError on an unknown key or an unparsable value.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);
/// key = value lines; '#' starts a comment.
void parse_config(RunConfig& cfg, std::istream& in, const std::string& origin = "config");
/// Throws IoError when the file cannot be read.
void load_config_file(RunConfig& cfg, const std::string& path);

/// Every key with its resolved value, in config_keys() order.
std::vector<std::pair<std::string, std::string>> resolved(const RunConfig& cfg);
void write_config_echo(std::ostream& out, const RunConfig& cfg);

struct Diagnostic {
  enum class Level { error, warning };
  Level level;
  std::string message;
};

/// Dry-run constraint report. Empty for a consistent configuration.
std::vector<Diagnostic> validate(const RunConfig& cfg);

Mesh1D build_mesh(const RunConfig& cfg);
QuadratureRule build_rule(const RunConfig& cfg);
PhiSpec build_phi(const RunConfig& cfg);
KernelSpec build_kernel(const RunConfig& cfg);
/// Empty for source = none. Reading a source file may throw IoError.
Source build_source(const RunConfig& cfg);
/// Model at the configured lambda (lambda_scale is resolved by run()).
EnergyModel build_model(const RunConfig& cfg, bool with_source = true);

}  // namespace fracvar

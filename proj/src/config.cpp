#include "fracvar/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <numbers>
#include <ostream>

#include "fracvar/capacity.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/solvers.hpp"

namespace fracvar {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty())
    throw ConfigurationError("invalid value '" + value + "' for key '" + key + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigurationError("value for key '" + key + "' must be finite");
  return out;
}

std::string one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return value;
    list += list.empty() ? a : std::string("|") + a;
  }
  throw ConfigurationError("invalid value '" + value + "' for key '" + key + "' (expected " + list + ")");
}

struct KeyInfo {
  const char* help;
};

const std::map<std::string, KeyInfo>& key_table() {
  static const std::map<std::string, KeyInfo> table = {
      {"a", {"left end of Omega"}},
      {"b", {"right end of Omega"}},
      {"n_elem", {"number of mesh elements"}},
      {"tail_radius", {"exterior truncation radius R (<= 0: 10 (b - a))"}},
      {"s", {"fractional order s in (0, 1)"}},
      {"p", {"growth exponent p of Phi"}},
      {"q", {"power nonlinearity exponent q in (p, p_s^*)"}},
      {"lambda", {"lambda > 0"}},
      {"lambda_scale", {"> 0: lambda = lambda_scale * lambda_1 (solve-p2, geometry) or * Rayleigh estimate"}},
      {"Lambda", {"declared ellipticity constant, or auto"}},
      {"phi", {"Phi instance: power | perturbed"}},
      {"kernel", {"kernel instance: standard | perturbed"}},
      {"source", {"right-hand side: none | sin | const | file"}},
      {"source_amplitude", {"amplitude of the sin and const sources"}},
      {"source_file", {"grid function CSV used when source = file"}},
      {"tol", {"residual tolerance"}},
      {"max_iter", {"iteration limit"}},
      {"seed", {"seed for every sampled quantity"}},
      {"samples", {"random samples for embedding constants"}},
      {"n_steps", {"homotopy stages after the first"}},
      {"gauss_order", {"Gauss points per element direction"}},
      {"diag_levels", {"geometric refinement levels toward the diagonal"}},
      {"set", {"compact set for capacity: empty, {x}, [lo:hi], joined by +"}},
      {"C6", {"constant C6 of the capacity probe"}},
      {"C7", {"constant C7 of the capacity probe"}},
      {"output", {"output directory"}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "a",   "b",      "n_elem", "tail_radius", "s",    "p",   "q",        "lambda", "lambda_scale",
      "Lambda", "phi", "kernel", "source", "source_amplitude", "source_file", "tol", "max_iter", "seed",
      "samples", "n_steps", "gauss_order", "diag_levels", "set", "C6", "C7", "output"};
  return keys;
}

std::string config_help(const std::string& key) {
  const auto it = key_table().find(key);
  return it == key_table().end() ? std::string() : it->second.help;
}

void set_option(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto num = [&](double& field) { field = parse_number<double>(key, v); };
  auto count = [&](int& field, int min) {
    field = parse_number<int>(key, v);
    if (field < min) throw ConfigurationError("key '" + key + "' must be >= " + std::to_string(min));
  };
  if (key == "a") num(c.a);
  else if (key == "b") num(c.b);
  else if (key == "n_elem") count(c.n_elem, 2);
  else if (key == "tail_radius") num(c.tail_radius);
  else if (key == "s") num(c.s);
  else if (key == "p") num(c.p);
  else if (key == "q") num(c.q);
  else if (key == "lambda") num(c.lambda);
  else if (key == "lambda_scale") num(c.lambda_scale);
  else if (key == "Lambda") {
    if (v == "auto") c.Lambda.reset();
    else c.Lambda = parse_number<double>(key, v);
  } else if (key == "phi") c.phi = one_of(key, v, {"power", "perturbed"});
  else if (key == "kernel") c.kernel = one_of(key, v, {"standard", "perturbed"});
  else if (key == "source") c.source = one_of(key, v, {"none", "sin", "const", "file"});
  else if (key == "source_amplitude") num(c.source_amplitude);
  else if (key == "source_file") c.source_file = v;
  else if (key == "tol") {
    num(c.tol);
    if (!(c.tol > 0.0)) throw ConfigurationError("tol must be > 0");
  } else if (key == "max_iter") count(c.max_iter, 0);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "samples") count(c.samples, 0);
  else if (key == "n_steps") count(c.n_steps, 2);
  else if (key == "gauss_order") count(c.gauss_order, 2);
  else if (key == "diag_levels") count(c.diag_levels, 1);
  else if (key == "set") {
    CompactSet1D::parse(v);
    c.set = v;
  } else if (key == "C6") num(c.C6);
  else if (key == "C7") num(c.C7);
  else if (key == "output") {
    if (v.empty()) throw ConfigurationError("output directory must not be empty");
    c.output = v;
  } else {
    throw ConfigurationError("unknown configuration key '" + key + "'");
  }
}

void parse_config(RunConfig& cfg, std::istream& in, const std::string& origin) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigurationError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      set_option(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigurationError& e) {
      throw ConfigurationError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  parse_config(cfg, in, path);
}

std::vector<std::pair<std::string, std::string>> resolved(const RunConfig& c) {
  const auto f = format_number;
  return {
      {"a", f(c.a)},
      {"b", f(c.b)},
      {"n_elem", std::to_string(c.n_elem)},
      {"tail_radius", f(c.tail_radius)},
      {"s", f(c.s)},
      {"p", f(c.p)},
      {"q", f(c.q)},
      {"lambda", f(c.lambda)},
      {"lambda_scale", f(c.lambda_scale)},
      {"Lambda", c.Lambda ? f(*c.Lambda) : "auto"},
      {"phi", c.phi},
      {"kernel", c.kernel},
      {"source", c.source},
      {"source_amplitude", f(c.source_amplitude)},
      {"source_file", c.source_file},
      {"tol", f(c.tol)},
      {"max_iter", std::to_string(c.max_iter)},
      {"seed", std::to_string(c.seed)},
      {"samples", std::to_string(c.samples)},
      {"n_steps", std::to_string(c.n_steps)},
      {"gauss_order", std::to_string(c.gauss_order)},
      {"diag_levels", std::to_string(c.diag_levels)},
      {"set", c.set},
      {"C6", f(c.C6)},
      {"C7", f(c.C7)},
      {"output", c.output},
  };
}

void write_config_echo(std::ostream& out, const RunConfig& cfg) {
  out << "# schema=1\n";
  for (const auto& [k, v] : resolved(cfg)) out << k << " = " << v << '\n';
}

// ------------------------------------------------------------------ builders

Mesh1D build_mesh(const RunConfig& c) {
  if (!(c.b > c.a)) throw ConfigurationError("domain must satisfy a < b");
  return Mesh1D(c.a, c.b, c.n_elem, c.tail_radius);
}

QuadratureRule build_rule(const RunConfig& c) {
  QuadratureRule r;
  r.gauss_order = c.gauss_order;
  r.diagonal_refinement = c.diag_levels;
  r.validate();
  return r;
}

KernelSpec build_kernel(const RunConfig& c) { return kernel_by_name(c.kernel, c.s, c.p); }

PhiSpec build_phi(const RunConfig& c) {
  PhiSpec phi = phi_by_name(c.phi, c.p);
  if (!c.Lambda) return phi;
  const double built_in = std::max(phi.lambda_cap(), build_kernel(c).lambda_cap());
  if (!(*c.Lambda >= built_in))
    throw ConfigurationError("declared Lambda = " + format_number(*c.Lambda) +
                             " is below the constant of the Phi/kernel instances (" + format_number(built_in) + ")");
  if (*c.Lambda == phi.lambda_cap()) return phi;
  // A looser declared constant: same Phi, wider bounds.
  auto inner = std::make_shared<PhiSpec>(phi);
  return PhiSpec::custom(
      phi.name(), c.p, *c.Lambda, [inner](double t) { return (*inner)(t); },
      [inner](double t) { return inner->primitive(t); });
}

Source build_source(const RunConfig& c) {
  const double amp = c.source_amplitude;
  const double a = c.a, len = c.b - c.a;
  if (c.source == "none") return {};
  if (c.source == "sin") return [amp, a, len](double x) { return amp * std::sin(std::numbers::pi * (x - a) / len); };
  if (c.source == "const") return [amp](double) { return amp; };
  std::ifstream in(c.source_file);
  if (c.source_file.empty() || !in) throw IoError("cannot read source file '" + c.source_file + "'");
  auto f = std::make_shared<GridFunction>(read_csv(in));
  return [f](double x) { return (*f)(x); };
}

EnergyModel build_model(const RunConfig& c, bool with_source) {
  if (!(c.lambda > 0.0)) throw DomainError("lambda must satisfy lambda > 0");
  return EnergyModel(build_phi(c), build_kernel(c), c.lambda, c.q, build_mesh(c), build_rule(c),
                     with_source ? build_source(c) : Source{});
}

// ---------------------------------------------------------------- validate

std::vector<Diagnostic> validate(const RunConfig& c) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string m) { out.push_back({Diagnostic::Level::error, std::move(m)}); };
  auto warning = [&](std::string m) { out.push_back({Diagnostic::Level::warning, std::move(m)}); };

  if (!(c.lambda > 0.0)) error("lambda must satisfy lambda > 0 (got " + format_number(c.lambda) + ")");
  if (c.lambda_scale < 0.0) error("lambda_scale must be >= 0");
  std::optional<EnergyModel> model;
  try {
    RunConfig probe = c;
    if (!(probe.lambda > 0.0)) probe.lambda = 1.0;
    model.emplace(build_model(probe));
  } catch (const std::exception& e) {
    error(e.what());
  }
  try {
    CompactSet1D::parse(c.set).check_inside(build_mesh(c));
  } catch (const std::exception& e) {
    error(std::string("set: ") + e.what());
  }
  if (!model) return out;

  const double L = model->lambda_cap();
  const double hi = std::pow(c.q / c.p, 0.25);
  if (!(L < hi))
    warning("Lambda = " + format_number(L) + " is outside [1, (q/p)^{1/4}) = [1, " + format_number(hi) +
            "); the Palais-Smale bound needs q - p Lambda^4 > 0");

  if (model->has_source()) {
    const auto k = estimate_embedding_constants(model->quadrature(), c.p, c.q, c.samples, c.seed);
    const double fn = source_norm(model->source(), model->mesh(), model->conjugate_exponent(), c.gauss_order);
    if (fn > 0.0) {
      const double l1 = lambda1_threshold(c.p, c.q, L, k.C4, k.C5, fn);
      const double lam = c.lambda_scale > 0.0 ? c.lambda_scale * l1 : c.lambda;
      const std::string txt = "lambda = " + format_number(lam) + " vs estimated lambda_1 = " + format_number(l1);
      if (lam >= 1.1 * l1) error(txt + ": lambda < lambda_1 is required");
      else if (lam >= 0.9 * l1) warning(txt + ": within 10% of the threshold");
    }
  }
  return out;
}

}  // namespace fracvar

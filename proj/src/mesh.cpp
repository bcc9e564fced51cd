#include "fracvar/mesh.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "fracvar/errors.hpp"
#include "fracvar/gauss.hpp"

namespace fracvar {

Mesh1D::Mesh1D(double a, double b, int n_elem, double tail_radius)
    : a_(a), b_(b), n_elem_(n_elem), tail_radius_(tail_radius > 0.0 ? tail_radius : 10.0 * (b - a)) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw DomainError("mesh requires finite endpoints with a < b");
  if (n_elem < 2) throw DomainError("mesh requires n_elem >= 2");
  if (!std::isfinite(tail_radius_)) throw DomainError("tail radius must be finite");
}

bool Mesh1D::same_nodes(const Mesh1D& other) const {
  return a_ == other.a_ && b_ == other.b_ && n_elem_ == other.n_elem_;
}

GridFunction::GridFunction(const Mesh1D& mesh) : mesh_(mesh), values_(mesh.n_dof(), 0.0) {}

GridFunction::GridFunction(const Mesh1D& mesh, std::vector<double> interior_values)
    : mesh_(mesh), values_(std::move(interior_values)) {
  if (static_cast<int>(values_.size()) != mesh_.n_dof())
    throw ConfigurationError("grid function needs exactly n_elem - 1 interior values");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("grid function values must be finite");
}

GridFunction GridFunction::interpolate(const Mesh1D& mesh, const std::function<double(double)>& f) {
  std::vector<double> values(mesh.n_dof());
  for (int i = 0; i < mesh.n_dof(); ++i) values[i] = f(mesh.node(i + 1));
  return GridFunction(mesh, std::move(values));
}

std::vector<double> GridFunction::nodal_values() const {
  std::vector<double> nodes(mesh_.n_nodes(), 0.0);
  std::copy(values_.begin(), values_.end(), nodes.begin() + 1);
  return nodes;
}

double GridFunction::nodal(int i) const {
  if (i <= 0 || i >= mesh_.n_elem()) return 0.0;
  return values_[i - 1];
}

double GridFunction::operator()(double x) const {
  if (!(x > mesh_.a() && x < mesh_.b())) return 0.0;
  const double t = (x - mesh_.a()) / mesh_.h();
  int e = static_cast<int>(std::floor(t));
  if (e >= mesh_.n_elem()) e = mesh_.n_elem() - 1;
  const double xi = t - e;
  return nodal(e) * (1.0 - xi) + nodal(e + 1) * xi;
}

void GridFunction::check_same_mesh(const GridFunction& other) const {
  if (!mesh_.same_nodes(other.mesh_)) throw ConfigurationError("grid functions live on different meshes");
}

GridFunction& GridFunction::operator+=(const GridFunction& other) {
  check_same_mesh(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& other) {
  check_same_mesh(other);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(double c) {
  for (double& v : values_) v *= c;
  return *this;
}

std::vector<VolumePoint> volume_points(const Mesh1D& mesh, int gauss_order) {
  const GaussRule& rule = gauss_legendre(gauss_order);
  std::vector<VolumePoint> points;
  points.reserve(static_cast<std::size_t>(mesh.n_elem()) * rule.nodes.size());
  const double h = mesh.h();
  for (int e = 0; e < mesh.n_elem(); ++e)
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
      points.push_back({e, rule.nodes[k], mesh.a() + (e + rule.nodes[k]) * h, h * rule.weights[k]});
  return points;
}

double lq_norm_pow(const GridFunction& u, double q, int gauss_order) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw DomainError("lq_norm requires finite q >= 1");
  double sum = 0.0;
  for (const auto& pt : volume_points(u.mesh(), gauss_order)) {
    const double v = u.nodal(pt.elem) * (1.0 - pt.xi) + u.nodal(pt.elem + 1) * pt.xi;
    sum += pt.weight * (q == 2.0 ? v * v : std::pow(std::abs(v), q));
  }
  return sum;
}

double lq_norm(const GridFunction& u, double q, int gauss_order) {
  return std::pow(lq_norm_pow(u, q, gauss_order), 1.0 / q);
}

double duality_pairing(const Source& f, const GridFunction& u, int gauss_order) {
  if (!f) return 0.0;
  double sum = 0.0;
  for (const auto& pt : volume_points(u.mesh(), gauss_order)) {
    const double v = u.nodal(pt.elem) * (1.0 - pt.xi) + u.nodal(pt.elem + 1) * pt.xi;
    sum += pt.weight * f(pt.x) * v;
  }
  return sum;
}

double duality_pairing(const GridFunction& f, const GridFunction& u, int gauss_order) {
  if (!f.mesh().same_nodes(u.mesh())) throw ConfigurationError("duality_pairing: mesh mismatch");
  double sum = 0.0;
  for (const auto& pt : volume_points(u.mesh(), gauss_order)) {
    const double fv = f.nodal(pt.elem) * (1.0 - pt.xi) + f.nodal(pt.elem + 1) * pt.xi;
    const double v = u.nodal(pt.elem) * (1.0 - pt.xi) + u.nodal(pt.elem + 1) * pt.xi;
    sum += pt.weight * fv * v;
  }
  return sum;
}

double source_norm(const Source& f, const Mesh1D& mesh, double r, int gauss_order) {
  if (!f) return 0.0;
  double sum = 0.0;
  for (const auto& pt : volume_points(mesh, gauss_order)) sum += pt.weight * std::pow(std::abs(f(pt.x)), r);
  return std::pow(sum, 1.0 / r);
}

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void write_csv(std::ostream& out, const GridFunction& u) {
  const Mesh1D& mesh = u.mesh();
  out << "# schema=1\n";
  out << "# mesh a=" << format_number(mesh.a()) << " b=" << format_number(mesh.b())
      << " n=" << mesh.n_elem() << "\n";
  out << "x,value\n";
  for (int i = 0; i < mesh.n_nodes(); ++i)
    out << format_number(mesh.node(i)) << ',' << format_number(u.nodal(i)) << '\n';
}

GridFunction read_csv(std::istream& in, double tail_radius) {
  std::string line;
  double a = 0.0, b = 0.0;
  int n = -1;
  std::vector<double> nodes;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("mesh");
      if (pos != std::string::npos) {
        std::istringstream header(line.substr(pos + 4));
        std::string token;
        while (header >> token) {
          const auto eq = token.find('=');
          if (eq == std::string::npos) continue;
          const std::string key = token.substr(0, eq);
          const std::string val = token.substr(eq + 1);
          if (key == "a") a = std::stod(val);
          else if (key == "b") b = std::stod(val);
          else if (key == "n") n = std::stoi(val);
        }
      }
      continue;
    }
    if (line.rfind("x,", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigurationError("malformed grid function row: " + line);
    nodes.push_back(std::stod(line.substr(comma + 1)));
  }
  if (n < 0) throw ConfigurationError("grid function CSV lacks a '# mesh' header");
  if (static_cast<int>(nodes.size()) != n + 1)
    throw ConfigurationError("grid function CSV row count does not match n + 1");
  if (nodes.front() != 0.0 || nodes.back() != 0.0)
    throw ConfigurationError("grid function must vanish at the boundary nodes");
  Mesh1D mesh(a, b, n, tail_radius);
  return GridFunction(mesh, std::vector<double>(nodes.begin() + 1, nodes.end() - 1));
}

}  // namespace fracvar

#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fracvar {

/// Uniform partition of Omega = (a, b) with a truncation radius R for the
/// exterior region used by the nonlocal integrals.
class Mesh1D {
 public:
  /// tail_radius <= 0 selects the default R = 10 (b - a).
  Mesh1D(double a, double b, int n_elem, double tail_radius = 0.0);

  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return b_ - a_; }
  int n_elem() const { return n_elem_; }
  int n_nodes() const { return n_elem_ + 1; }
  /// Interior nodes: the unknowns of a grid function.
  int n_dof() const { return n_elem_ - 1; }
  double h() const { return (b_ - a_) / n_elem_; }
  double tail_radius() const { return tail_radius_; }
  double node(int i) const { return a_ + h() * i; }

  /// Same nodes (a, b, n). The tail radius is a quadrature parameter.
  bool same_nodes(const Mesh1D& other) const;

 private:
  double a_;
  double b_;
  int n_elem_;
  double tail_radius_;
};

/// Piecewise-linear function on a Mesh1D that vanishes at a, b and outside
/// [a, b]. Only interior nodal values are stored.
class GridFunction {
 public:
  explicit GridFunction(const Mesh1D& mesh);
  GridFunction(const Mesh1D& mesh, std::vector<double> interior_values);

  /// Nodal interpolant of f at the interior nodes.
  static GridFunction interpolate(const Mesh1D& mesh, const std::function<double(double)>& f);

  const Mesh1D& mesh() const { return mesh_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  /// All n_elem + 1 nodal values including the boundary zeros.
  std::vector<double> nodal_values() const;
  /// Value at node i (0 at i = 0 and i = n_elem).
  double nodal(int i) const;
  /// Point evaluation; 0 outside [a, b].
  double operator()(double x) const;

  GridFunction& operator+=(const GridFunction& other);
  GridFunction& operator-=(const GridFunction& other);
  GridFunction& operator*=(double c);
  friend GridFunction operator+(GridFunction lhs, const GridFunction& rhs) { return lhs += rhs; }
  friend GridFunction operator-(GridFunction lhs, const GridFunction& rhs) { return lhs -= rhs; }
  friend GridFunction operator*(double c, GridFunction u) { return u *= c; }

 private:
  void check_same_mesh(const GridFunction& other) const;

  Mesh1D mesh_;
  std::vector<double> values_;
};

/// Analytic right-hand side f(x) on Omega.
using Source = std::function<double(double)>;

/// Integration point of the per-element volume rule.
struct VolumePoint {
  int elem;
  double xi;  // local coordinate in [0, 1]
  double x;
  double weight;
};

std::vector<VolumePoint> volume_points(const Mesh1D& mesh, int gauss_order);

/// (int_Omega |u|^q dx)^{1/q} with the per-element Gauss rule.
double lq_norm(const GridFunction& u, double q, int gauss_order = 3);
/// int_Omega |u|^q dx.
double lq_norm_pow(const GridFunction& u, double q, int gauss_order = 3);
/// int_Omega f u dx.
double duality_pairing(const Source& f, const GridFunction& u, int gauss_order = 3);
double duality_pairing(const GridFunction& f, const GridFunction& u, int gauss_order = 3);
/// (int_Omega |f|^r dx)^{1/r} for an analytic source.
double source_norm(const Source& f, const Mesh1D& mesh, double r, int gauss_order = 3);

/// CSV serialization: "# schema=1", "# mesh a=<a> b=<b> n=<n>", "x,value",
/// then one row per node including the boundary zeros.
void write_csv(std::ostream& out, const GridFunction& u);
GridFunction read_csv(std::istream& in, double tail_radius = 0.0);

/// Shortest round-trip decimal form used by every emitted number.
std::string format_number(double value);

}  // namespace fracvar

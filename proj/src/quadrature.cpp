#include "fracvar/quadrature.hpp"

#include <cmath>

#include "fracvar/errors.hpp"
#include "fracvar/gauss.hpp"

namespace fracvar {

void QuadratureRule::validate() const {
  if (gauss_order < 2) throw ConfigurationError("quadrature requires gauss_order >= 2");
  if (diagonal_refinement < 1) throw ConfigurationError("quadrature requires diagonal_refinement >= 1");
}

namespace {

/// Squares (in units of h, corner at the origin) covering [0,1]^2 with
/// geometric grading toward the corner (0, 0).
struct Square {
  double x0, y0, size;
};

std::vector<Square> corner_graded_squares(int levels) {
  std::vector<Square> squares;
  double size = 1.0;
  for (int k = 1; k <= levels; ++k) {
    size *= 0.5;
    squares.push_back({size, 0.0, size});
    squares.push_back({0.0, size, size});
    squares.push_back({size, size, size});
  }
  squares.push_back({0.0, 0.0, size});
  return squares;
}

/// Segments of [0, 1] graded toward 0: [0, 2^-L], [2^-L, 2^-L+1], ..., [1/2, 1].
std::vector<std::pair<double, double>> graded_segments(int levels) {
  std::vector<std::pair<double, double>> segments;
  double lo = std::ldexp(1.0, -levels);
  segments.emplace_back(0.0, lo);
  while (lo < 1.0) {
    segments.emplace_back(lo, 2.0 * lo);
    lo *= 2.0;
  }
  return segments;
}

}  // namespace

NonlocalQuadrature::NonlocalQuadrature(const Mesh1D& mesh, const KernelSpec& kernel, const QuadratureRule& rule)
    : mesh_(mesh), kernel_(kernel), rule_(rule), tail_mode_(rule.tail) {
  rule_.validate();
  if (tail_mode_ == TailMode::automatic)
    tail_mode_ = kernel_.is_standard() ? TailMode::analytic : TailMode::graded_numeric;
  if (tail_mode_ == TailMode::analytic && !kernel_.is_standard())
    throw ConfigurationError("analytic tail quadrature requires the standard kernel");
  volume_ = volume_points(mesh_, rule_.gauss_order);
  build_pairs();
  build_exterior();
}

void NonlocalQuadrature::build_pairs() {
  const GaussRule& g = gauss_legendre(rule_.gauss_order);
  const int n = mesh_.n_elem();
  const double h = mesh_.h();
  const double alpha = kernel_.order();
  const int levels = rule_.diagonal_refinement;
  const auto squares = corner_graded_squares(levels);
  const auto segments = graded_segments(levels);

  auto push = [&](int ex, int ey, double xi_x, double xi_y, double geo, double dist) {
    const double x = mesh_.a() + (ex + xi_x) * h;
    const double y = mesh_.a() + (ey + xi_y) * h;
    const double ref = std::pow(dist, -alpha);
    const double k = kernel_.kind() == KernelSpec::Kind::custom ? kernel_(x, y) : kernel_.normalized(x, y) * ref;
    entries_.push_back({ex, ey, xi_x, xi_y, geo, dist, geo * k, geo * ref});
  };

  for (int ex = 0; ex < n; ++ex) {
    for (int ey = 0; ey < n; ++ey) {
      const int gap = ey - ex;
      if (std::abs(gap) >= 2) {
        for (std::size_t i = 0; i < g.nodes.size(); ++i)
          for (std::size_t j = 0; j < g.nodes.size(); ++j)
            push(ex, ey, g.nodes[i], g.nodes[j], h * h * g.weights[i] * g.weights[j],
                 h * std::abs(ex + g.nodes[i] - ey - g.nodes[j]));
      } else if (gap == 0) {
        // x - y = d h with d graded toward 0; y ranges over [0, 1 - d].
        for (const auto& [lo, hi] : segments) {
          for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            const double d = lo + (hi - lo) * g.nodes[i];
            const double wd = (hi - lo) * g.weights[i];
            for (std::size_t j = 0; j < g.nodes.size(); ++j) {
              const double zeta = (1.0 - d) * g.nodes[j];
              const double geo = h * h * wd * (1.0 - d) * g.weights[j];
              push(ex, ey, zeta + d, zeta, geo, h * d);
              push(ex, ey, zeta, zeta + d, geo, h * d);
            }
          }
        }
      } else {
        // Touching elements: distances xi, eta from the shared node.
        for (const Square& sq : squares) {
          for (std::size_t i = 0; i < g.nodes.size(); ++i) {
            for (std::size_t j = 0; j < g.nodes.size(); ++j) {
              const double xi = sq.x0 + sq.size * g.nodes[i];
              const double eta = sq.y0 + sq.size * g.nodes[j];
              const double geo = h * h * sq.size * sq.size * g.weights[i] * g.weights[j];
              if (gap == 1) {
                push(ex, ey, 1.0 - xi, eta, geo, h * (xi + eta));
              } else {
                push(ex, ey, xi, 1.0 - eta, geo, h * (xi + eta));
              }
            }
          }
        }
      }
    }
  }
}

void NonlocalQuadrature::build_exterior() {
  // One-dimensional work per volume point, so a doubled order is cheap.
  const GaussRule& g = gauss_legendre(2 * rule_.gauss_order);
  const double a = mesh_.a();
  const double b = mesh_.b();
  const double R = mesh_.tail_radius();
  const double alpha = kernel_.order();
  const double sp = kernel_.s() * kernel_.p();
  const double metric_order = kernel_.dim() + 2.0 * kernel_.s();

  // Offsets tau in [0, R] from the boundary, graded toward 0.
  std::vector<double> tau, omega;
  {
    std::vector<double> breaks{0.0};
    double t = mesh_.h() * std::ldexp(1.0, -rule_.diagonal_refinement);
    while (t < R) {
      breaks.push_back(t);
      t *= 2.0;
    }
    breaks.push_back(R);
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      const double lo = breaks[s], hi = breaks[s + 1];
      for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        tau.push_back(lo + (hi - lo) * g.nodes[k]);
        omega.push_back((hi - lo) * g.weights[k]);
      }
    }
  }
  const GaussRule& gt = g;

  const std::size_t nv = volume_.size();
  ext_out_.assign(nv, 0.0);
  ext_in_.assign(nv, 0.0);
  ext_ref_.assign(nv, 0.0);
  ext_metric_.assign(nv, 0.0);
  tail_ref_.assign(nv, 0.0);

  for (std::size_t j = 0; j < nv; ++j) {
    const double z = volume_[j].x;
    double out = 0.0, in = 0.0, ref = 0.0, metric = 0.0;
    for (int side = 0; side < 2; ++side) {
      const double edge_dist = side == 0 ? z - a : b - z;
      for (std::size_t m = 0; m < tau.size(); ++m) {
        const double r = edge_dist + tau[m];
        const double w = side == 0 ? a - tau[m] : b + tau[m];
        const double rref = std::pow(r, -alpha);
        ref += omega[m] * rref;
        metric += omega[m] * std::pow(r, -metric_order);
        if (kernel_.kind() == KernelSpec::Kind::custom) {
          out += omega[m] * kernel_(z, w);
          in += omega[m] * kernel_(w, z);
        } else {
          out += omega[m] * kernel_.normalized(z, w) * rref;
          in += omega[m] * kernel_.normalized(w, z) * rref;
        }
      }
      // Tail beyond R: r >= d0.
      const double d0 = edge_dist + R;
      const double tail = std::pow(d0, -sp) / sp;
      tail_ref_[j] += tail;
      ref += tail;
      metric += std::pow(d0, -2.0 * kernel_.s()) / (2.0 * kernel_.s());
      if (tail_mode_ == TailMode::analytic) {
        out += tail;
        in += tail;
      } else {
        // r = d0 t^{-1/sp}: the reference integrand becomes constant.
        double tail_out = 0.0, tail_in = 0.0;
        for (std::size_t k = 0; k < gt.nodes.size(); ++k) {
          const double r = d0 * std::pow(gt.nodes[k], -1.0 / sp);
          const double w = side == 0 ? z - r : z + r;
          double k_out, k_in;
          if (kernel_.kind() == KernelSpec::Kind::custom) {
            const double scale = std::pow(r, alpha);
            k_out = kernel_(z, w) * scale;
            k_in = kernel_(w, z) * scale;
          } else {
            k_out = kernel_.normalized(z, w);
            k_in = kernel_.normalized(w, z);
          }
          tail_out += gt.weights[k] * k_out;
          tail_in += gt.weights[k] * k_in;
        }
        out += tail * tail_out;
        in += tail * tail_in;
      }
    }
    ext_out_[j] = out;
    ext_in_[j] = in;
    ext_ref_[j] = ref;
    ext_metric_[j] = metric;
  }
}

}  // namespace fracvar

#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fracvar/kernels.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/parallel.hpp"

namespace fracvar {

enum class TailMode {
  automatic,       // analytic for the standard kernel, graded-numeric otherwise
  analytic,        // closed-form tail; standard kernel only
  graded_numeric,  // mapped Gauss rule on (R, infinity)
};

struct QuadratureRule {
  int gauss_order = 3;
  /// Levels of geometric (ratio 0.5) grading toward the singular diagonal.
  int diagonal_refinement = 6;
  TailMode tail = TailMode::automatic;

  void validate() const;
};

/// One integration point (x, y) of the double integral over Omega x Omega.
struct PairEntry {
  std::int32_t ex;  // element of x
  std::int32_t ey;  // element of y
  double xi_x;      // local coordinates in [0, 1]
  double xi_y;
  double geo;       // dx dy weight
  double dist;      // |x - y|
  double w_kernel;  // geo * K(x, y)
  double w_ref;     // geo * |x - y|^{-(N+sp)}
};

enum class Weight { kernel, reference };

/// Fixed integration-point set for the nonlocal double integrals on one
/// mesh. Interior pairs: tensor Gauss for separated elements, graded
/// subdivision for touching elements. Exterior (u = 0 there): reduced to
/// one-dimensional weights kappa(z) = int_{R \ Omega} K(z, w) dw at the
/// volume points z, with [a-R, b+R] graded-Gauss and the tail beyond R
/// either analytic or mapped-Gauss.
///
/// Every functional, gradient and oracle uses this same node set.
class NonlocalQuadrature {
 public:
  NonlocalQuadrature(const Mesh1D& mesh, const KernelSpec& kernel, const QuadratureRule& rule = {});

  const Mesh1D& mesh() const { return mesh_; }
  const KernelSpec& kernel() const { return kernel_; }
  const QuadratureRule& rule() const { return rule_; }
  TailMode tail_mode() const { return tail_mode_; }

  std::span<const PairEntry> entries() const { return entries_; }
  std::span<const VolumePoint> volume() const { return volume_; }
  /// int over the exterior of K(z, w) dw, per volume point.
  std::span<const double> exterior_out() const { return ext_out_; }
  /// int over the exterior of K(w, z) dw.
  std::span<const double> exterior_in() const { return ext_in_; }
  /// Same with the reference weight |z - w|^{-(N+sp)}.
  std::span<const double> exterior_ref() const { return ext_ref_; }
  /// Reference weight of order N + 2s (the W^{s,2} metric).
  std::span<const double> exterior_metric() const { return ext_metric_; }
  /// Analytic reference tail beyond R, both sides, per volume point.
  std::span<const double> tail_ref() const { return tail_ref_; }

  std::span<const double> weights_out(Weight w) const { return w == Weight::kernel ? exterior_out() : exterior_ref(); }
  std::span<const double> weights_in(Weight w) const { return w == Weight::kernel ? exterior_in() : exterior_ref(); }

 private:
  void build_pairs();
  void build_exterior();

  Mesh1D mesh_;
  KernelSpec kernel_;
  QuadratureRule rule_;
  TailMode tail_mode_;
  std::vector<PairEntry> entries_;
  std::vector<VolumePoint> volume_;
  std::vector<double> ext_out_, ext_in_, ext_ref_, ext_metric_, tail_ref_;
};

using QuadraturePtr = std::shared_ptr<const NonlocalQuadrature>;

// ------------------------------------------------------------------------
// Assembly kernels. `nodes` are full nodal vectors (boundary zeros
// included). Interior pairs are reduced in fixed blocks; the exterior
// contribution is added afterwards in volume-point order.

namespace detail {
inline double interp(std::span<const double> nodes, std::int32_t e, double xi) {
  return nodes[e] * (1.0 - xi) + nodes[e + 1] * xi;
}
}  // namespace detail

/// sum w f(u(x) - u(y)) over interior pairs, plus
/// sum_z w_z [kappa_out f(u(z)) + kappa_in f(-u(z))].
template <class F>
double sum_pairs(const NonlocalQuadrature& quad, std::span<const double> nodes, Weight weight, F f) {
  const auto entries = quad.entries();
  const std::size_t n_blocks = parallel::block_count(entries.size());
  std::vector<double> partial(n_blocks, 0.0);
  parallel::for_each_block(n_blocks, [&](std::size_t b) {
    parallel::CompensatedSum acc;
    const std::size_t end = std::min(entries.size(), (b + 1) * parallel::kBlockSize);
    for (std::size_t k = b * parallel::kBlockSize; k < end; ++k) {
      const PairEntry& e = entries[k];
      const double du = detail::interp(nodes, e.ex, e.xi_x) - detail::interp(nodes, e.ey, e.xi_y);
      acc.add((weight == Weight::kernel ? e.w_kernel : e.w_ref) * f(du));
    }
    partial[b] = acc.value();
  });
  parallel::CompensatedSum total;
  for (double v : partial) total.add(v);
  const auto vol = quad.volume();
  const auto out = quad.weights_out(weight);
  const auto in = quad.weights_in(weight);
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double uz = detail::interp(nodes, vol[j].elem, vol[j].xi);
    total.add(vol[j].weight * (out[j] * f(uz) + in[j] * f(-uz)));
  }
  return total.value();
}

/// sum w g(u(x) - u(y)) (v(x) - v(y)) plus the matching exterior terms.
template <class G>
double sum_pair_products(const NonlocalQuadrature& quad, std::span<const double> u_nodes,
                         std::span<const double> v_nodes, Weight weight, G g) {
  const auto entries = quad.entries();
  const std::size_t n_blocks = parallel::block_count(entries.size());
  std::vector<double> partial(n_blocks, 0.0);
  parallel::for_each_block(n_blocks, [&](std::size_t b) {
    parallel::CompensatedSum acc;
    const std::size_t end = std::min(entries.size(), (b + 1) * parallel::kBlockSize);
    for (std::size_t k = b * parallel::kBlockSize; k < end; ++k) {
      const PairEntry& e = entries[k];
      const double du = detail::interp(u_nodes, e.ex, e.xi_x) - detail::interp(u_nodes, e.ey, e.xi_y);
      const double dv = detail::interp(v_nodes, e.ex, e.xi_x) - detail::interp(v_nodes, e.ey, e.xi_y);
      acc.add((weight == Weight::kernel ? e.w_kernel : e.w_ref) * g(du) * dv);
    }
    partial[b] = acc.value();
  });
  parallel::CompensatedSum total;
  for (double v : partial) total.add(v);
  const auto vol = quad.volume();
  const auto out = quad.weights_out(weight);
  const auto in = quad.weights_in(weight);
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double uz = detail::interp(u_nodes, vol[j].elem, vol[j].xi);
    const double vz = detail::interp(v_nodes, vol[j].elem, vol[j].xi);
    total.add(vol[j].weight * (out[j] * g(uz) - in[j] * g(-uz)) * vz);
  }
  return total.value();
}

/// Nodal vector of sum_pair_products(u, e_i) for every hat function e_i
/// (all n_elem + 1 nodes; boundary entries are discarded by callers).
template <class G>
std::vector<double> pair_gradient(const NonlocalQuadrature& quad, std::span<const double> nodes,
                                  Weight weight, G g) {
  const auto entries = quad.entries();
  const std::size_t n_nodes = nodes.size();
  const std::size_t n_blocks = parallel::block_count(entries.size());
  std::vector<double> partial(n_blocks * n_nodes, 0.0);
  parallel::for_each_block(n_blocks, [&](std::size_t b) {
    double* local = partial.data() + b * n_nodes;
    const std::size_t end = std::min(entries.size(), (b + 1) * parallel::kBlockSize);
    for (std::size_t k = b * parallel::kBlockSize; k < end; ++k) {
      const PairEntry& e = entries[k];
      const double du = detail::interp(nodes, e.ex, e.xi_x) - detail::interp(nodes, e.ey, e.xi_y);
      const double c = (weight == Weight::kernel ? e.w_kernel : e.w_ref) * g(du);
      local[e.ex] += c * (1.0 - e.xi_x);
      local[e.ex + 1] += c * e.xi_x;
      local[e.ey] -= c * (1.0 - e.xi_y);
      local[e.ey + 1] -= c * e.xi_y;
    }
  });
  std::vector<double> grad(n_nodes, 0.0);
  for (std::size_t b = 0; b < n_blocks; ++b)
    for (std::size_t i = 0; i < n_nodes; ++i) grad[i] += partial[b * n_nodes + i];
  const auto vol = quad.volume();
  const auto out = quad.weights_out(weight);
  const auto in = quad.weights_in(weight);
  for (std::size_t j = 0; j < vol.size(); ++j) {
    const double uz = detail::interp(nodes, vol[j].elem, vol[j].xi);
    const double c = vol[j].weight * (out[j] * g(uz) - in[j] * g(-uz));
    grad[vol[j].elem] += c * (1.0 - vol[j].xi);
    grad[vol[j].elem + 1] += c * vol[j].xi;
  }
  return grad;
}

}  // namespace fracvar

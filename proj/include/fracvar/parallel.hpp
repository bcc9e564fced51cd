#pragma once

#include <cstddef>
#include <cmath>
#include <functional>

namespace fracvar::parallel {

/// Worker thread count: FRACVAR_THREADS if set and positive, otherwise the
/// hardware concurrency. Re-read on every call.
int thread_count();

/// Runs fn(block) for every block in [0, n_blocks). Blocks are independent;
/// the caller stores per-block results and folds them in block order, so
/// the result never depends on which thread ran which block.
void for_each_block(std::size_t n_blocks, const std::function<void(std::size_t)>& fn);

/// Fixed block size for entry-list reductions. Independent of thread count.
inline constexpr std::size_t kBlockSize = 2048;

inline std::size_t block_count(std::size_t n_items) {
  return (n_items + kBlockSize - 1) / kBlockSize;
}

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace fracvar::parallel

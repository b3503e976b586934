#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "pcls/error.hpp"

namespace pcls {

/// Position of t inside its block: t lies in B_block = (s_{block-1}, s_block]
/// and offset = t - s_{block-1}, so 0 < offset <= a_block.
struct BlockCoord {
  std::size_t block = 0;
  double offset = 0.0;
};

/// Half-open interval (lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Partition of (0, inf) into blocks B_j = (s_{j-1}, s_j] whose lengths repeat
/// with period T. Blocks are 1-based and generated on demand from the T lengths.
///
/// Points within 1e-12 * S of an endpoint s_j are assigned to block j, so
/// uniform grids that land on endpoints behave deterministically.
class Partition {
 public:
  explicit Partition(std::vector<double> lengths) : lengths_(std::move(lengths)) {
    if (lengths_.empty()) throw DomainError("partition needs at least one block length");
    for (std::size_t i = 0; i < lengths_.size(); ++i) {
      if (!(lengths_[i] > 0.0) || !std::isfinite(lengths_[i]))
        throw DomainError("partition length a_" + std::to_string(i + 1) + " must be positive");
    }
    cumulative_.resize(lengths_.size() + 1, 0.0);
    std::partial_sum(lengths_.begin(), lengths_.end(), cumulative_.begin() + 1);
    span_ = cumulative_.back();
  }

  std::size_t period() const { return lengths_.size(); }
  double span() const { return span_; }
  double tolerance() const { return 1e-12 * span_; }
  const std::vector<double>& lengths() const { return lengths_; }

  /// Index within the period, 0..T-1, for block j >= 1.
  std::size_t phase(std::size_t j) const { return (j - 1) % period(); }
  /// Period number, 0-based, for block j >= 1.
  std::size_t cycle(std::size_t j) const { return (j - 1) / period(); }

  double length(std::size_t j) const { return lengths_[phase(check(j))]; }
  double left(std::size_t j) const {
    check(j);
    return static_cast<double>(cycle(j)) * span_ + cumulative_[phase(j)];
  }
  double right(std::size_t j) const {
    check(j);
    return static_cast<double>(cycle(j)) * span_ + cumulative_[phase(j) + 1];
  }
  Interval block(std::size_t j) const { return {left(j), right(j)}; }

  std::size_t block_of(double t) const { return within_block_coord(t).block; }

  BlockCoord within_block_coord(double t) const {
    if (!(t > 0.0) || !std::isfinite(t))
      throw DomainError("time must be positive and finite, got " + std::to_string(t));
    const double tol = tolerance();
    auto k = static_cast<std::size_t>(std::floor(t / span_));
    double r = t - static_cast<double>(k) * span_;
    // t sitting on (or just past) the end of period k-1 belongs to its last block.
    if (k > 0 && r <= tol) {
      --k;
      r += span_;
    }
    std::size_t i = 0;
    while (i + 1 < period() && r > cumulative_[i + 1] + tol) ++i;
    const std::size_t j = k * period() + i + 1;
    double offset = r - cumulative_[i];
    if (offset > lengths_[i]) offset = lengths_[i];
    if (offset <= 0.0) offset = std::min(lengths_[i], tol);
    return {j, offset};
  }

  bool contains(std::size_t j, const Interval& iv) const {
    const double tol = tolerance();
    return iv.hi > iv.lo && iv.lo >= left(j) - tol && iv.hi <= right(j) + tol;
  }

 private:
  std::size_t check(std::size_t j) const {
    if (j == 0) throw DomainError("block indices start at 1");
    return j;
  }

  std::vector<double> lengths_;
  std::vector<double> cumulative_;
  double span_ = 0.0;
};

}  // namespace pcls

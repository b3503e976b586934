#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcls/error.hpp"
#include "pcls/excov.hpp"
#include "pcls/linalg.hpp"
#include "pcls/parallel.hpp"
#include "pcls/partition.hpp"
#include "pcls/pc_component.hpp"
#include "pcls/stationary.hpp"

namespace pcls {

/// Grid precondition shared by covariance assembly and simulation: nonempty,
/// at most `cap` points, positive, strictly increasing.
inline void validate_grid(std::span<const double> grid, std::size_t cap = 8192) {
  if (grid.empty()) throw DomainError("time grid is empty");
  if (grid.size() > cap)
    throw DomainError("time grid has " + std::to_string(grid.size()) + " points, cap is " +
                      std::to_string(cap));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw DomainError("time grid points must be positive, got " + std::to_string(grid[i]));
    if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  }
}

struct ModelFlags {
  bool include_ls = true;
  bool include_pc = true;
  /// psi_{j+T}(v) = psi_j(v - 2S) and gamma_{j+T} = gamma_j. When false the
  /// psi/gamma lists are used verbatim and must cover every block evaluated.
  bool periodic_reuse = true;
};

/// Covariance materialized on a time grid.
struct CovMatrix {
  std::vector<double> grid;
  Eigen::MatrixXd values;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  bool repaired = false;
};

struct CovOptions {
  bool repair = false;
  double tol = 1e-8;
  std::size_t cap = 8192;
};

/// Result of the Silverman factorization check.
struct SilvermanReport {
  double max_deviation = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

/// Two pairs (t, u), (t', u') with t + u = t' + u'.
struct SilvermanPair {
  double t, u, t2, u2;
};

/// X(t) = X^ls(t) + X^p(t) with independent components.
///
/// X^ls on B_j is U^{j-1}(t) Y_{j-1}(t) + U^j(t) Y_j(t) (Y_0 == 0), with
/// E[U^j(t)U^j(u)] = psi_j(t+u) and E[Y_j(t)Y_j(u)] = gamma_j(t-u). X^p is
/// the interval-measure PC component.
class PCLSModel {
 public:
  PCLSModel(Partition partition, std::vector<ExpConvexCov> psi, std::vector<StationaryCov> gamma,
            std::optional<PCSequenceSpec> pcseq, ModelFlags flags = {})
      : partition_(std::move(partition)),
        psi_(std::move(psi)),
        gamma_(std::move(gamma)),
        flags_(flags) {
    if (!flags_.include_ls && !flags_.include_pc)
      throw DomainError("model must include at least one component");
    if (flags_.include_ls) {
      if (psi_.empty() || gamma_.empty()) throw DomainError("LS component needs psi and gamma lists");
      if (flags_.periodic_reuse &&
          (psi_.size() != partition_.period() || gamma_.size() != partition_.period()))
        throw DomainError("psi and gamma lists must have one entry per block of the period (" +
                          std::to_string(partition_.period()) + ")");
    }
    if (pcseq) pc_.emplace(partition_, std::move(*pcseq));
    if (flags_.include_pc && !pc_) throw DomainError("PC component enabled without a pc sequence");
  }

  const Partition& partition() const { return partition_; }
  const ModelFlags& flags() const { return flags_; }
  const std::vector<ExpConvexCov>& psi_list() const { return psi_; }
  const std::vector<StationaryCov>& gamma_list() const { return gamma_; }
  bool has_pc() const { return pc_.has_value(); }
  const IntervalMeasureCov& pc() const {
    if (!pc_) throw DomainError("model has no PC component");
    return *pc_;
  }

  /// Base psi entry for weight process U^j (j >= 1).
  const ExpConvexCov& psi_base(std::size_t j) const { return psi_[list_index(j, psi_.size())]; }
  /// Time offset of U^j: U^{j+T} runs on the clock of U^j shifted by S.
  double psi_shift(std::size_t j) const {
    return flags_.periodic_reuse ? static_cast<double>(partition_.cycle(j)) * partition_.span() : 0.0;
  }
  /// psi_j(v), including the period shift.
  double psi(std::size_t j, double v) const { return psi_base(j)(v - 2.0 * psi_shift(j)); }
  const StationaryCov& gamma(std::size_t j) const { return gamma_[list_index(j, gamma_.size())]; }

  double ls_cov(double t, double u) const {
    const std::size_t i = partition_.block_of(t);
    const std::size_t j = partition_.block_of(u);
    const std::size_t lo = std::min(i, j), hi = std::max(i, j);
    if (hi - lo >= 2) return 0.0;
    const double sum = t + u, diff = t - u;
    if (i == j) {
      double v = psi(i, sum) * gamma(i)(diff);
      if (i > 1) v += psi(i - 1, sum) * gamma(i - 1)(diff);
      return v;
    }
    return psi(lo, sum) * gamma(lo)(diff);
  }

  double xp_cov(double t, double u) const { return pc().xp_cov(t, u); }

  double total_cov(double t, double u) const {
    double v = 0.0;
    if (flags_.include_ls) v += ls_cov(t, u);
    if (flags_.include_pc) v += xp_cov(t, u);
    return v;
  }

  CovMatrix cov_matrix(std::span<const double> grid, const CovOptions& opt = {}) const {
    validate_grid(grid, opt.cap);
    CovMatrix out;
    out.grid.assign(grid.begin(), grid.end());
    const auto n = static_cast<Eigen::Index>(grid.size());
    out.values.resize(n, n);
    parallel_for(grid.size(), [&](std::size_t b, std::size_t e) {
      for (auto i = static_cast<Eigen::Index>(b); i < static_cast<Eigen::Index>(e); ++i)
        for (Eigen::Index k = 0; k < n; ++k) out.values(i, k) = total_cov(grid[i], grid[k]);
    });
    out.values = 0.5 * (out.values + out.values.transpose()).eval();
    out.trace = out.values.trace();
    out.min_eigenvalue = linalg::min_eigenvalue(out.values);
    if (out.min_eigenvalue < -opt.tol * std::abs(out.trace)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "covariance is not positive semidefinite: min eigenvalue %.6e < -%.1e * trace",
                    out.min_eigenvalue, opt.tol);
      throw NonPsdModel(buf, out.min_eigenvalue);
    }
    if (opt.repair && out.min_eigenvalue < 0.0) {
      out.values = linalg::clip_negative(out.values);
      out.trace = out.values.trace();
      out.min_eigenvalue = linalg::min_eigenvalue(out.values);
      out.repaired = true;
    }
    return out;
  }

  /// Checks ls_cov(t,u) / ls_cov(t',u') = gamma_k(t-u) / gamma_k(t'-u') for
  /// pairs with equal t+u inside a block carrying a single mixture term.
  SilvermanReport silverman_check(std::size_t block, std::span<const SilvermanPair> pairs) const {
    if (!flags_.include_ls) throw DomainError("Silverman check needs the LS component");
    if (block != 1)
      throw DomainError("Silverman check needs a block with a single active mixture term (block 1)");
    SilvermanReport rep;
    const double tol = partition_.tolerance();
    for (const auto& p : pairs) {
      for (double x : {p.t, p.u, p.t2, p.u2})
        if (partition_.block_of(x) != block)
          throw DomainError("Silverman pair point " + std::to_string(x) + " is outside block " +
                            std::to_string(block));
      if (std::abs((p.t + p.u) - (p.t2 + p.u2)) > 4.0 * tol)
        throw DomainError("Silverman pairs must share t + u");
      const double c1 = ls_cov(p.t, p.u), c2 = ls_cov(p.t2, p.u2);
      const double g1 = gamma(block)(p.t - p.u), g2 = gamma(block)(p.t2 - p.u2);
      if (std::abs(c2) < 1e-14 || std::abs(g2) < 1e-14 || std::abs(g1) < 1e-14) {
        ++rep.skipped;
        continue;
      }
      const double expected = g1 / g2;
      rep.max_deviation = std::max(rep.max_deviation, std::abs(c1 / c2 - expected) / std::abs(expected));
      ++rep.checked;
    }
    return rep;
  }

 private:
  std::size_t list_index(std::size_t j, std::size_t size) const {
    if (j == 0) throw DomainError("block indices start at 1");
    if (flags_.periodic_reuse) return partition_.phase(j);
    if (j > size)
      throw DomainError("aperiodic psi/gamma list has no entry for block " + std::to_string(j));
    return j - 1;
  }

  Partition partition_;
  std::vector<ExpConvexCov> psi_;
  std::vector<StationaryCov> gamma_;
  std::optional<IntervalMeasureCov> pc_;
  ModelFlags flags_;
};

/// Uniform grid start, start+step, ... up to stop (inclusive within step/1e9).
inline std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0)) throw DomainError("grid step must be positive");
  if (stop < start) throw DomainError("grid stop must not precede start");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

}  // namespace pcls

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcls/error.hpp"
#include "pcls/linalg.hpp"
#include "pcls/partition.hpp"

namespace pcls {

/// gamma^p_jk = sigma_{j mod T} sigma_{k mod T} rho^{|j-k|}: a diagonal scaling
/// of the AR(1) Gram matrix, so PSD and period-T by construction.
struct ParametricPc {
  std::vector<double> sigma;
  double rho = 0.0;
};

/// Explicit (K T) x (K T) block-Toeplitz covariance of the first K periods.
/// Covariances at period lags >= K are zero.
struct ExplicitPc {
  Eigen::MatrixXd base;
  std::size_t periods = 1;
};

/// Covariance array gamma^p_jk (1-based) of the period-T discrete PC sequence X^p_j.
class PCSequenceSpec {
 public:
  using Generator = std::variant<ParametricPc, ExplicitPc>;

  explicit PCSequenceSpec(ParametricPc p) : period_(p.sigma.size()), gen_(std::move(p)) {
    const auto& g = std::get<ParametricPc>(gen_);
    if (period_ == 0) throw DomainError("pc sigma must have one entry per block of the period");
    for (double s : g.sigma)
      if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("pc sigma entries must be positive");
    if (!(std::abs(g.rho) < 1.0)) throw DomainError("pc rho must lie in (-1, 1)");
    check_psd();
  }

  PCSequenceSpec(ExplicitPc e, std::size_t period) : period_(period), gen_(std::move(e)) {
    const auto& g = std::get<ExplicitPc>(gen_);
    if (period_ == 0 || g.periods == 0) throw DomainError("pc period and periods must be >= 1");
    const auto n = static_cast<Eigen::Index>(period_ * g.periods);
    if (g.base.rows() != n || g.base.cols() != n)
      throw DomainError("pc base matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    if (!g.base.allFinite()) throw DomainError("pc base matrix has non-finite entries");
    const double scale = std::max(g.base.cwiseAbs().maxCoeff(), 1e-300);
    const auto T = static_cast<Eigen::Index>(period_);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(g.base(i, j) - g.base(j, i)) > 1e-12 * scale)
          throw DomainError("pc base matrix must be symmetric");
        if (i + T < n && j + T < n && std::abs(g.base(i + T, j + T) - g.base(i, j)) > 1e-12 * scale)
          throw DomainError("pc base matrix must be periodic: entry (" + std::to_string(i + T) +
                            "," + std::to_string(j + T) + ") differs from (" + std::to_string(i) +
                            "," + std::to_string(j) + ")");
      }
    }
    check_psd();
  }

  std::size_t period() const { return period_; }
  const Generator& generator() const { return gen_; }
  bool parametric() const { return std::holds_alternative<ParametricPc>(gen_); }

  /// gamma^p_jk for j, k >= 1.
  double cov(std::size_t j, std::size_t k) const {
    if (j == 0 || k == 0) throw DomainError("pc sequence indices start at 1");
    const std::size_t a = (j - 1) % period_, b = (k - 1) % period_;
    if (const auto* p = std::get_if<ParametricPc>(&gen_)) {
      const auto lag = static_cast<double>(j > k ? j - k : k - j);
      return p->sigma[a] * p->sigma[b] * std::pow(p->rho, lag);
    }
    const auto& e = std::get<ExplicitPc>(gen_);
    const auto h = static_cast<long long>((j - 1) / period_) - static_cast<long long>((k - 1) / period_);
    if (static_cast<std::size_t>(std::llabs(h)) >= e.periods) return 0.0;
    const auto T = static_cast<long long>(period_);
    if (h >= 0) return e.base(static_cast<Eigen::Index>(h * T + static_cast<long long>(a)),
                              static_cast<Eigen::Index>(b));
    return e.base(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(-h * T + static_cast<long long>(b)));
  }

  /// [gamma^p_jk] for j, k = 1..n.
  Eigen::MatrixXd matrix(std::size_t n) const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k <= j; ++k)
        m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
            m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = cov(j + 1, k + 1);
    return m;
  }

 private:
  void check_psd() const {
    const auto rep = linalg::psd_report(matrix(4 * period_), 1e-10);
    if (!rep.pass)
      throw DomainError("pc sequence covariance is not positive semidefinite (min eigenvalue " +
                        std::to_string(rep.min_eigenvalue) + ")");
  }

  std::size_t period_;
  Generator gen_;
};

/// 2ab / (a + b): the harmonic-mean interval kernel.
inline double harmonic_kernel(double a, double b) { return 2.0 * a * b / (a + b); }

/// Covariance of the interval measures M_j over the partition blocks, and the
/// continuous-time PC covariance gamma^p(t, u) derived from it.
class IntervalMeasureCov {
 public:
  IntervalMeasureCov(Partition partition, PCSequenceSpec pcseq)
      : partition_(std::move(partition)), pcseq_(std::move(pcseq)) {
    if (partition_.period() != pcseq_.period())
      throw DomainError("pc sequence period " + std::to_string(pcseq_.period()) +
                        " differs from partition period " + std::to_string(partition_.period()));
  }

  const Partition& partition() const { return partition_; }
  const PCSequenceSpec& pcseq() const { return pcseq_; }

  /// <M_j(A), M_k(B)>. Same block: 2|A||B| / (a_j (|A| + |B|)) gamma^p_jj.
  /// Different blocks: |A||B| / (a_j a_k) gamma^p_jk.
  double measure_cov(std::size_t j, const Interval& A, std::size_t k, const Interval& B) const {
    if (!partition_.contains(j, A))
      throw DomainError("interval A is not a nonempty subinterval of block " + std::to_string(j));
    if (!partition_.contains(k, B))
      throw DomainError("interval B is not a nonempty subinterval of block " + std::to_string(k));
    const double la = A.length(), lb = B.length();
    if (j == k) return harmonic_kernel(la, lb) / partition_.length(j) * pcseq_.cov(j, j);
    return la * lb / (partition_.length(j) * partition_.length(k)) * pcseq_.cov(j, k);
  }

  /// corr(M_j(A), M_j(B)) = 2 sqrt(|A||B|) / (|A| + |B|).
  static double measure_corr(double la, double lb) { return 2.0 * std::sqrt(la * lb) / (la + lb); }

  /// gamma^p(t, u) = <M_m(s_{m-1}, t], M_n(s_{n-1}, u]>.
  double xp_cov(double t, double u) const {
    const auto ct = partition_.within_block_coord(t);
    const auto cu = partition_.within_block_coord(u);
    if (ct.block == cu.block)
      return harmonic_kernel(ct.offset, cu.offset) / partition_.length(ct.block) *
             pcseq_.cov(ct.block, ct.block);
    return ct.offset * cu.offset /
           (partition_.length(ct.block) * partition_.length(cu.block)) *
           pcseq_.cov(ct.block, cu.block);
  }

  Eigen::MatrixXd matrix(std::span<const double> grid) const {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index k = 0; k <= i; ++k) m(i, k) = m(k, i) = xp_cov(grid[i], grid[k]);
    return m;
  }

  /// Numerical check that the assembled PC covariance is PSD on `grid`.
  PsdReport global_psd_check(std::span<const double> grid, double tol) const {
    if (tol < 0.0) throw DomainError("tolerance must be nonnegative");
    return linalg::psd_report(matrix(grid), tol);
  }

 private:
  Partition partition_;
  PCSequenceSpec pcseq_;
};

/// M_j represented on a grid of block j: cell edges e_0 < e_1 < ... < e_n
/// (e_0 = s_{j-1}) and the increment M_j(e_{i-1}, e_i] of each cell.
struct MeasureGrid {
  std::size_t block = 0;
  std::vector<double> edges;
  std::vector<double> increments;

  /// Total mass over all cells, i.e. M_j(e_0, e_n].
  double value() const { return linalg::pairwise_sum(increments); }

  /// M_j(e_0, e_i] for each edge i >= 1.
  std::vector<double> cumulative() const {
    std::vector<double> c(increments.size());
    double s = 0.0;
    for (std::size_t i = 0; i < increments.size(); ++i) c[i] = (s += increments[i]);
    return c;
  }

  /// Build from cumulative values M_j(e_0, e_i], i = 1..n (first differences).
  static MeasureGrid from_cumulative(std::size_t block, std::vector<double> edges,
                                     std::span<const double> cumulative) {
    if (edges.size() != cumulative.size() + 1)
      throw DomainError("measure grid needs one more edge than cumulative values");
    MeasureGrid g{block, std::move(edges), {}};
    g.increments.resize(cumulative.size());
    double prev = 0.0;
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      g.increments[i] = cumulative[i] - prev;
      prev = cumulative[i];
    }
    return g;
  }
};

namespace detail {

inline std::size_t aligned_edge(const MeasureGrid& g, double x, double tol) {
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (std::abs(g.edges[i] - x) <= tol) return i;
  throw AlignmentError("interval endpoint " + std::to_string(x) + " is not a grid cell edge");
}

}  // namespace detail

/// Orthogonal projection P_A: keep the increments of cells inside A, zero the
/// rest. value() of the result is M_j(A).
inline MeasureGrid project(const MeasureGrid& g, const Interval& A) {
  if (g.edges.size() < 2) throw DomainError("measure grid has no cells");
  const double tol = 1e-12 * std::max({1.0, std::abs(g.edges.front()), std::abs(g.edges.back())});
  if (!(A.hi > A.lo)) throw DomainError("projection interval must be nonempty");
  if (A.lo < g.edges.front() - tol || A.hi > g.edges.back() + tol)
    throw DomainError("projection interval leaves the represented part of the block");
  const std::size_t lo = detail::aligned_edge(g, A.lo, tol);
  const std::size_t hi = detail::aligned_edge(g, A.hi, tol);
  MeasureGrid out = g;
  for (std::size_t c = 0; c < out.increments.size(); ++c)
    if (c < lo || c >= hi) out.increments[c] = 0.0;
  return out;
}

/// P_A P_B, which equals P_{A cap B}.
inline MeasureGrid project(const MeasureGrid& g, const Interval& A, const Interval& B) {
  return project(project(g, B), A);
}

}  // namespace pcls

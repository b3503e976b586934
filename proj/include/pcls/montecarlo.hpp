#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pcls/error.hpp"
#include "pcls/excov.hpp"
#include "pcls/linalg.hpp"
#include "pcls/model.hpp"
#include "pcls/parallel.hpp"
#include "pcls/pc_component.hpp"

namespace pcls {

enum class SimulationMethod { JointFactorization, ComponentWise };

inline const char* to_string(SimulationMethod m) {
  return m == SimulationMethod::JointFactorization ? "joint_factorization" : "component_wise";
}

inline SimulationMethod parse_method(const std::string& s) {
  if (s == "joint_factorization" || s == "joint") return SimulationMethod::JointFactorization;
  if (s == "component_wise" || s == "component") return SimulationMethod::ComponentWise;
  throw DomainError("unknown simulation method '" + s + "'");
}

struct SimulationOptions {
  bool repair = false;
  double tol = 1e-8;
  std::size_t threads = 0;  ///< 0: PCLS_THREADS or hardware concurrency
};

using PathMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N sample paths on a grid; row p is path p.
struct Ensemble {
  std::vector<double> grid;
  PathMatrix paths;
  std::uint64_t seed = 0;
  std::string fingerprint;
  SimulationMethod method = SimulationMethod::JointFactorization;

  std::size_t n_paths() const { return static_cast<std::size_t>(paths.rows()); }
};

/// Independent stream for path p; depends only on (seed, p).
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

namespace detail {

inline void fnv1a(std::uint64_t& h, const std::string& s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// 16-hex-digit FNV-1a hash of a canonical text form of every model parameter.
inline std::string model_fingerprint(const PCLSModel& m) {
  std::string text = "pcls:1;lengths";
  for (double a : m.partition().lengths()) text += "," + detail::num(a);
  text += ";flags," + std::to_string(m.flags().include_ls) + std::to_string(m.flags().include_pc) +
          std::to_string(m.flags().periodic_reuse);
  if (m.flags().include_ls) {
    for (const auto& p : m.psi_list()) {
      if (p.simulatable()) {
        text += ";psi:mix";
        for (std::size_t i = 0; i < p.mixture().weights.size(); ++i)
          text += "," + detail::num(p.mixture().weights[i]) + "@" + detail::num(p.mixture().rates[i]);
      } else {
        text += ";psi:" + p.name();
      }
    }
    for (const auto& g : m.gamma_list()) {
      text += ";gamma:" + g.family_name();
      std::visit(
          [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Exponential>) text += "," + detail::num(f.theta) + "," + detail::num(f.sigma2);
            else if constexpr (std::is_same_v<F, SquaredExp>) text += "," + detail::num(f.ell) + "," + detail::num(f.sigma2);
            else
              for (std::size_t r = 0; r < f.masses.size(); ++r)
                text += "," + detail::num(f.masses[r]) + "@" + detail::num(f.frequencies[r]);
          },
          g.family());
    }
  }
  if (m.has_pc()) {
    const auto& gen = m.pc().pcseq().generator();
    if (const auto* p = std::get_if<ParametricPc>(&gen)) {
      text += ";pc:sigma";
      for (double s : p->sigma) text += "," + detail::num(s);
      text += ";rho," + detail::num(p->rho);
    } else {
      const auto& e = std::get<ExplicitPc>(gen);
      text += ";pc:base," + std::to_string(e.periods);
      for (Eigen::Index i = 0; i < e.base.size(); ++i) text += "," + detail::num(e.base.data()[i]);
    }
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  detail::fnv1a(h, text);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

/// Precomputed factors for the constructive (component-wise) sampler.
struct ComponentPlan {
  struct Weight {
    std::size_t index;      // j of U^j
    const ExpConvexCov* psi;
    double shift;           // U^j is evaluated at t - shift
  };
  struct Stationary {
    std::size_t index;      // j of Y_j
    std::vector<std::size_t> points;  // grid indices in B_j u B_{j+1}
    Eigen::MatrixXd factor;
  };
  struct PcBlock {
    std::size_t block;
    std::vector<std::size_t> points;  // grid indices in the block
  };

  std::vector<std::size_t> blocks;  // block of each grid point
  std::vector<Weight> weights;
  std::vector<Stationary> stationary;
  std::vector<PcBlock> pc_blocks;
  Eigen::MatrixXd pc_factor;
};

inline ComponentPlan plan_components(const PCLSModel& m, std::span<const double> grid,
                                     const SimulationOptions& opt) {
  ComponentPlan plan;
  const auto& part = m.partition();
  for (double t : grid) plan.blocks.push_back(part.block_of(t));

  if (m.flags().include_ls) {
    std::vector<std::size_t> idx;
    for (std::size_t b : plan.blocks) {
      idx.push_back(b);
      if (b > 1) idx.push_back(b - 1);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (std::size_t j : idx) {
      const auto& psi = m.psi_base(j);
      if (!psi.simulatable())
        throw UnsupportedMethod("component_wise simulation needs Laplace-mixture psi; psi for U^" +
                                std::to_string(j) + " is closed-form '" + psi.name() + "'");
      plan.weights.push_back({j, &psi, m.psi_shift(j)});
      ComponentPlan::Stationary st{j, {}, {}};
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (plan.blocks[i] == j || plan.blocks[i] == j + 1) st.points.push_back(i);
      const auto n = static_cast<Eigen::Index>(st.points.size());
      Eigen::MatrixXd c(n, n);
      for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) c(a, b) = m.gamma(j)(grid[st.points[a]] - grid[st.points[b]]);
      st.factor = linalg::sqrt_factor(c);
      plan.stationary.push_back(std::move(st));
    }
  }

  if (m.flags().include_pc) {
    const auto rep = m.pc().global_psd_check(grid, opt.tol);
    if (!rep.pass) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "PC component covariance is not positive semidefinite on this grid "
                    "(min eigenvalue %.6e, trace %.6e); component_wise cannot realize it",
                    rep.min_eigenvalue, rep.trace);
      throw NonPsdModel(buf, rep.min_eigenvalue);
    }
    plan.pc_factor = linalg::sqrt_factor(m.pc().matrix(grid));
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (plan.pc_blocks.empty() || plan.pc_blocks.back().block != plan.blocks[i])
        plan.pc_blocks.push_back({plan.blocks[i], {}});
      plan.pc_blocks.back().points.push_back(i);
    }
  }
  return plan;
}

}  // namespace detail

/// Draws per-block interval measures M_j on the grid cells of each block
/// touched by `grid`: cumulative values M_j(s_{j-1}, t_i] from the PC
/// covariance, then first differences.
template <class Urbg>
std::vector<MeasureGrid> sample_pc_measures(const PCLSModel& m, std::span<const double> grid,
                                            const Eigen::MatrixXd& factor,
                                            std::span<const std::size_t> blocks, Urbg& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(factor.cols());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  const Eigen::VectorXd cum = factor * z;
  std::vector<MeasureGrid> out;
  std::size_t i = 0;
  while (i < grid.size()) {
    const std::size_t b = blocks[i];
    std::vector<double> edges{m.partition().left(b)};
    std::vector<double> values;
    for (; i < grid.size() && blocks[i] == b; ++i) {
      edges.push_back(grid[i]);
      values.push_back(cum(static_cast<Eigen::Index>(i)));
    }
    out.push_back(MeasureGrid::from_cumulative(b, std::move(edges), values));
  }
  return out;
}

/// Gaussian sample paths of the model on `grid`.
///
/// joint_factorization factors the full covariance matrix. component_wise
/// builds X^ls from shared weight realizations U^j times stationary draws Y_j
/// and X^p from sampled interval measures, then sums.
inline Ensemble simulate(const PCLSModel& m, std::span<const double> grid, std::size_t n_paths,
                         std::uint64_t seed, SimulationMethod method,
                         const SimulationOptions& opt = {}) {
  if (n_paths == 0) throw DomainError("n_paths must be >= 1");
  validate_grid(grid);
  Ensemble e;
  e.grid.assign(grid.begin(), grid.end());
  e.seed = seed;
  e.method = method;
  e.fingerprint = model_fingerprint(m);
  const auto n = static_cast<Eigen::Index>(grid.size());
  e.paths.resize(static_cast<Eigen::Index>(n_paths), n);

  if (method == SimulationMethod::JointFactorization) {
    const auto cov = m.cov_matrix(grid, CovOptions{opt.repair, opt.tol});
    const Eigen::MatrixXd L = linalg::sqrt_factor(cov.values);
    parallel_for(
        n_paths,
        [&](std::size_t b, std::size_t end) {
          Eigen::VectorXd z(n);
          for (std::size_t p = b; p < end; ++p) {
            auto rng = path_stream(seed, p);
            std::normal_distribution<double> normal;
            for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
            e.paths.row(static_cast<Eigen::Index>(p)) = (L * z).transpose();
          }
        },
        opt.threads);
    return e;
  }

  const auto plan = detail::plan_components(m, grid, opt);
  parallel_for(
      n_paths,
      [&](std::size_t b, std::size_t end) {
        for (std::size_t p = b; p < end; ++p) {
          auto rng = path_stream(seed, p);
          std::normal_distribution<double> normal;
          Eigen::VectorXd x = Eigen::VectorXd::Zero(n);

          if (m.flags().include_ls) {
            // One realization of U^j per path, shared by B_j and B_{j+1}.
            std::vector<WeightProcessRealization> U;
            U.reserve(plan.weights.size());
            for (const auto& w : plan.weights) U.push_back(sample_weight_process(*w.psi, rng));
            for (std::size_t s = 0; s < plan.stationary.size(); ++s) {
              const auto& st = plan.stationary[s];
              Eigen::VectorXd z(st.factor.cols());
              for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
              const Eigen::VectorXd y = st.factor * z;
              for (std::size_t a = 0; a < st.points.size(); ++a) {
                const std::size_t gi = st.points[a];
                x(static_cast<Eigen::Index>(gi)) +=
                    U[s](grid[gi] - plan.weights[s].shift) * y(static_cast<Eigen::Index>(a));
              }
            }
          }

          if (m.flags().include_pc) {
            const auto measures = sample_pc_measures(m, grid, plan.pc_factor, plan.blocks, rng);
            std::size_t gi = 0;
            for (const auto& mg : measures)
              for (std::size_t c = 1; c < mg.edges.size(); ++c, ++gi)
                x(static_cast<Eigen::Index>(gi)) += project(mg, {mg.edges.front(), mg.edges[c]}).value();
          }
          e.paths.row(static_cast<Eigen::Index>(p)) = x.transpose();
        }
      },
      opt.threads);
  return e;
}

struct CovEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Sample mean of path_i * path_k (no mean subtraction) and its standard error.
inline CovEstimate empirical_cov(const Ensemble& e, std::size_t i, std::size_t k) {
  const std::size_t N = e.n_paths();
  if (N < 2) throw DomainError("empirical covariance needs at least two paths");
  if (i >= e.grid.size() || k >= e.grid.size()) throw DomainError("grid index out of range");
  std::vector<double> prod(N);
  for (std::size_t p = 0; p < N; ++p)
    prod[p] = e.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)) *
              e.paths(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
  const double mean = linalg::pairwise_sum(prod) / static_cast<double>(N);
  for (double& v : prod) v = (v - mean) * (v - mean);
  const double var = linalg::pairwise_sum(prod) / static_cast<double>(N - 1);
  return {mean, std::sqrt(var / static_cast<double>(N))};
}

struct McEntry {
  std::size_t i = 0, k = 0;
  double t = 0.0, u = 0.0;
  double estimate = 0.0, standard_error = 0.0, expected = 0.0, z = 0.0;
};

struct McReport {
  std::size_t pairs_checked = 0;
  std::size_t failures = 0;      ///< |z| > z threshold
  std::size_t within_3se = 0;
  double max_abs_z = 0.0;
  double z_threshold = 4.0;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;
  SimulationMethod method = SimulationMethod::JointFactorization;
  std::string fingerprint;
  std::vector<McEntry> entries;
};

/// Compares an ensemble's empirical covariances to total_cov on every grid
/// pair (i <= k), or on a seeded subsample of 500 pairs for larger grids.
inline McReport mc_compare(const PCLSModel& m, const Ensemble& e, double z) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < e.grid.size(); ++i)
    for (std::size_t k = i; k < e.grid.size(); ++k) pairs.emplace_back(i, k);
  constexpr std::size_t kMaxPairs = 500;
  if (pairs.size() > kMaxPairs) {
    std::mt19937_64 rng(e.seed ^ 0x9e3779b97f4a7c15ULL);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(kMaxPairs);
    std::sort(pairs.begin(), pairs.end());
  }
  McReport rep;
  rep.z_threshold = z;
  rep.n_paths = e.n_paths();
  rep.seed = e.seed;
  rep.method = e.method;
  rep.fingerprint = e.fingerprint;
  for (auto [i, k] : pairs) {
    const auto est = empirical_cov(e, i, k);
    McEntry en{i, k, e.grid[i], e.grid[k], est.estimate, est.standard_error,
               m.total_cov(e.grid[i], e.grid[k]), 0.0};
    const double diff = en.estimate - en.expected;
    if (en.standard_error > 0.0) en.z = diff / en.standard_error;
    else en.z = std::abs(diff) <= 1e-12 * (1.0 + std::abs(en.expected)) ? 0.0 : std::numeric_limits<double>::infinity();
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(en.z));
    if (std::abs(en.z) > z) ++rep.failures;
    if (std::abs(en.z) <= 3.0) ++rep.within_3se;
    rep.entries.push_back(en);
  }
  rep.pairs_checked = rep.entries.size();
  return rep;
}

inline McReport mc_check(const PCLSModel& m, std::span<const double> grid, std::size_t n_paths,
                         std::uint64_t seed, double z,
                         SimulationMethod method = SimulationMethod::JointFactorization,
                         const SimulationOptions& opt = {}) {
  if (n_paths < 2) throw DomainError("mc_check needs at least two paths");
  return mc_compare(m, simulate(m, grid, n_paths, seed, method, opt), z);
}

}  // namespace pcls

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pcls/error.hpp"
#include "pcls/model.hpp"
#include "pcls/pc_component.hpp"
#include "pcls/stationary.hpp"

namespace pcls {

using cplx = std::complex<double>;

/// How the second spectral argument enters the reconstructed phase.
/// ConjugateSecond: <a, b> = E[a conj(b)], giving the PC phase
/// e^{i lambda (m - n)/T}. Unconjugated: the unconjugated kernel
/// e^{i m/T (lambda + omega) - i (lambda t + omega u)} with the bilinear product.
enum class PhaseConvention { ConjugateSecond, Unconjugated };

inline const char* to_string(PhaseConvention c) {
  return c == PhaseConvention::ConjugateSecond ? "conjugate_second" : "unconjugated";
}

struct DiscreteSpectralGrid {
  /// Overrides the per-family default grid of density families when set.
  std::optional<FrequencyGrid> ls;
  /// Points R of the uniform PC grid lambda_r = 2 pi r / R on [0, 2pi).
  /// Raised automatically when the lift needs more resolution.
  std::size_t pc_points = 128;
};

struct SpectralMass {
  double lambda = 0.0;
  cplx mass{0.0, 0.0};
};

/// Discrete masses theta_jk(lambda_r) of the PC sequence on [0, 2pi) with
/// sum_r e^{i lambda_r (j-k)/T} theta_jk(lambda_r) = gamma^p_jk.
/// Masses depend on (j, k) only through their residues mod T.
class PcSpectralLift {
 public:
  PcSpectralLift(std::size_t period, std::size_t points, std::vector<cplx> masses)
      : period_(period), points_(points), masses_(std::move(masses)) {}

  std::size_t period() const { return period_; }
  std::size_t points() const { return points_; }
  double frequency(std::size_t r) const {
    return 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(points_);
  }

  /// theta_jk(lambda_r), j, k >= 1.
  cplx mass(std::size_t j, std::size_t k, std::size_t r) const {
    return masses_[index((j - 1) % period_, (k - 1) % period_, r)];
  }

  cplx reconstruct(std::size_t j, std::size_t k) const {
    const double lag = (static_cast<double>(j) - static_cast<double>(k)) / static_cast<double>(period_);
    cplx s{0.0, 0.0};
    for (std::size_t r = 0; r < points_; ++r) s += std::polar(1.0, frequency(r) * lag) * mass(j, k, r);
    return s;
  }

  /// T x T Hermitian matrix [theta_ab(lambda_r)].
  Eigen::MatrixXcd matrix_at(std::size_t r) const {
    const auto T = static_cast<Eigen::Index>(period_);
    Eigen::MatrixXcd m(T, T);
    for (Eigen::Index a = 0; a < T; ++a)
      for (Eigen::Index b = 0; b < T; ++b)
        m(a, b) = masses_[index(static_cast<std::size_t>(a), static_cast<std::size_t>(b), r)];
    return m;
  }

  double residual = 0.0;          ///< max |reconstruct - gamma^p| over verified indices
  std::size_t verified_periods = 0;

 private:
  std::size_t index(std::size_t a, std::size_t b, std::size_t r) const {
    return (a * period_ + b) * points_ + r;
  }

  std::size_t period_;
  std::size_t points_;
  std::vector<cplx> masses_;
};

namespace detail {

/// AR(1) spectral density on [0, 2pi): (1 - rho^2) / (2 pi |1 - rho e^{-i nu}|^2).
inline double ar1_density(double rho, double nu) {
  return (1.0 - rho * rho) / (2.0 * std::numbers::pi * (1.0 - 2.0 * rho * std::cos(nu) + rho * rho));
}

}  // namespace detail

/// Spectral lift of the PC sequence through its T-variate stationary
/// (Gladyshev) form. `periods` is the number K of periods over which the round
/// trip is verified (indices j, k <= K T).
inline PcSpectralLift pc_spectral_lift(const PCSequenceSpec& pcseq, std::size_t pc_points,
                                       std::size_t periods) {
  using std::numbers::pi;
  const std::size_t T = pcseq.period();
  if (periods == 0) throw DomainError("lift needs at least one period");
  std::size_t R = std::max<std::size_t>(pc_points, 1);
  std::vector<cplx> masses;

  if (const auto* p = std::get_if<ParametricPc>(&pcseq.generator())) {
    // Folding the per-index density f_rho onto lambda in [0, 2pi) (nu = (lambda + 2 pi l)/T)
    // turns the round trip into an RT-point periodic trapezoid: aliasing ~ rho^{RT - |n|}.
    const double arho = std::abs(p->rho);
    if (arho > 0.0) {
      const double extra = std::log(1e-13 * (1.0 - arho)) / std::log(arho);
      const auto need = static_cast<std::size_t>(
          std::ceil((static_cast<double>(periods * T) + extra) / static_cast<double>(T)));
      R = std::max(R, need);
    }
    masses.resize(T * T * R);
    const double w = 2.0 * pi / static_cast<double>(R * T);
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b)
        for (std::size_t r = 0; r < R; ++r) {
          const double lam = 2.0 * pi * static_cast<double>(r) / static_cast<double>(R);
          cplx s{0.0, 0.0};
          for (std::size_t l = 0; l < T; ++l) {
            const double nu = (lam + 2.0 * pi * static_cast<double>(l)) / static_cast<double>(T);
            const double ph = 2.0 * pi * static_cast<double>(l) *
                              (static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(T);
            s += std::polar(detail::ar1_density(p->rho, nu), ph);
          }
          masses[(a * T + b) * R + r] = p->sigma[a] * p->sigma[b] * w * s;
        }
  } else {
    // Finite lag support |h| <= K_base - 1: an exact block DFT once R >= K + K_base - 1.
    const auto& e = std::get<ExplicitPc>(pcseq.generator());
    const std::size_t kb = e.periods;
    R = std::max(R, periods + kb - 1);
    masses.resize(T * T * R);
    const auto H = static_cast<long long>(kb) - 1;
    for (std::size_t a = 0; a < T; ++a)
      for (std::size_t b = 0; b < T; ++b)
        for (std::size_t r = 0; r < R; ++r) {
          const double lam = 2.0 * pi * static_cast<double>(r) / static_cast<double>(R);
          cplx g{0.0, 0.0};
          for (long long h = -H; h <= H; ++h) {
            const std::size_t j = a + 1 + static_cast<std::size_t>(std::max(h, 0LL)) * T;
            const std::size_t k = b + 1 + static_cast<std::size_t>(std::max(-h, 0LL)) * T;
            g += pcseq.cov(j, k) * std::polar(1.0, -lam * static_cast<double>(h));
          }
          const double shift = -lam * (static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(T);
          masses[(a * T + b) * R + r] = std::polar(1.0, shift) * g / static_cast<double>(R);
        }
  }

  PcSpectralLift lift(T, R, std::move(masses));

  // Every lift matrix must be PSD; a negative direction means the sequence is
  // not a valid covariance on all of Z.
  double total_trace = 0.0;
  for (std::size_t r = 0; r < R; ++r) total_trace += lift.matrix_at(r).trace().real();
  for (std::size_t r = 0; r < R; ++r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(lift.matrix_at(r), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("lift eigensolver did not converge");
    if (es.eigenvalues().minCoeff() < -1e-10 * std::abs(total_trace))
      throw DomainError("pc sequence is not positive semidefinite on Z: lift eigenvalue " +
                        std::to_string(es.eigenvalues().minCoeff()) + " at lambda_" + std::to_string(r));
  }

  const std::size_t n = periods * T;
  double max_gamma = 0.0, residual = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    for (std::size_t k = 1; k <= n; ++k) {
      const double g = pcseq.cov(j, k);
      max_gamma = std::max(max_gamma, std::abs(g));
      residual = std::max(residual, std::abs(lift.reconstruct(j, k) - g));
    }
  lift.residual = residual;
  lift.verified_periods = periods;
  if (residual > 1e-8 * max_gamma) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "pc spectral lift residual %.3e exceeds 1e-8 * max|gamma^p|", residual);
    throw NumericError(buf);
  }
  return lift;
}

/// Frequency-domain view of a PCLSModel: the F (LS) and Theta (PC) kernels of
/// the time-varying spectral measure and the covariance rebuilt from them.
class SpectralModel {
 public:
  /// Reconstruction is available for 0 < t, u <= horizon (default 2S).
  explicit SpectralModel(const PCLSModel& model, DiscreteSpectralGrid grid = {}, double horizon = 0.0)
      : model_(model), grid_(grid) {
    const auto& part = model_.partition();
    horizon_ = horizon > 0.0 ? horizon : 2.0 * part.span();
    if (model_.flags().include_ls) {
      double max_len = 0.0;
      for (double a : part.lengths()) max_len = std::max(max_len, a);
      const double max_lag = 2.0 * max_len;
      for (const auto& g : model_.gamma_list())
        measures_.push_back(grid_.ls && !g.atomic() ? g.spectral_measure(*grid_.ls)
                                                    : g.default_spectral_measure(max_lag));
    }
    if (model_.flags().include_pc) {
      const auto periods = static_cast<std::size_t>(std::ceil(horizon_ / part.span())) + 1;
      lift_.emplace(pc_spectral_lift(model_.pc().pcseq(), grid_.pc_points, periods));
    }
  }

  const PCLSModel& model() const { return model_; }
  double horizon() const { return horizon_; }
  const std::optional<PcSpectralLift>& lift() const { return lift_; }

  /// G_j on its frequency nodes.
  const DiscreteSpectralMeasure& G(std::size_t j) const {
    if (measures_.empty()) throw DomainError("model has no LS component");
    const std::size_t idx = model_.flags().periodic_reuse ? model_.partition().phase(j) : j - 1;
    if (idx >= measures_.size()) throw DomainError("no spectral measure for block " + std::to_string(j));
    return measures_[idx];
  }

  /// F_jk(lambda, lambda, t, u) masses; F vanishes off the frequency diagonal
  /// and for |j - k| > 1, so only diagonal masses are ever produced.
  std::vector<SpectralMass> F_kernel(std::size_t j, std::size_t k, double t, double u) const {
    check_blocks(j, k, t, u);
    std::vector<SpectralMass> out;
    if (!model_.flags().include_ls) return out;
    const auto append = [&](std::size_t idx) {
      const double w = model_.psi(idx, t + u);
      const auto& g = G(idx);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const auto nd = g.node(i);
        out.push_back({nd.lambda, cplx(w * nd.mass, 0.0)});
      }
    };
    if (j == k) {
      if (j > 1) append(j - 1);
      append(j);
    } else if (j + 1 == k) {
      append(j);
    } else if (k + 1 == j) {
      append(j - 1);
    }
    return out;
  }

  /// Theta_jk(lambda_r, lambda_r, t, u): theta_jk scaled by the harmonic-mean
  /// factor (j = k) or the product factor (j != k).
  std::vector<SpectralMass> theta_kernel(std::size_t j, std::size_t k, double t, double u) const {
    check_blocks(j, k, t, u);
    std::vector<SpectralMass> out;
    if (!lift_) return out;
    const double scale = pc_scale(j, k, t, u);
    out.reserve(lift_->points());
    for (std::size_t r = 0; r < lift_->points(); ++r)
      out.push_back({lift_->frequency(r), scale * lift_->mass(j, k, r)});
    return out;
  }

  /// Covariance rebuilt from the spectral kernels; complex before the
  /// real-model check.
  cplx reconstruct(double t, double u,
                   PhaseConvention conv = PhaseConvention::ConjugateSecond) const {
    check_time(t);
    check_time(u);
    const auto& part = model_.partition();
    const std::size_t m = part.block_of(t), n = part.block_of(u);
    cplx total{0.0, 0.0};
    if (model_.flags().include_ls && (m > n ? m - n : n - m) <= 1) {
      // sum_lambda e^{i lambda t} conj(e^{i lambda u}) F_mn(lambda): each G_idx
      // contributes psi_idx(t+u) * sum_lambda G_idx(lambda) e^{i lambda (t-u)}.
      const auto add = [&](std::size_t idx) { total += model_.psi(idx, t + u) * G(idx).transform(t - u); };
      if (m == n) {
        if (m > 1) add(m - 1);
        add(m);
      } else {
        add(std::min(m, n));
      }
    }
    if (lift_) {
      const double T = static_cast<double>(part.period());
      const double scale = pc_scale(m, n, t, u);
      const double mt = static_cast<double>(m) / T, nt = static_cast<double>(n) / T;
      cplx s{0.0, 0.0};
      for (std::size_t r = 0; r < lift_->points(); ++r) {
        const double lam = lift_->frequency(r);
        cplx phase;
        if (conv == PhaseConvention::ConjugateSecond) {
          // e^{i l t} conj(e^{i l u}) e^{i l (m/T - t)} conj(e^{i l (n/T - u)})
          phase = std::polar(1.0, lam * t) * std::conj(std::polar(1.0, lam * u)) *
                  std::polar(1.0, lam * (mt - t)) * std::conj(std::polar(1.0, lam * (nt - u)));
        } else {
          // e^{i l t} e^{i l u} e^{i m/T (l + l) - i (l t + l u)}
          phase = std::polar(1.0, lam * t) * std::polar(1.0, lam * u) *
                  std::polar(1.0, mt * 2.0 * lam - (lam * t + lam * u));
        }
        s += phase * lift_->mass(m, n, r);
      }
      total += scale * s;
    }
    return total;
  }

  /// Real covariance; the imaginary residue must stay below 1e-10 (1 + |value|).
  double reconstruct_cov(double t, double u) const {
    const cplx z = reconstruct(t, u);
    if (std::abs(z.imag()) > 1e-10 * (1.0 + std::abs(z.real()))) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "reconstruction at (%g, %g) has imaginary residue %.3e", t, u, z.imag());
      throw NumericError(buf);
    }
    return z.real();
  }

  /// True when every stationary part has an atomic spectrum (no quadrature error).
  bool atomic() const {
    if (!model_.flags().include_ls) return true;
    return std::all_of(model_.gamma_list().begin(), model_.gamma_list().end(),
                       [](const StationaryCov& g) { return g.atomic(); });
  }

 private:
  double pc_scale(std::size_t j, std::size_t k, double t, double u) const {
    const auto& part = model_.partition();
    const double at = part.within_block_coord(t).offset, au = part.within_block_coord(u).offset;
    if (j == k) return harmonic_kernel(at, au) / part.length(j);
    return at * au / (part.length(j) * part.length(k));
  }

  void check_time(double t) const {
    if (!(t > 0.0) || t > horizon_ * (1.0 + 1e-12))
      throw DomainError("time " + std::to_string(t) + " outside the spectral horizon (0, " +
                        std::to_string(horizon_) + "]");
  }

  void check_blocks(std::size_t j, std::size_t k, double t, double u) const {
    check_time(t);
    check_time(u);
    const auto& part = model_.partition();
    if (part.block_of(t) != j) throw DomainError("t = " + std::to_string(t) + " is not in block " + std::to_string(j));
    if (part.block_of(u) != k) throw DomainError("u = " + std::to_string(u) + " is not in block " + std::to_string(k));
  }

  PCLSModel model_;
  DiscreteSpectralGrid grid_;
  double horizon_ = 0.0;
  std::vector<DiscreteSpectralMeasure> measures_;
  std::optional<PcSpectralLift> lift_;
};

}  // namespace pcls

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "pcls/error.hpp"

namespace pcls {

/// Symmetric uniform frequency grid on [-half_width, half_width].
struct FrequencyGrid {
  double half_width = 0.0;
  double step = 0.0;

  std::size_t size() const {
    return static_cast<std::size_t>(std::llround(2.0 * half_width / step)) + 1;
  }
};

struct SpectralNode {
  double lambda = 0.0;
  double mass = 0.0;
};

/// Finite spectral measure made of free atoms plus an optional uniform run of
/// weighted quadrature nodes. Mixed models concatenate both kinds.
class DiscreteSpectralMeasure {
 public:
  DiscreteSpectralMeasure() = default;

  static DiscreteSpectralMeasure atoms(std::vector<SpectralNode> nodes) {
    DiscreteSpectralMeasure m;
    m.atoms_ = std::move(nodes);
    return m;
  }

  static DiscreteSpectralMeasure uniform(double start, double step, std::vector<double> masses) {
    DiscreteSpectralMeasure m;
    m.start_ = start;
    m.step_ = step;
    m.uniform_ = std::move(masses);
    return m;
  }

  std::size_t size() const { return atoms_.size() + uniform_.size(); }
  bool empty() const { return size() == 0; }
  bool atomic() const { return uniform_.empty(); }

  SpectralNode node(std::size_t i) const {
    if (i < atoms_.size()) return atoms_[i];
    i -= atoms_.size();
    return {start_ + static_cast<double>(i) * step_, uniform_[i]};
  }

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.mass;
    for (double m : uniform_) s += m;
    return s;
  }

  /// sum_k G(lambda_k) e^{i lambda_k tau}. The uniform run uses a phase
  /// recurrence re-anchored every kChunk nodes.
  std::complex<double> transform(double tau) const {
    std::complex<double> acc{0.0, 0.0};
    for (const auto& a : atoms_) acc += a.mass * std::polar(1.0, a.lambda * tau);
    if (uniform_.empty()) return acc;
    constexpr std::size_t kChunk = 1024;
    const std::complex<double> rot = std::polar(1.0, step_ * tau);
    for (std::size_t c = 0; c < uniform_.size(); c += kChunk) {
      const std::size_t end = std::min(uniform_.size(), c + kChunk);
      std::complex<double> z = std::polar(1.0, (start_ + static_cast<double>(c) * step_) * tau);
      double re = 0.0, im = 0.0;
      for (std::size_t k = c; k < end; ++k) {
        re += uniform_[k] * z.real();
        im += uniform_[k] * z.imag();
        z *= rot;
      }
      acc += std::complex<double>(re, im);
    }
    return acc;
  }

 private:
  std::vector<SpectralNode> atoms_;
  double start_ = 0.0;
  double step_ = 0.0;
  std::vector<double> uniform_;
};

/// gamma(tau) = sigma2 e^{-theta |tau|}; spectral density sigma2 (theta/pi) / (theta^2 + lambda^2).
struct Exponential {
  double theta = 1.0;
  double sigma2 = 1.0;
};

/// gamma(tau) = sigma2 e^{-tau^2 / (2 ell^2)}; spectral density sigma2 ell / sqrt(2 pi) e^{-ell^2 lambda^2 / 2}.
struct SquaredExp {
  double ell = 1.0;
  double sigma2 = 1.0;
};

/// gamma(tau) = sum_r p_r cos(omega_r tau); atoms p_r/2 at +-omega_r.
struct CosineMixture {
  std::vector<double> masses;
  std::vector<double> frequencies;
};

/// Stationary covariance with a closed-form spectral (Bochner) pair.
class StationaryCov {
 public:
  using Family = std::variant<Exponential, SquaredExp, CosineMixture>;

  StationaryCov(Family f) : family_(std::move(f)) { validate(); }  // NOLINT: implicit by intent
  template <class F>
    requires(!std::is_same_v<std::decay_t<F>, Family> && std::is_constructible_v<Family, F>)
  StationaryCov(F f) : StationaryCov(Family(std::move(f))) {}  // NOLINT

  const Family& family() const { return family_; }
  bool atomic() const { return std::holds_alternative<CosineMixture>(family_); }

  std::string family_name() const {
    switch (family_.index()) {
      case 0: return "exponential";
      case 1: return "squared_exponential";
      default: return "cosine_mixture";
    }
  }

  double operator()(double tau) const { return eval(tau); }

  double eval(double tau) const {
    return std::visit(
        [tau](const auto& f) -> double {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Exponential>) {
            return f.sigma2 * std::exp(-f.theta * std::abs(tau));
          } else if constexpr (std::is_same_v<F, SquaredExp>) {
            return f.sigma2 * std::exp(-tau * tau / (2.0 * f.ell * f.ell));
          } else {
            double s = 0.0;
            for (std::size_t r = 0; r < f.masses.size(); ++r)
              s += f.masses[r] * std::cos(f.frequencies[r] * tau);
            return s;
          }
        },
        family_);
  }

  double variance() const { return eval(0.0); }

  /// Spectral density at lambda (density families only).
  double density(double lambda) const {
    using std::numbers::pi;
    if (const auto* e = std::get_if<Exponential>(&family_))
      return e->sigma2 * (e->theta / pi) / (e->theta * e->theta + lambda * lambda);
    if (const auto* s = std::get_if<SquaredExp>(&family_))
      return s->sigma2 * s->ell / std::sqrt(2.0 * pi) *
             std::exp(-0.5 * s->ell * s->ell * lambda * lambda);
    throw DomainError("cosine mixture has no spectral density");
  }

  /// Analytic spectral mass outside [-half_width, half_width].
  double tail_mass(double half_width) const {
    using std::numbers::pi;
    if (const auto* e = std::get_if<Exponential>(&family_))
      return e->sigma2 * (1.0 - 2.0 / pi * std::atan(half_width / e->theta));
    if (const auto* s = std::get_if<SquaredExp>(&family_))
      return s->sigma2 * std::erfc(s->ell * half_width / std::sqrt(2.0));
    const auto& c = std::get<CosineMixture>(family_);
    double t = 0.0;
    for (std::size_t r = 0; r < c.masses.size(); ++r)
      if (c.frequencies[r] > half_width) t += c.masses[r];
    return t;
  }

  /// Default grid: tail mass below 1e-6 gamma(0) and a step fine enough that
  /// trapezoid aliasing at lags |tau| <= max_lag stays below ~1e-8 gamma(0).
  FrequencyGrid default_grid(double max_lag) const {
    using std::numbers::pi;
    max_lag = std::max(std::abs(max_lag), 1.0);
    if (const auto* e = std::get_if<Exponential>(&family_)) {
      constexpr double kTail = 9e-7;
      const double half = e->theta / std::tan(0.5 * pi * kTail);
      const double step = 2.0 * pi / (max_lag + 20.0 / e->theta);
      return {half, step};
    }
    if (const auto* s = std::get_if<SquaredExp>(&family_)) {
      const double half = 8.0 / s->ell;
      const double step = 2.0 * pi / (max_lag + 8.0 * s->ell);
      return {half, step};
    }
    const auto& c = std::get<CosineMixture>(family_);
    const double w = c.frequencies.empty()
                         ? 1.0
                         : *std::max_element(c.frequencies.begin(), c.frequencies.end());
    return {std::max(w, 1.0), 1.0};
  }

  /// Discretized Bochner measure on `grid`: density x trapezoid weight for
  /// density families, exact atoms for the cosine mixture (grid ignored).
  DiscreteSpectralMeasure spectral_measure(const FrequencyGrid& grid) const {
    if (const auto* c = std::get_if<CosineMixture>(&family_)) {
      std::vector<SpectralNode> atoms;
      for (std::size_t r = 0; r < c->masses.size(); ++r) {
        if (c->frequencies[r] == 0.0) {
          atoms.push_back({0.0, c->masses[r]});
        } else {
          atoms.push_back({-c->frequencies[r], 0.5 * c->masses[r]});
          atoms.push_back({c->frequencies[r], 0.5 * c->masses[r]});
        }
      }
      return DiscreteSpectralMeasure::atoms(std::move(atoms));
    }
    if (!(grid.half_width > 0.0) || !(grid.step > 0.0))
      throw DomainError("frequency grid needs positive half width and step");
    const double tail = tail_mass(grid.half_width);
    if (tail >= 1e-6 * variance())
      throw CoverageError("frequency grid [-" + std::to_string(grid.half_width) + ", " +
                              std::to_string(grid.half_width) + "] misses spectral mass " +
                              std::to_string(tail),
                          tail);
    const std::size_t n = grid.size();
    const double step = 2.0 * grid.half_width / static_cast<double>(n - 1);
    std::vector<double> masses(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double w = (k == 0 || k + 1 == n) ? 0.5 * step : step;
      masses[k] = density(-grid.half_width + static_cast<double>(k) * step) * w;
    }
    return DiscreteSpectralMeasure::uniform(-grid.half_width, step, std::move(masses));
  }

  DiscreteSpectralMeasure default_spectral_measure(double max_lag) const {
    return spectral_measure(default_grid(max_lag));
  }

 private:
  void validate() const {
    if (const auto* e = std::get_if<Exponential>(&family_)) {
      if (!(e->theta > 0.0) || !(e->sigma2 > 0.0))
        throw DomainError("exponential covariance needs theta > 0 and sigma2 > 0");
    } else if (const auto* s = std::get_if<SquaredExp>(&family_)) {
      if (!(s->ell > 0.0) || !(s->sigma2 > 0.0))
        throw DomainError("squared exponential covariance needs ell > 0 and sigma2 > 0");
    } else {
      const auto& c = std::get<CosineMixture>(family_);
      if (c.masses.empty() || c.masses.size() != c.frequencies.size())
        throw DomainError("cosine mixture needs equally many masses and frequencies");
      for (std::size_t r = 0; r < c.masses.size(); ++r) {
        if (!(c.masses[r] > 0.0)) throw DomainError("cosine mixture masses must be positive");
        if (!(c.frequencies[r] >= 0.0) || !std::isfinite(c.frequencies[r]))
          throw DomainError("cosine mixture frequencies must be finite and >= 0");
      }
    }
  }

  Family family_;
};

}  // namespace pcls

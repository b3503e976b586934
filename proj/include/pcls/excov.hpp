#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pcls/error.hpp"
#include "pcls/linalg.hpp"

namespace pcls {

/// psi(v) = sum_m w_m e^{lambda_m v}: the Laplace transform of a finite atomic
/// measure, hence exponentially convex and exactly simulatable.
struct LaplaceMixture {
  std::vector<double> weights;
  std::vector<double> rates;
};

/// Named closed-form psi. Evaluation and PSD checks only; there is no finite
/// representing measure to sample from.
struct ClosedForm {
  std::string name;
  std::function<double(double)> fn;
};

/// Exponentially convex covariance psi(t + u) of a random weight process.
class ExpConvexCov {
 public:
  explicit ExpConvexCov(LaplaceMixture m) : rep_(std::move(m)) {
    const auto& mix = std::get<LaplaceMixture>(rep_);
    if (mix.weights.empty() || mix.weights.size() != mix.rates.size())
      throw DomainError("laplace mixture needs equally many weights and rates (at least one)");
    for (std::size_t i = 0; i < mix.weights.size(); ++i) {
      if (!(mix.weights[i] > 0.0) || !std::isfinite(mix.weights[i]))
        throw DomainError("laplace mixture weight " + std::to_string(i) + " must be positive");
      if (!std::isfinite(mix.rates[i]))
        throw DomainError("laplace mixture rate " + std::to_string(i) + " must be finite");
      for (std::size_t k = 0; k < i; ++k)
        if (mix.rates[k] == mix.rates[i])
          throw DomainError("laplace mixture rates must be distinct");
    }
  }

  explicit ExpConvexCov(ClosedForm f) : rep_(std::move(f)) {
    if (!std::get<ClosedForm>(rep_).fn) throw DomainError("closed-form psi has no function");
  }

  /// psi(v) = (1 + v^2) e^{v^2/2}.
  static ExpConvexCov example_2_1() {
    return ExpConvexCov(ClosedForm{"example_2_1", [](double v) {
                                     return (1.0 + v * v) * std::exp(0.5 * v * v);
                                   }});
  }

  static ExpConvexCov closed_form(const std::string& name) {
    if (name == "example_2_1") return example_2_1();
    throw DomainError("unknown closed-form psi '" + name + "'");
  }

  bool simulatable() const { return std::holds_alternative<LaplaceMixture>(rep_); }
  const LaplaceMixture& mixture() const {
    if (!simulatable()) throw UnsupportedMethod("closed-form psi has no mixture representation");
    return std::get<LaplaceMixture>(rep_);
  }
  const std::string& name() const { return std::get<ClosedForm>(rep_).name; }

  double operator()(double v) const { return eval(v); }

  double eval(double v) const {
    if (const auto* mix = std::get_if<LaplaceMixture>(&rep_)) {
      double s = 0.0;
      for (std::size_t m = 0; m < mix->weights.size(); ++m) {
        const double e = std::exp(mix->rates[m] * v);
        if (!std::isfinite(e))
          throw RangeError("psi overflow at atom " + std::to_string(m) + " (rate " +
                           std::to_string(mix->rates[m]) + ", v = " + std::to_string(v) + ")");
        s += mix->weights[m] * e;
      }
      return s;
    }
    const auto& f = std::get<ClosedForm>(rep_);
    const double r = f.fn(v);
    if (!std::isfinite(r))
      throw RangeError("psi '" + f.name + "' overflow at v = " + std::to_string(v));
    return r;
  }

 private:
  std::variant<LaplaceMixture, ClosedForm> rep_;
};

/// Gram matrix G_ij = psi(t_i + t_j).
inline Eigen::MatrixXd gram(const ExpConvexCov& psi, std::span<const double> points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = psi(points[i] + points[j]);
  return g;
}

/// Exponential convexity on a finite point set: min eig of the Gram matrix
/// against -tol * trace.
inline PsdReport gram_psd_check(const ExpConvexCov& psi, std::span<const double> points,
                                double tol) {
  if (tol < 0.0) throw DomainError("tolerance must be nonnegative");
  for (double t : points)
    if (!std::isfinite(t)) throw DomainError("gram points must be finite");
  return linalg::psd_report(gram(psi, points), tol);
}

/// One draw of U(t) = sum_m xi_m sqrt(w_m) e^{lambda_m t} with xi_m iid N(0,1),
/// so that E[U(t)U(u)] = psi(t + u).
class WeightProcessRealization {
 public:
  WeightProcessRealization(std::vector<double> coefficients, std::vector<double> rates)
      : coefficients_(std::move(coefficients)), rates_(std::move(rates)) {}

  double operator()(double t) const {
    double s = 0.0;
    for (std::size_t m = 0; m < rates_.size(); ++m) s += coefficients_[m] * std::exp(rates_[m] * t);
    return s;
  }

  /// xi_m * sqrt(w_m).
  const std::vector<double>& coefficients() const { return coefficients_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  std::vector<double> coefficients_;
  std::vector<double> rates_;
};

template <class Urbg>
WeightProcessRealization sample_weight_process(const ExpConvexCov& psi, Urbg& rng) {
  const auto& mix = psi.mixture();
  std::normal_distribution<double> normal;
  std::vector<double> coeff(mix.weights.size());
  for (std::size_t m = 0; m < coeff.size(); ++m) coeff[m] = normal(rng) * std::sqrt(mix.weights[m]);
  return {std::move(coeff), mix.rates};
}

inline WeightProcessRealization sample_weight_process(const ExpConvexCov& psi,
                                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_weight_process(psi, rng);
}

}  // namespace pcls

#pragma once

#include <random>
#include <vector>

#include "pcls/pcls.hpp"

namespace pcls::testing {

// Lengths [1, 2]; psi_1 = e^{0.1 v}; psi_2 = 0.5 + 0.5 e^{0.2 v};
// gamma_1 = Exponential(1, 1); gamma_2 = CosineMixture([0.6, 0.4], [1, 2.5]);
// PC sigma = [1, 2], rho = 0.5.
inline Partition default_partition() { return Partition({1.0, 2.0}); }

inline std::vector<ExpConvexCov> default_psi() {
  return {ExpConvexCov(LaplaceMixture{{1.0}, {0.1}}), ExpConvexCov(LaplaceMixture{{0.5, 0.5}, {0.0, 0.2}})};
}

inline std::vector<StationaryCov> default_gamma() {
  return {Exponential{1.0, 1.0}, CosineMixture{{0.6, 0.4}, {1.0, 2.5}}};
}

inline PCSequenceSpec default_pc() { return PCSequenceSpec(ParametricPc{{1.0, 2.0}, 0.5}); }

inline PCLSModel default_model(ModelFlags flags = {}) {
  return PCLSModel(default_partition(), default_psi(), default_gamma(), default_pc(), flags);
}

inline PCLSModel ls_only_model(std::vector<StationaryCov> gamma = default_gamma()) {
  return PCLSModel(default_partition(), default_psi(), std::move(gamma), std::nullopt,
                   ModelFlags{true, false, true});
}

inline PCLSModel pc_only_model() {
  return PCLSModel(default_partition(), {}, {}, default_pc(), ModelFlags{false, true, true});
}

/// Grid used by the statistical end-to-end checks.
inline std::vector<double> mc_grid() { return {0.5, 1.0, 1.5, 2.75, 3.5, 4.0, 4.5, 5.75, 6.5}; }

/// Random model with period T in 1..3, mixture psi and mixed stationary families.
inline PCLSModel random_model(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> period(1, 3), atoms(1, 3), fam(0, 2);
  std::uniform_real_distribution<double> len(0.3, 2.0), w(0.1, 1.5), rate(-0.3, 0.3), pos(0.2, 2.0),
      freq(0.0, 3.0), rho(-0.9, 0.9);
  const int T = period(rng);
  std::vector<double> lengths;
  std::vector<ExpConvexCov> psi;
  std::vector<StationaryCov> gamma;
  std::vector<double> sigma;
  for (int j = 0; j < T; ++j) {
    lengths.push_back(len(rng));
    LaplaceMixture mix;
    const int m = atoms(rng);
    for (int i = 0; i < m; ++i) {
      mix.weights.push_back(w(rng));
      mix.rates.push_back(rate(rng) + 0.7 * i);
    }
    psi.emplace_back(std::move(mix));
    switch (fam(rng)) {
      case 0: gamma.emplace_back(Exponential{pos(rng), pos(rng)}); break;
      case 1: gamma.emplace_back(SquaredExp{pos(rng), pos(rng)}); break;
      default: gamma.emplace_back(CosineMixture{{pos(rng), pos(rng)}, {freq(rng), freq(rng) + 3.0}}); break;
    }
    sigma.push_back(pos(rng));
  }
  return PCLSModel(Partition(lengths), std::move(psi), std::move(gamma),
                   PCSequenceSpec(ParametricPc{sigma, rho(rng)}));
}

}  // namespace pcls::testing

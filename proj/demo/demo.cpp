// Builds the default model in code, prints a few covariances, compares one of
// them against the frequency-domain reconstruction and a small simulation.
#include <cstdio>

#include "pcls/pcls.hpp"

int main() {
  using namespace pcls;
  PCLSModel m(Partition({1.0, 2.0}),
              {ExpConvexCov(LaplaceMixture{{1.0}, {0.1}}), ExpConvexCov(LaplaceMixture{{0.5, 0.5}, {0.0, 0.2}})},
              {Exponential{1.0, 1.0}, CosineMixture{{0.6, 0.4}, {1.0, 2.5}}},
              PCSequenceSpec(ParametricPc{{1.0, 2.0}, 0.5}));

  std::printf("%6s %6s %12s %12s %12s\n", "t", "u", "ls", "pc", "total");
  for (auto [t, u] : {std::pair{0.5, 0.5}, std::pair{1.0, 1.5}, std::pair{2.0, 2.0}, std::pair{2.5, 3.5}})
    std::printf("%6.2f %6.2f %12.6f %12.6f %12.6f\n", t, u, m.ls_cov(t, u), m.xp_cov(t, u), m.total_cov(t, u));

  SpectralModel sm(m);
  std::printf("\nreconstructed cov(1.0, 1.5) = %.8f\n", sm.reconstruct_cov(1.0, 1.5));

  const std::vector<double> grid{1.0, 1.5};
  const auto e = simulate(m, grid, 20000, 1, SimulationMethod::ComponentWise);
  const auto est = empirical_cov(e, 0, 1);
  std::printf("simulated   cov(1.0, 1.5) = %.4f +- %.4f (N = %zu)\n", est.estimate, est.standard_error,
              e.n_paths());
}

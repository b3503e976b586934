#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"

using namespace pcls;
using namespace pcls::testing;

namespace {

PCLSModel atomic_model() {
  return PCLSModel(default_partition(), default_psi(),
                   {CosineMixture{{1.0}, {1.0}}, CosineMixture{{0.6, 0.4}, {1.0, 2.5}}}, default_pc());
}

double mass_at(const std::vector<SpectralMass>& ms, double lambda) {
  double s = 0.0;
  for (const auto& m : ms)
    if (std::abs(m.lambda - lambda) < 1e-12) s += m.mass.real();
  return s;
}

}  // namespace

TEST(FKernel, BlockOneHasSingleTerm) {
  const SpectralModel sm(atomic_model());
  const auto f = sm.F_kernel(1, 1, 0.3, 0.6);
  EXPECT_EQ(f.size(), 2u);
  EXPECT_NEAR(mass_at(f, 1.0), 0.5 * std::exp(0.1 * 0.9), 1e-14);
}

TEST(FKernel, CrossBlockMass) {
  const SpectralModel sm(atomic_model());
  const auto f = sm.F_kernel(1, 2, 0.9, 1.1);
  EXPECT_NEAR(mass_at(f, 1.0), 0.610701379, 1e-9);
  EXPECT_TRUE(sm.F_kernel(1, 3, 0.9, 3.5).empty());
  EXPECT_THROW(sm.F_kernel(1, 2, 1.5, 1.1), DomainError);
}

TEST(ThetaKernel, EndpointsAreUnscaled) {
  const SpectralModel sm(pc_only_model());
  const auto& lift = *sm.lift();
  const auto th = sm.theta_kernel(2, 2, 3.0, 3.0);
  for (std::size_t r = 0; r < th.size(); ++r) EXPECT_EQ(th[r].mass, lift.mass(2, 2, r));
}

TEST(ThetaKernel, SumsToPcCovariance) {
  const SpectralModel sm(pc_only_model());
  const auto& m = sm.model();
  for (auto [t, u] : {std::pair{1.5, 2.5}, std::pair{1.2, 1.3}, std::pair{0.2, 0.9}}) {
    const auto j = m.partition().block_of(t);
    cplx s{0.0, 0.0};
    for (const auto& e : sm.theta_kernel(j, j, t, u)) s += e.mass;
    EXPECT_NEAR(s.real(), m.xp_cov(t, u), 1e-10);
  }
}

TEST(ThetaKernel, CrossBlockScaling) {
  const SpectralModel sm(pc_only_model());
  const auto& lift = *sm.lift();
  const auto th = sm.theta_kernel(1, 2, 0.5, 2.0);
  const double scale = 0.5 * 1.0 / (1.0 * 2.0);
  for (std::size_t r = 0; r < th.size(); ++r) EXPECT_NEAR(std::abs(th[r].mass - scale * lift.mass(1, 2, r)), 0.0, 1e-16);
}

TEST(Lift, StationaryAr1IsSampledDensity) {
  const double rho = 0.6;
  PCSequenceSpec pc(ParametricPc{{1.0}, rho});
  const auto lift = pc_spectral_lift(pc, 64, 2);
  const double R = static_cast<double>(lift.points());
  for (std::size_t r = 0; r < lift.points(); ++r) {
    const double nu = lift.frequency(r);
    const double f = (1 - rho * rho) / (2 * std::numbers::pi * (1 - 2 * rho * std::cos(nu) + rho * rho));
    EXPECT_NEAR(lift.mass(1, 1, r).real(), 2 * std::numbers::pi / R * f, 1e-14);
    EXPECT_EQ(lift.mass(1, 1, r), lift.mass(3, 5, r));
  }
  EXPECT_LE(lift.residual, 1e-8);
}

TEST(Lift, WhiteSequenceIsFlat) {
  Eigen::MatrixXd base = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  PCSequenceSpec pc(ExplicitPc{base, 1}, 2);
  const auto lift = pc_spectral_lift(pc, 16, 2);
  const double R = static_cast<double>(lift.points());
  for (std::size_t r = 0; r < lift.points(); ++r) {
    EXPECT_NEAR(std::abs(lift.mass(1, 1, r) - 1.0 / R), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(lift.mass(2, 2, r) - 4.0 / R), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(lift.mass(1, 2, r)), 0.0, 1e-15);
  }
}

TEST(Lift, DefaultRoundTripAndHermitian) {
  const auto lift = pc_spectral_lift(default_pc(), 128, 2);
  double max_gamma = 0.0;
  for (std::size_t j = 1; j <= 4; ++j)
    for (std::size_t k = 1; k <= 4; ++k) {
      max_gamma = std::max(max_gamma, std::abs(default_pc().cov(j, k)));
      EXPECT_NEAR(std::abs(lift.reconstruct(j, k) - default_pc().cov(j, k)), 0.0, 1e-8 * 4.0);
    }
  EXPECT_LE(lift.residual, 1e-8 * max_gamma);
  for (std::size_t r = 0; r < lift.points(); ++r) {
    const auto m = lift.matrix_at(r);
    EXPECT_LE((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Reconstruct, AtomicLsOnlyIsExact) {
  const auto m = ls_only_model({CosineMixture{{1.0}, {1.0}}, CosineMixture{{0.6, 0.4}, {1.0, 2.5}}});
  const SpectralModel sm(m);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> t(1e-3, 6.0);
  for (int i = 0; i < 50; ++i) {
    const double a = t(rng), b = t(rng);
    EXPECT_NEAR(sm.reconstruct_cov(a, b), m.ls_cov(a, b), 1e-10 * (1 + std::abs(m.ls_cov(a, b))));
  }
}

TEST(Reconstruct, PcOnlyMatchesTimeDomain) {
  const auto m = pc_only_model();
  const SpectralModel sm(m);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> t(1e-3, 6.0);
  for (int i = 0; i < 50; ++i) {
    const double a = t(rng), b = t(rng);
    EXPECT_NEAR(sm.reconstruct_cov(a, b), m.xp_cov(a, b), 1e-8);
  }
}

TEST(Reconstruct, DefaultModelAnchor) {
  const SpectralModel sm(default_model());
  EXPECT_NEAR(sm.reconstruct_cov(1.0, 1.5), 1.028801, 1e-6);
  EXPECT_FALSE(sm.atomic());
}

// The unconjugated phase e^{2 i lambda m / T} does not rebuild the
// time-domain covariance.
TEST(Reconstruct, LiteralPhaseDiffersAcrossBlocks) {
  const SpectralModel sm(pc_only_model());
  const auto lit = sm.reconstruct(0.5, 2.0, PhaseConvention::Unconjugated);
  EXPECT_GT(std::abs(lit - cplx(0.25, 0.0)), 1e-3);
}

TEST(Reconstruct, HorizonEnforced) {
  const SpectralModel sm(default_model());
  EXPECT_DOUBLE_EQ(sm.horizon(), 6.0);
  EXPECT_THROW(sm.reconstruct_cov(6.5, 1.0), DomainError);
  const SpectralModel wide(default_model(), {}, 12.0);
  EXPECT_NO_THROW(wide.reconstruct_cov(11.5, 10.0));
}

TEST(Reconstruct, NarrowDensityGridSurfacesCoverage) {
  DiscreteSpectralGrid g;
  g.ls = FrequencyGrid{50.0, 0.025};
  EXPECT_THROW(SpectralModel(default_model(), g), CoverageError);
}

TEST(SpectralProperty, KernelHermitianSymmetry) {
  const SpectralModel sm(default_model());
  const auto& p = sm.model().partition();
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> t(1e-3, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double a = t(rng), b = t(rng);
    const auto j = p.block_of(a), k = p.block_of(b);
    const auto th1 = sm.theta_kernel(j, k, a, b), th2 = sm.theta_kernel(k, j, b, a);
    ASSERT_EQ(th1.size(), th2.size());
    for (std::size_t r = 0; r < th1.size(); ++r) EXPECT_NEAR(std::abs(th1[r].mass - std::conj(th2[r].mass)), 0.0, 1e-15);
    if (j == k) {
      for (const auto& e : sm.theta_kernel(j, j, a, a)) EXPECT_GE(e.mass.real(), -1e-15);
      // F on density blocks carries millions of nodes; a handful of cases suffices
      if (i < 10)
        for (const auto& e : sm.F_kernel(j, j, a, a)) EXPECT_GE(e.mass.real(), 0.0);
    }
  }
}

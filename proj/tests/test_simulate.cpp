#include <gtest/gtest.h>

#include <random>

#include "gle/correlation.hpp"
#include "gle/direct_gle.hpp"
#include "gle/errors.hpp"
#include "gle/projection.hpp"
#include "gle/simulate.hpp"
#include "oracles.hpp"

using gle::Matrix;
using gle::Vector;

namespace {

gle::ReducedModel reference_fit(int order, double kbt) {
  const auto blocks = gle::compute_blocks(oracle::reference_model(kbt), oracle::reference_basis());
  const auto mom = gle::compute_moments(blocks, 4);
  return order == 0 ? gle::fit_markovian(blocks, mom, kbt) : gle::fit_rational(blocks, mom, order, kbt);
}

double mean_square(const Matrix& x, Eigen::Index col) { return x.col(col).squaredNorm() / static_cast<double>(x.rows()); }

}  // namespace

TEST(Rng, MemberStreamsAreIndependentAndReproducible) {
  auto a = gle::member_engine(5, 0);
  auto b = gle::member_engine(5, 0);
  auto c = gle::member_engine(5, 1);
  auto d = gle::member_engine(6, 0);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
}

TEST(Initial, StationaryDrawCovariance) {
  const auto sys = gle::assemble_extended(reference_fit(2, 1.0));
  const Matrix target = sys.stationary();
  auto engine = gle::member_engine(1, 0);
  gle::CovarianceAccumulator acc(sys.dim());
  for (int i = 0; i < 40000; ++i) acc.add(gle::sample_stationary_initial(sys, engine));
  EXPECT_LE((acc.covariance() - target).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Integrator, ZeroTemperatureMatchesExactFlow) {
  const auto r = reference_fit(2, 0.0);
  const auto sys = gle::assemble_extended(r);
  const double dt = 1e-3;
  const gle::LinearIntegrator integ(sys, dt);
  Vector x0 = Vector::Zero(sys.dim());
  x0(0) = 1.0;
  x0(1) = -0.5;
  auto engine = gle::member_engine(0, 0);
  const auto tr = integ.run(x0, 2000, 100, engine);
  ASSERT_EQ(tr.samples(), 21);
  const Matrix drift = sys.drift();
  for (long i = 0; i < tr.samples(); ++i) {
    const Vector exact = gle::expm(drift * (i * 0.1)) * x0;
    EXPECT_NEAR(tr.positions(i, 0), exact(0), 1e-6);
    EXPECT_NEAR((*tr.velocities)(i, 0), exact(1), 1e-6);
  }
}

TEST(Simulate, ReducedEquipartitionAndDeterminism) {
  const auto r = reference_fit(1, 0.6);
  gle::SimConfig cfg;
  cfg.dt = 0.02;
  cfg.steps = 20000;
  cfg.seed = 99;
  cfg.ensemble = 4;
  cfg.record_stride = 5;
  const auto a = gle::simulate_reduced(r, cfg);
  const auto b = gle::simulate_reduced(r, cfg, gle::Exec::serial);
  ASSERT_EQ(a.members.size(), 4u);
  double pvar = 0.0, qvar = 0.0;
  for (std::size_t k = 0; k < a.members.size(); ++k) {
    EXPECT_EQ((a.members[k].positions - b.members[k].positions).norm(), 0.0);
    pvar += mean_square(*a.members[k].velocities, 0) / 4.0;
    qvar += mean_square(a.members[k].positions, 0) / 4.0;
  }
  EXPECT_NEAR(pvar, 0.6, 0.05);
  EXPECT_NEAR(qvar, 0.6 / 1.5, 0.06);
  EXPECT_NE((a.members[0].positions - a.members[1].positions).norm(), 0.0);
}

TEST(Simulate, FullModelEquipartition) {
  gle::SimConfig cfg;
  cfg.dt = 0.02;
  cfg.steps = 20000;
  cfg.ensemble = 4;
  cfg.record_stride = 4;
  const auto res = gle::simulate_full(oracle::reference_model(1.0), cfg);
  double p0 = 0.0, p1 = 0.0;
  for (const auto& m : res.members) {
    p0 += mean_square(*m.velocities, 0) / 4.0;
    p1 += mean_square(*m.velocities, 1) / 4.0;
  }
  EXPECT_NEAR(p0, 1.0, 0.08);
  EXPECT_NEAR(p1, 1.0, 0.08);
}

TEST(Simulate, AuxNoiseVariance) {
  const auto r = reference_fit(1, 2.0);
  gle::SimConfig cfg;
  cfg.dt = 0.05;
  cfg.steps = 20000;
  cfg.ensemble = 4;
  const auto z = gle::simulate_aux_noise(r, cfg);
  double var = 0.0;
  for (const auto& x : z) var += mean_square(x, 0) / 4.0;
  // kBT theta_1(0) = 2 * 1/2
  EXPECT_NEAR(var, 1.0, 0.08);
  auto bad = r;
  bad.fdt_feasible = false;
  EXPECT_THROW(gle::simulate_aux_noise(bad, cfg), gle::FdtInfeasible);
  EXPECT_THROW(gle::simulate_aux_noise(reference_fit(0, 1.0), cfg), gle::InvalidInput);
}

TEST(Simulate, ConfigValidationAndWarning) {
  gle::SimConfig cfg;
  cfg.ensemble = 0;
  EXPECT_THROW(gle::simulate_full(oracle::reference_model(), cfg), gle::InvalidInput);
  EXPECT_TRUE(gle::dt_stability_warning(Matrix::Constant(1, 1, 1.0), 0.1).empty());
  EXPECT_FALSE(gle::dt_stability_warning(Matrix::Constant(1, 1, 100.0), 0.5).empty());
}

TEST(DirectGle, ZeroTemperatureConvergesToEmbedding) {
  const auto r = reference_fit(2, 0.0);  // exact embedding of the reference kernel
  const auto sys = gle::assemble_extended(r);
  const auto blocks = gle::compute_blocks(oracle::reference_model(0.0), oracle::reference_basis());
  const Vector q0 = Vector::Constant(1, 1.0), p0 = Vector::Zero(1);
  Vector x0 = Vector::Zero(sys.dim());
  x0(0) = 1.0;
  const Vector exact = gle::expm(sys.drift() * 2.0) * x0;
  double prev_err = 1e300;
  for (double dt : {0.02, 0.01, 0.005}) {
    const long steps = std::lround(2.0 / dt);
    gle::DirectGleProblem pr{blocks.a_eff, blocks.g11, 0.0, gle::kernel_table(blocks, dt, steps + 1)};
    gle::DirectGleConfig cfg;
    cfg.dt = dt;
    cfg.steps = steps;
    const auto tr = gle::simulate_direct_gle(pr, cfg, q0, p0);
    const double err = std::abs(tr.positions(steps, 0) - exact(0));
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 5e-3);
}

TEST(DirectGle, ColoredNoiseVariance) {
  const auto blocks = gle::compute_blocks(oracle::reference_model(1.0), oracle::reference_basis());
  const double dt = 0.05;
  const long steps = 400;
  gle::DirectGleProblem pr{blocks.a_eff, blocks.g11, 1.0, gle::kernel_table(blocks, dt, steps + 1)};
  double acc = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gle::DirectGleConfig cfg{dt, steps, seed, true};
    const auto tr = gle::simulate_direct_gle(pr, cfg, Vector::Zero(1), Vector::Zero(1));
    for (long i = steps / 2; i <= steps; ++i) {
      acc += std::pow((*tr.velocities)(i, 0), 2);
      ++count;
    }
  }
  // Euler discretization bias is O(dt); equipartition holds loosely.
  EXPECT_NEAR(acc / count, 1.0, 0.25);
}

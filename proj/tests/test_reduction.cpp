#include <gtest/gtest.h>

#include <random>

#include "gle/errors.hpp"
#include "gle/projection.hpp"
#include "gle/reduction.hpp"
#include "oracles.hpp"

using gle::Matrix;

namespace {

struct Fixture {
  gle::ProjectedBlocks blocks;
  gle::KernelMoments moments;
};

Fixture reference(int max_order = 4) {
  Fixture f;
  f.blocks = gle::compute_blocks(oracle::reference_model(), oracle::reference_basis());
  f.moments = gle::compute_moments(f.blocks, max_order);
  return f;
}

double s(const Matrix& m) { return m(0, 0); }

}  // namespace

TEST(Markovian, ReferenceFriction) {
  const auto f = reference();
  const auto r = gle::fit_markovian(f.blocks, f.moments, 1.0);
  EXPECT_EQ(r.order, 0);
  EXPECT_NEAR(s(r.gamma_add), 0.25, 1e-15);
  EXPECT_NEAR(s(r.sigma()), 2.0 * 1.25, 1e-15);
  EXPECT_THROW(gle::eval_approx_kernel(r, 0.0), gle::InvalidInput);
}

TEST(Rational, ReferenceOrderOne) {
  const auto f = reference();
  const auto r = gle::fit_rational(f.blocks, f.moments, 1, 1.0);
  ASSERT_TRUE(r.fdt_feasible);
  EXPECT_NEAR(s(r.b[0]), -2.0, 1e-12);
  EXPECT_NEAR(s(r.c[0]), 0.5, 1e-12);
  EXPECT_NEAR(s(r.qtilde), 0.5, 1e-12);
  EXPECT_NEAR(s(r.sigma_aux()), 2.0, 1e-12);
  EXPECT_EQ(r.aux_dim(), 1);
}

TEST(Rational, ReferenceOrderTwo) {
  const auto f = reference();
  const auto r = gle::fit_rational(f.blocks, f.moments, 2, 2.0);
  ASSERT_TRUE(r.fdt_feasible);
  EXPECT_NEAR(s(r.b[0]), -1.0, 1e-12);
  EXPECT_NEAR(s(r.b[1]), -2.0, 1e-12);
  EXPECT_NEAR(s(r.c[0]), 0.5, 1e-12);
  EXPECT_NEAR(s(r.c[1]), 0.5, 1e-12);
  // w = (z1, z0): Bhat = [[0, -2], [1, -1]], chat = (1/2, 1/2).
  const Matrix bhat = (Matrix(2, 2) << 0, -2, 1, -1).finished();
  EXPECT_LE((r.bhat - bhat).norm(), 1e-12);
  const Matrix q = (Matrix(2, 2) << 1.5, 0.5, 0.5, 0.5).finished();
  EXPECT_LE((r.qtilde - q).norm(), 1e-12);
  const Matrix sig = (Matrix(2, 2) << 2, 0, 0, 0).finished();
  EXPECT_LE((r.sigma_tilde - sig).norm(), 1e-12);
  EXPECT_LE((r.qaux() - 2.0 * q).norm(), 1e-12);
  EXPECT_FALSE(r.diagnostics.qaux_nonunique);
  // The exact kernel is itself second order, so the fit reproduces it.
  for (double t : {0.0, 0.5, 2.0, 8.0}) EXPECT_NEAR(s(gle::eval_approx_kernel(r, t)), oracle::reference_kernel(t), 1e-12);
}

TEST(Rational, NeedsEnoughMoments) {
  const auto f = reference(1);
  EXPECT_THROW(gle::fit_rational(f.blocks, f.moments, 2, 1.0), gle::InvalidInput);
  EXPECT_THROW(gle::fit_rational(f.blocks, f.moments, 0, 1.0), gle::InvalidInput);
}

TEST(Rational, SingularInfiniteMomentAndSystem) {
  // Coordinate 1 is decoupled from the complement, so M_inf has a zero row.
  gle::FullModel model;
  model.stiffness = (Matrix(3, 3) << 2, 0, -1, 0, 2, 0, -1, 0, 2).finished();
  model.damping = Matrix::Identity(3, 3);
  const auto basis = gle::make_partition(Matrix::Identity(3, 2));
  const auto blocks = gle::compute_blocks(model, basis);
  const auto mom = gle::compute_moments(blocks, 4);
  EXPECT_FALSE(mom.vanishing);
  EXPECT_THROW(gle::fit_rational(blocks, mom, 1, 1.0), gle::SingularMoment);
  EXPECT_THROW(gle::fit_rational(blocks, mom, 2, 1.0), gle::SingularSystem);
  try {
    gle::fit_rational(blocks, mom, 1, 1.0);
  } catch (const gle::Error& e) {
    EXPECT_EQ(e.exit_code(), gle::ExitCode::fitting);
  }
}

TEST(Rational, VanishingKernelTrivialEmbedding) {
  gle::FullModel model;
  model.stiffness = (Matrix(3, 3) << 2, 0, 0, 0, 3, 1, 0, 1, 3).finished();
  model.damping = Matrix::Identity(3, 3);
  const auto blocks = gle::compute_blocks(model, gle::make_partition((Matrix(3, 1) << 1, 0, 0).finished()));
  const auto mom = gle::compute_moments(blocks, 6);
  for (int n = 1; n <= 4; ++n) {
    const auto r = gle::fit_rational(blocks, mom, n, 1.0);
    EXPECT_TRUE(r.vanishing);
    EXPECT_TRUE(gle::is_hurwitz(r.bhat));
    EXPECT_EQ(r.chat.norm(), 0.0);
    EXPECT_EQ(gle::eval_approx_kernel(r, 1.3).norm(), 0.0);
    EXPECT_NO_THROW(gle::assemble_extended(r));
  }
}

TEST(Rational, RandomMomentMatchingAndFdt) {
  std::mt19937_64 rng(21);
  int accepted = 0;
  for (int trial = 0; trial < 30 && accepted < 15; ++trial) {
    const auto rc = trial % 2 ? oracle::random_case(rng, 10, 2) : oracle::random_block_damped_case(rng, 10, 2);
    const auto blocks = gle::compute_blocks(rc.model, rc.basis);
    const auto mom = gle::compute_moments(blocks, 4);
    for (int n = 1; n <= 3; ++n) {
      gle::ReducedModel r;
      try {
        r = gle::fit_rational(blocks, mom, n, rc.model.kbt);
      } catch (const gle::Error&) {
        continue;
      }
      EXPECT_LE(r.diagnostics.matching_residual, 1e-10);
      const Matrix inf_fit = -r.e_last().transpose() * r.bhat.partialPivLu().solve(r.chat);
      EXPECT_LE((inf_fit - mom.m_inf).norm(), 1e-10 * mom.m_inf.norm());
      EXPECT_LE((gle::eval_approx_kernel(r, 0.0) - mom.m[0]).norm(), 1e-10 * mom.m[0].norm());
      if (!r.fdt_feasible) continue;
      ++accepted;
      const auto res = gle::fdt_residual(r);
      EXPECT_LE(res.lyapunov, 1e-10);
      EXPECT_LE(res.pinning, 1e-10);
      EXPECT_LE(res.stationary_mismatch, 1e-8);
    }
  }
  EXPECT_GE(accepted, 10);
}

TEST(Extended, StationaryCovarianceSolvesLyapunov) {
  const auto f = reference();
  for (int n = 0; n <= 2; ++n) {
    const auto r = n == 0 ? gle::fit_markovian(f.blocks, f.moments, 0.7) : gle::fit_rational(f.blocks, f.moments, n, 0.7);
    const auto sys = gle::assemble_extended(r);
    const Matrix d = sys.drift();
    const Matrix st = sys.stationary();
    const Matrix res = d * st + st * d.transpose() + sys.noise();
    EXPECT_LE(res.norm(), 1e-12) << "order " << n;
    EXPECT_NEAR(st(0, 0), 0.7 / 1.5, 1e-14);
    EXPECT_NEAR(st(1, 1), 0.7, 1e-14);
  }
}

TEST(Extended, ColoredNoiseCovarianceMatchesKernel) {
  const auto f = reference();
  const double kbt = 1.3;
  const auto r = gle::fit_rational(f.blocks, f.moments, 2, kbt);
  const Matrix el = r.e_last();
  for (double t : {0.0, 0.25, 1.0, 3.0, 6.0}) {
    const Matrix cov = el.transpose() * gle::expm(t * r.bhat) * r.qaux() * el;
    EXPECT_LE((cov - kbt * gle::eval_approx_kernel(r, t)).norm(), 1e-12);
  }
}

TEST(Extended, InfeasibleFitRejected) {
  auto f = reference();
  auto r = gle::fit_rational(f.blocks, f.moments, 1, 1.0);
  r.fdt_feasible = false;
  EXPECT_THROW(gle::assemble_extended(r), gle::FdtInfeasible);
  EXPECT_NO_THROW(gle::extended_drift(r));
}

TEST(Companion, Layout) {
  const std::vector<Matrix> b = {Matrix::Constant(1, 1, -3), Matrix::Constant(1, 1, -5), Matrix::Constant(1, 1, -7)};
  const std::vector<Matrix> c = {Matrix::Constant(1, 1, 1), Matrix::Constant(1, 1, 2), Matrix::Constant(1, 1, 3)};
  Matrix bhat, chat;
  gle::assemble_companion(b, c, bhat, chat);
  // w = (z2, z1, z0)
  const Matrix eb = (Matrix(3, 3) << 0, 0, -7, 1, 0, -5, 0, 1, -3).finished();
  EXPECT_EQ((bhat - eb).norm(), 0.0);
  EXPECT_EQ((chat - (Matrix(3, 1) << 3, 2, 1).finished()).norm(), 0.0);
}

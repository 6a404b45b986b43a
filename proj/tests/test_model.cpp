#include <gtest/gtest.h>

#include <random>

#include "gle/errors.hpp"
#include "gle/model.hpp"
#include "oracles.hpp"

using gle::Matrix;
using gle::Vector;

TEST(MassScale, AbsentMassesUnchanged) {
  const gle::FullModel m = oracle::reference_model();
  const gle::FullModel s = gle::mass_scale(m);
  EXPECT_EQ((s.stiffness - m.stiffness).norm(), 0.0);
  EXPECT_EQ((s.damping - m.damping).norm(), 0.0);
}

TEST(MassScale, DiagonalMasses) {
  gle::FullModel m = oracle::reference_model();
  m.masses = (Vector(2) << 4.0, 1.0).finished();
  const gle::FullModel s = gle::mass_scale(m);
  const Matrix expected = (Matrix(2, 2) << 0.5, -0.5, -0.5, 2.0).finished();
  EXPECT_LE((s.stiffness - expected).norm(), 1e-15);
  EXPECT_NEAR(s.damping(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(s.damping(1, 1), 1.0, 1e-15);
}

TEST(MassScale, RejectsBadMasses) {
  gle::FullModel m = oracle::reference_model();
  m.masses = (Vector(2) << 1.0, 0.0).finished();
  EXPECT_THROW(gle::mass_scale(m), gle::InvalidInput);
  m.masses = Vector::Ones(3);
  EXPECT_THROW(gle::mass_scale(m), gle::InvalidInput);
}

TEST(Validate, ReferenceIsValid) {
  const auto d = gle::validate_full_model(oracle::reference_model());
  EXPECT_TRUE(d.ok);
  EXPECT_NEAR(d.stiffness_min_eigenvalue, 1.0, 1e-14);
  EXPECT_NEAR(d.damping_min_eigenvalue, 1.0, 1e-14);
  EXPECT_NEAR(d.drift_spectral_abscissa, -0.5, 1e-12);
  EXPECT_NO_THROW(gle::require_valid(oracle::reference_model()));
}

TEST(Validate, ReportsDefectsWithoutThrowing) {
  gle::FullModel m = oracle::reference_model();
  m.stiffness(0, 1) = 0.0;  // asymmetric
  auto d = gle::validate_full_model(m);
  EXPECT_FALSE(d.ok);
  EXPECT_GT(d.stiffness_asymmetry, 1e-8);
  EXPECT_THROW(gle::require_valid(m), gle::InvalidInput);

  m = oracle::reference_model();
  m.damping(1, 1) = -0.5;  // indefinite damping
  d = gle::validate_full_model(m);
  EXPECT_FALSE(d.ok);
  EXPECT_LT(d.damping_min_eigenvalue, 0.0);

  m = oracle::reference_model();
  m.stiffness = (Matrix(2, 2) << 1, 1, 1, 1).finished();  // singular stiffness
  EXPECT_FALSE(gle::validate_full_model(m).ok);

  m = oracle::reference_model();
  m.kbt = -1.0;
  EXPECT_FALSE(gle::validate_full_model(m).ok);
}

TEST(Validate, ZeroTemperatureAllowed) {
  EXPECT_TRUE(gle::validate_full_model(oracle::reference_model(0.0)).ok);
}

TEST(FullDrift, Layout) {
  const Matrix d = gle::full_drift(oracle::reference_model());
  const Matrix expected =
      (Matrix(4, 4) << 0, 0, 1, 0, 0, 0, 0, 1, -2, 1, -1, 0, 1, -2, 0, -1).finished();
  EXPECT_EQ((d - expected).norm(), 0.0);
}

TEST(Covariance, WelfordMatchesTwoPass) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Matrix x(500, 3);
  for (long i = 0; i < x.size(); ++i) x(i) = g(rng) + 100.0;  // offset stresses cancellation
  gle::CovarianceAccumulator acc(3);
  for (long i = 0; i < x.rows(); ++i) acc.add(x.row(i).transpose());
  const Vector mean = x.colwise().mean();
  const Matrix c = x.rowwise() - mean.transpose();
  const Matrix cov = c.transpose() * c / static_cast<double>(x.rows());
  EXPECT_EQ(acc.count(), 500);
  EXPECT_LE((acc.mean() - mean).norm(), 1e-12);
  EXPECT_LE((acc.covariance() - cov).norm(), 1e-12);
}

TEST(EstimateStiffness, RecoversFromGaussianSamples) {
  const Matrix a = (Matrix(2, 2) << 2, -1, -1, 2).finished();
  const double kbt = 0.5;
  const Matrix l = Eigen::LLT<Matrix>(kbt * a.inverse()).matrixL();
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  gle::Trajectory traj;
  traj.dt = 0.1;
  traj.positions.resize(200000, 2);
  for (long i = 0; i < traj.samples(); ++i) {
    const Vector z = (Vector(2) << g(rng), g(rng)).finished();
    traj.positions.row(i) = (l * z).transpose();
  }
  const Matrix est = gle::estimate_stiffness_from_covariance(traj, kbt, 0.0);
  EXPECT_LE((est - a).norm() / a.norm(), 0.02);
  EXPECT_LE((est - est.transpose()).norm(), 1e-12);
}

TEST(EstimateStiffness, BurnInAndErrors) {
  gle::Trajectory traj;
  traj.positions = Matrix::Zero(10, 2);
  EXPECT_THROW(gle::estimate_stiffness_from_covariance(traj, 1.0, 0.0), gle::SingularMatrix);
  EXPECT_THROW(gle::estimate_stiffness_from_covariance(traj, 1.0, -1.0, 9), gle::InvalidInput);
  EXPECT_THROW(gle::estimate_stiffness_from_covariance(traj, 0.0), gle::InvalidInput);
  // Burn-in drops a leading outlier block.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  traj.positions.resize(20000, 2);
  for (long i = 0; i < traj.samples(); ++i) traj.positions.row(i) << g(rng), g(rng);
  traj.positions.topRows(100).setConstant(50.0);
  const Matrix est = gle::estimate_stiffness_from_covariance(traj, 1.0, 0.0, 100);
  EXPECT_LE((est - Matrix::Identity(2, 2)).norm(), 0.06);
}

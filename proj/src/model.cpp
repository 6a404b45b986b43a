#include "gle/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "gle/errors.hpp"

namespace gle {

FullModel mass_scale(const FullModel& model) {
  if (!model.masses) return model;
  const Vector& m = *model.masses;
  if (m.size() != model.dim()) throw InvalidInput("mass_scale: mass vector length differs from model dimension");
  if (!m.allFinite() || (m.array() <= 0.0).any()) throw InvalidInput("mass_scale: masses must be positive");
  const Vector s = m.cwiseSqrt().cwiseInverse();
  FullModel out;
  out.kbt = model.kbt;
  out.stiffness = s.asDiagonal() * model.stiffness * s.asDiagonal();
  out.damping = s.asDiagonal() * model.damping * s.asDiagonal();
  out.stiffness = 0.5 * (out.stiffness + out.stiffness.transpose()).eval();
  out.damping = 0.5 * (out.damping + out.damping.transpose()).eval();
  return out;
}

CovarianceAccumulator::CovarianceAccumulator(Eigen::Index dim)
    : mean_(Vector::Zero(dim)), m2_(Matrix::Zero(dim, dim)) {}

void CovarianceAccumulator::add(const Eigen::Ref<const Vector>& x) {
  if (x.size() != mean_.size()) throw InvalidInput("covariance: sample width mismatch");
  ++count_;
  const Vector delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_.noalias() += delta * (x - mean_).transpose();
}

Matrix CovarianceAccumulator::covariance() const {
  if (count_ < 1) throw InvalidInput("covariance: no samples");
  Matrix c = m2_ / static_cast<double>(count_);
  return 0.5 * (c + c.transpose());
}

Matrix estimate_stiffness_from_covariance(const Trajectory& traj, double kbt, double eig_floor,
                                          Eigen::Index burn_in) {
  if (burn_in < 0) throw InvalidInput("estimate_stiffness: negative burn-in");
  if (traj.samples() - burn_in < 2) throw InvalidInput("estimate_stiffness: fewer than two samples after burn-in");
  if (!(kbt > 0.0)) throw InvalidInput("estimate_stiffness: kBT must be positive");
  const Eigen::Index n = traj.positions.cols();
  CovarianceAccumulator acc(n);
  for (Eigen::Index t = burn_in; t < traj.samples(); ++t) acc.add(traj.positions.row(t).transpose());
  const Matrix cov = acc.covariance();
  double floor = eig_floor;
  if (floor < 0.0) floor = 1e-8 * cov.trace() / static_cast<double>(n);
  Matrix reg = cov + floor * Matrix::Identity(n, n);
  Eigen::LLT<Matrix> llt(reg);
  if (llt.info() != Eigen::Success || (floor <= 0.0 && min_sym_eigenvalue(cov) <= 0.0)) {
    throw SingularMatrix("estimate_stiffness: covariance is degenerate; use a positive eigenvalue floor");
  }
  Matrix a = kbt * llt.solve(Matrix::Identity(n, n));
  return 0.5 * (a + a.transpose());
}

Matrix full_drift(const FullModel& model) {
  const Eigen::Index n = model.dim();
  Matrix d = Matrix::Zero(2 * n, 2 * n);
  d.topRightCorner(n, n).setIdentity();
  d.bottomLeftCorner(n, n) = -model.stiffness;
  d.bottomRightCorner(n, n) = -model.damping;
  return d;
}

ModelDiagnostics validate_full_model(const FullModel& model, double rel_tol) {
  ModelDiagnostics d;
  auto fail = [&d](std::string msg) {
    d.ok = false;
    d.failures.push_back(std::move(msg));
  };
  const Eigen::Index n = model.stiffness.rows();
  if (n == 0 || model.stiffness.cols() != n) fail("stiffness is not a nonempty square matrix");
  if (model.damping.rows() != n || model.damping.cols() != n) fail("damping shape differs from stiffness");
  if (!d.ok) return d;
  if (!model.stiffness.allFinite() || !model.damping.allFinite()) {
    fail("non-finite matrix entry");
    return d;
  }
  if (!std::isfinite(model.kbt) || model.kbt < 0.0) fail("kBT must be finite and non-negative");
  if (model.masses) {
    if (model.masses->size() != n) fail("mass vector length differs from model dimension");
    else if ((model.masses->array() <= 0.0).any()) fail("masses must be positive");
  }

  d.stiffness_asymmetry = asymmetry(model.stiffness);
  d.damping_asymmetry = asymmetry(model.damping);
  if (d.stiffness_asymmetry > rel_tol) fail("stiffness is not symmetric");
  if (d.damping_asymmetry > rel_tol) fail("damping is not symmetric");

  const double a_norm = model.stiffness.norm();
  const double g_norm = model.damping.norm();
  d.stiffness_min_eigenvalue = min_sym_eigenvalue(model.stiffness);
  d.damping_min_eigenvalue = min_sym_eigenvalue(model.damping);
  if (!(d.stiffness_min_eigenvalue > 1e-14 * a_norm)) fail("stiffness is not positive definite");
  if (d.damping_min_eigenvalue < -rel_tol * g_norm) fail("damping is not positive semidefinite");

  FullModel scaled = model;
  if (model.masses && model.masses->size() == n && (model.masses->array() > 0.0).all()) scaled = mass_scale(model);
  d.drift_spectral_abscissa = spectral_abscissa(full_drift(scaled));
  return d;
}

void require_valid(const FullModel& model) {
  const ModelDiagnostics d = validate_full_model(model);
  if (!d.ok) {
    std::string msg = "invalid model:";
    for (const auto& f : d.failures) msg += " " + f + ";";
    throw InvalidInput(msg);
  }
}

}  // namespace gle

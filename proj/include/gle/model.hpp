#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gle/matops.hpp"

namespace gle {

/// Linear Langevin system  x'' = -A x - Gamma x' + f(t),  <f f^T> = 2 kBT Gamma delta.
struct FullModel {
  Matrix stiffness;
  Matrix damping;
  double kbt = 1.0;
  std::optional<Vector> masses;

  Eigen::Index dim() const { return stiffness.rows(); }
};

struct Trajectory {
  double dt = 1.0;
  Matrix positions;  // one sample per row
  std::optional<Matrix> velocities;

  Eigen::Index samples() const { return positions.rows(); }
};

/// Removes the mass matrix: A <- M^{-1/2} A M^{-1/2}, Gamma likewise.
/// A model without masses is returned unchanged.
FullModel mass_scale(const FullModel& model);

/// Single-pass mean and covariance accumulator (Welford).
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index dim);
  void add(const Eigen::Ref<const Vector>& x);
  long count() const { return count_; }
  const Vector& mean() const { return mean_; }
  /// Centered covariance normalised by the sample count.
  Matrix covariance() const;

 private:
  long count_ = 0;
  Vector mean_;
  Matrix m2_;
};

/// A = kBT (Cov + floor I)^{-1}. A negative floor selects the default 1e-8 tr(Cov)/n.
Matrix estimate_stiffness_from_covariance(const Trajectory& traj, double kbt, double eig_floor = -1.0,
                                          Eigen::Index burn_in = 0);

struct ModelDiagnostics {
  bool ok = true;
  double stiffness_asymmetry = 0.0;
  double damping_asymmetry = 0.0;
  double stiffness_min_eigenvalue = 0.0;
  double damping_min_eigenvalue = 0.0;
  double drift_spectral_abscissa = 0.0;
  std::vector<std::string> failures;
};

/// Never throws on numerical defects; reports them instead.
ModelDiagnostics validate_full_model(const FullModel& model, double rel_tol = 1e-8);

/// Throws InvalidInput when validate_full_model reports a failure.
void require_valid(const FullModel& model);

/// D = [[0, I], [-A, -Gamma]] for a unit-mass model.
Matrix full_drift(const FullModel& model);

}  // namespace gle

#pragma once

#include <string>
#include <vector>

#include "gle/projection.hpp"

namespace gle {

struct FitDiagnostics {
  double time_scale = 1.0;         // tau used to nondimensionalize the moments
  double system_rcond = 1.0;       // of the block moment system (scaled units)
  double moment_residual = 0.0;    // |X K - R| / |R| of the block system
  double matching_residual = 0.0;  // max_l |theta_n^(l)(0) - M_l| and the M_inf condition, relative
  double hurwitz_margin = 0.0;     // -spectral_abscissa(Bhat)
  double sigma_min_eigenvalue = 0.0;  // relative to |Sigma_aux|
  double qaux_constraint_residual = 0.0;
  bool qaux_nonunique = false;
  std::vector<std::string> warnings;
};

/// Memoryless embedding of an order-n rational kernel approximation.
///
/// Auxiliary state w = (z_{n-1}, ..., z_1, z_0) with
///   z_k' = z_{k+1} + B_k z_0 + C_k p + noise,   z_n := 0,
/// and the memory force on p is -z_0. Order 0 replaces the memory by the
/// extra friction gamma_add = M_inf.
struct ReducedModel {
  int order = 0;
  Eigen::Index m = 0;
  double kbt = 1.0;
  bool vanishing = false;
  Matrix a_eff;
  Matrix gamma11;
  Matrix gamma_add;       // order 0 only
  std::vector<Matrix> b;  // B_0 .. B_{n-1}
  std::vector<Matrix> c;  // C_0 .. C_{n-1}
  Matrix bhat;            // nm x nm
  Matrix chat;            // nm x m, blocks (C_{n-1}; ...; C_0)
  Matrix qtilde;          // auxiliary stationary covariance per unit kBT
  Matrix sigma_tilde;     // auxiliary noise covariance per unit kBT
  bool fdt_feasible = true;
  FitDiagnostics diagnostics;

  Eigen::Index aux_dim() const { return bhat.rows(); }
  Matrix qaux() const { return kbt * qtilde; }
  Matrix sigma_aux() const { return kbt * sigma_tilde; }
  /// Full noise covariance of (f, zeta): blockdiag(2 kBT Gamma11, Sigma_aux);
  /// order 0 gives 2 kBT (Gamma11 + gamma_add).
  Matrix sigma() const;
  /// Selector of z_0 inside w.
  Matrix e_last() const;
};

ReducedModel fit_markovian(const KernelMoments& moments, const Matrix& a_eff, const Matrix& gamma11, double kbt);
ReducedModel fit_markovian(const ProjectedBlocks& blocks, const KernelMoments& moments, double kbt);

/// Matches M_0..M_{2n-2} and M_inf. Throws SingularMoment, SingularSystem or
/// StabilityError; an FDT-infeasible fit is returned with fdt_feasible unset.
ReducedModel fit_rational(const KernelMoments& moments, int order, const Matrix& a_eff, const Matrix& gamma11,
                          double kbt);
ReducedModel fit_rational(const ProjectedBlocks& blocks, const KernelMoments& moments, int order, double kbt);

/// Companion drift and stacked input for given coefficients.
void assemble_companion(const std::vector<Matrix>& b, const std::vector<Matrix>& c, Matrix& bhat, Matrix& chat);

/// Linear SDE on x = (q, p, w):  dx = drift x dt + noise^{1/2} dW, with the
/// OU part acting on y = (p, w).
struct ExtendedSystem {
  Eigen::Index m = 0;
  Eigen::Index aux = 0;
  double kbt = 1.0;
  Matrix stiffness;     // force -stiffness q
  Matrix ou_drift;      // on y
  Matrix ou_noise;      // on y
  Matrix y_stationary;  // kBT diag(I, Qtilde)
  Matrix position_cov;  // kBT stiffness^{-1}

  Eigen::Index dim() const { return 2 * m + aux; }
  Matrix drift() const;
  Matrix noise() const;
  Matrix stationary() const;
};

/// Drift on (q, p, w) regardless of FDT feasibility.
Matrix extended_drift(const ReducedModel& reduced);

/// Throws FdtInfeasible for fits whose auxiliary noise is not PSD.
ExtendedSystem assemble_extended(const ReducedModel& reduced);

/// theta_n(t) = e_last^T exp(t Bhat) chat.
Matrix eval_approx_kernel(const ReducedModel& reduced, double t);
std::vector<Matrix> eval_approx_kernel_grid(const ReducedModel& reduced, const std::vector<double>& times,
                                            Exec exec = Exec::parallel);

struct FdtResidual {
  double lyapunov = 0.0;             // |Bhat Q + Q Bhat^T + Sigma| / |Sigma|
  double pinning = 0.0;              // |Q e_last - kBT chat| / |kBT chat|, per unit kBT
  double stationary_mismatch = 0.0;  // Lyapunov solve with Sigma vs Q
};

FdtResidual fdt_residual(const ReducedModel& reduced);

}  // namespace gle

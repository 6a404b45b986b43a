#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

namespace gle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Selects the serial reference path or the OpenMP path of a data-parallel kernel.
enum class Exec { serial, parallel };

/// Worker count for OpenMP regions; honours GLE_THREADS when set.
int worker_count();

/// Matrix exponential by scaling and squaring around a diagonal Pade core.
Matrix expm(const Matrix& m);

/// Solves A X + X B = C for X (complex Schur, triangular back-substitution).
Matrix solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& c);

/// Solves B X + X B^T = C. The result is symmetrized when C is symmetric.
Matrix solve_lyapunov(const Matrix& b, const Matrix& c);

/// Returns lower-triangular L with L L^T = S. Eigenvalues in [-tol*|S|, 0) are clipped.
Matrix factor_psd(const Matrix& s, double tol = 1e-10);

/// Smallest eigenvalue of the symmetric part of S.
double min_sym_eigenvalue(const Matrix& s);

double spectral_abscissa(const Matrix& m);
bool is_hurwitz(const Matrix& m);

/// Reciprocal 2-norm condition number sigma_min / sigma_max; 0 for singular or non-finite input.
double rcond(const Matrix& m);

/// Largest relative deviation from symmetry, |S - S^T| / max(|S|, floor).
double asymmetry(const Matrix& s, double floor = 1e-300);

struct QuadratureResult {
  Matrix value;
  double error_estimate = 0.0;
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7, 15) over [0, T]. When
/// decay_rate > 0 the integrand is assumed to decay like exp(-decay_rate t)
/// beyond T and the tail bound |f(T)| / decay_rate is added to the estimate.
QuadratureResult integrate_matrix_function(const std::function<Matrix(double)>& f, double horizon,
                                           double tol,
                                           std::optional<double> decay_rate = std::nullopt,
                                           int max_intervals = 1 << 16);

}  // namespace gle

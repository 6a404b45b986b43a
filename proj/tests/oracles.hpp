#pragma once

// Independent reference computations for tests. None of these share code
// paths with the library kernels they check.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <unsupported/Eigen/KroneckerProduct>

#include "gle/basis.hpp"
#include "gle/model.hpp"

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Plain truncated Taylor series; only for small-norm arguments.
inline Matrix expm_taylor(const Matrix& a, int terms = 60) {
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  Matrix sum = term;
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

// V exp(Lambda) V^{-1} through a complex eigendecomposition.
inline Matrix expm_eigen(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a);
  const Eigen::MatrixXcd v = es.eigenvectors();
  const Eigen::VectorXcd ex = es.eigenvalues().array().exp();
  return (v * ex.asDiagonal() * v.inverse()).real();
}

// theta(t) = left exp(-G t) right from one complex eigendecomposition of G.
class EigenKernel {
 public:
  EigenKernel(const Matrix& left, const Matrix& gmat, const Matrix& right) {
    Eigen::EigenSolver<Matrix> es(gmat);
    lambda_ = es.eigenvalues();
    const Eigen::MatrixXcd v = es.eigenvectors();
    lv_ = left.cast<std::complex<double>>() * v;
    vr_ = v.partialPivLu().solve(right.cast<std::complex<double>>());
  }
  Matrix operator()(double t) const {
    const Eigen::VectorXcd e = (-t * lambda_).array().exp();
    return (lv_ * e.asDiagonal() * vr_).real();
  }

 private:
  Eigen::VectorXcd lambda_;
  Eigen::MatrixXcd lv_, vr_;
};

// Solves B X + X B^T = C by vectorization with Kronecker products.
inline Matrix lyapunov_kron(const Matrix& b, const Matrix& c) {
  const auto n = b.rows();
  const Matrix id = Matrix::Identity(n, n);
  const Matrix op = Eigen::kroneckerProduct(id, b) + Eigen::kroneckerProduct(b, id);
  const Vector x = op.fullPivLu().solve(Eigen::Map<const Vector>(c.data(), c.size()));
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

// Derivative of order 1..4 at t = 0 from second-order accurate forward stencils.
template <class F>
Matrix forward_derivative(F&& f, int order, double h) {
  static const double d1[] = {-1.5, 2.0, -0.5};
  static const double d2[] = {2.0, -5.0, 4.0, -1.0};
  static const double d3[] = {-2.5, 9.0, -12.0, 7.0, -1.5};
  static const double d4[] = {3.0, -14.0, 26.0, -24.0, 11.0, -2.0};
  const double* c = nullptr;
  int n = 0;
  switch (order) {
    case 0: return f(0.0);
    case 1: c = d1; n = 3; break;
    case 2: c = d2; n = 4; break;
    case 3: c = d3; n = 5; break;
    case 4: c = d4; n = 6; break;
    default: throw std::invalid_argument("forward_derivative: order <= 4");
  }
  Matrix acc = c[0] * f(0.0);
  for (int i = 1; i < n; ++i) acc += c[i] * f(i * h);
  return acc / std::pow(h, order);
}

inline Matrix random_spd(std::mt19937_64& rng, long n, double shift = 0.5) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix y(n, n);
  for (long i = 0; i < y.size(); ++i) y(i) = g(rng);
  return y * y.transpose() / static_cast<double>(n) + shift * Matrix::Identity(n, n);
}

inline Matrix random_psd(std::mt19937_64& rng, long n, long rank) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix y(n, rank);
  for (long i = 0; i < y.size(); ++i) y(i) = g(rng);
  return y * y.transpose() / static_cast<double>(n);
}

inline Matrix random_orthonormal(std::mt19937_64& rng, long n, long m) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix y(n, m);
  for (long i = 0; i < y.size(); ++i) y(i) = g(rng);
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(n, m);
}

// Random stable matrix: -(S + shift I) + skew part.
inline Matrix random_stable(std::mt19937_64& rng, long n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix k(n, n);
  for (long i = 0; i < k.size(); ++i) k(i) = g(rng);
  const Matrix skew = (k - k.transpose()) / std::sqrt(static_cast<double>(n));
  return -random_spd(rng, n, 0.1) + skew;
}

// Reference two-coordinate model: A = [[2, -1], [-1, 2]], Gamma = I, Phi = e1.
inline gle::FullModel reference_model(double kbt = 1.0) {
  gle::FullModel m;
  m.stiffness = (Matrix(2, 2) << 2, -1, -1, 2).finished();
  m.damping = Matrix::Identity(2, 2);
  m.kbt = kbt;
  return m;
}

inline gle::PartitionBasis reference_basis() {
  return {(Matrix(2, 1) << 1, 0).finished(), (Matrix(2, 1) << 0, 1).finished()};
}


// Closed form for the reference model: theta(t) = 1/2 e^{-t/2} (cos wt + sin wt / (2w)), w = sqrt(7)/2.
inline double reference_kernel(double t) {
  const double w = std::sqrt(7.0) / 2.0;
  return 0.5 * std::exp(-0.5 * t) * (std::cos(w * t) + std::sin(w * t) / (2.0 * w));
}

struct RandomCase {
  gle::FullModel model;
  gle::PartitionBasis basis;
};

// SPD stiffness, PSD damping (rank chosen at random, plus a small floor when
// full_rank_damping is set) and a random orthonormal Phi.
inline RandomCase random_case(std::mt19937_64& rng, long n, long m, bool full_rank_damping = true) {
  RandomCase rc;
  rc.model.stiffness = random_spd(rng, n, 0.5);
  std::uniform_int_distribution<long> rank(1, n);
  rc.model.damping = random_psd(rng, n, rank(rng));
  if (full_rank_damping) rc.model.damping += 0.2 * Matrix::Identity(n, n);
  rc.model.kbt = 1.0;
  const Matrix q = random_orthonormal(rng, n, n);
  rc.basis.phi = q.leftCols(m);
  rc.basis.psi = q.rightCols(n - m);
  return rc;
}

// As random_case, but the damping does not couple Phi to its complement
// (Gamma12 = 0), so theta is a positive-type kernel.
inline RandomCase random_block_damped_case(std::mt19937_64& rng, long n, long m) {
  RandomCase rc = random_case(rng, n, m);
  const Matrix& phi = rc.basis.phi;
  const Matrix& psi = rc.basis.psi;
  rc.model.damping = phi * random_spd(rng, m, 0.3) * phi.transpose() + psi * random_spd(rng, n - m, 0.3) * psi.transpose();
  rc.model.damping = 0.5 * (rc.model.damping + rc.model.damping.transpose());
  return rc;
}

}  // namespace oracle

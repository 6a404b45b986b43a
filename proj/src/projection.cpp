#include "gle/projection.hpp"

#include <omp.h>

#include <cmath>

#include "gle/errors.hpp"

namespace gle {

namespace {

Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

double opnorm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(x).singularValues()(0);
}

}  // namespace

ProjectedBlocks compute_blocks(const FullModel& model, const PartitionBasis& basis) {
  if (model.masses && !model.masses->isOnes(0.0)) {
    throw InvalidInput("compute_blocks: model must be mass-scaled first");
  }
  const Eigen::Index n = model.dim();
  if (basis.phi.rows() != n || basis.psi.rows() != n || basis.phi.cols() + basis.psi.cols() != n) {
    throw InvalidInput("compute_blocks: basis dimensions do not match the model");
  }
  if (basis.phi.cols() == 0 || basis.psi.cols() == 0) {
    throw InvalidInput("compute_blocks: both subspaces must be nonempty");
  }
  const Matrix& phi = basis.phi;
  const Matrix& psi = basis.psi;
  const Matrix& a = model.stiffness;
  const Matrix& g = model.damping;

  ProjectedBlocks b;
  b.a11 = sym(phi.transpose() * a * phi);
  b.a12 = phi.transpose() * a * psi;
  b.a21 = b.a12.transpose();
  b.a22 = sym(psi.transpose() * a * psi);
  b.g11 = sym(phi.transpose() * g * phi);
  b.g12 = phi.transpose() * g * psi;
  b.g21 = b.g12.transpose();
  b.g22 = sym(psi.transpose() * g * psi);

  const Eigen::Index m = b.m();
  const Eigen::Index k = b.k();
  Eigen::LLT<Matrix> llt(b.a22);
  if (llt.info() != Eigen::Success || rcond(b.a22) < 1e-14) {
    throw SingularMatrix("compute_blocks: A22 is not positive definite");
  }

  b.gmat = Matrix::Zero(2 * k, 2 * k);
  b.gmat.topRightCorner(k, k) = -Matrix::Identity(k, k);
  b.gmat.bottomLeftCorner(k, k) = b.a22;
  b.gmat.bottomRightCorner(k, k) = b.g22;

  const Matrix a22_inv_a21 = llt.solve(b.a21);
  b.a_eff = sym(b.a11 - b.a12 * a22_inv_a21);

  b.left.resize(m, 2 * k);
  b.left << b.a12, b.g12;
  b.right.resize(2 * k, m);
  b.right << a22_inv_a21, -b.g21;
  return b;
}

Matrix eval_kernel(const ProjectedBlocks& blocks, double t) {
  if (!(t >= 0.0)) throw InvalidInput("eval_kernel: t must be non-negative");
  return blocks.left * expm(-t * blocks.gmat) * blocks.right;
}

std::vector<Matrix> eval_kernel_grid(const ProjectedBlocks& blocks, const std::vector<double>& times, Exec exec) {
  for (double t : times) {
    if (!(t >= 0.0)) throw InvalidInput("eval_kernel_grid: times must be non-negative");
  }
  const auto count = static_cast<long>(times.size());
  std::vector<Matrix> out(times.size());
  if (exec == Exec::serial) {
    for (long i = 0; i < count; ++i) out[i] = eval_kernel(blocks, times[i]);
    return out;
  }
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long i = 0; i < count; ++i) out[i] = eval_kernel(blocks, times[i]);
  return out;
}

Matrix kernel_at_zero(const ProjectedBlocks& blocks) {
  return blocks.a12 * blocks.a22.llt().solve(blocks.a21) - blocks.g12 * blocks.g21;
}

std::vector<Matrix> kernel_table(const ProjectedBlocks& blocks, double dt, std::size_t count) {
  if (!(dt > 0.0)) throw InvalidInput("kernel_table: dt must be positive");
  std::vector<Matrix> out;
  out.reserve(count);
  const Matrix step = expm(-dt * blocks.gmat);
  Matrix x = blocks.right;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(blocks.left * x);
    x = step * x;
  }
  return out;
}

KernelMoments compute_moments(const ProjectedBlocks& blocks, int max_order, bool with_inf) {
  if (max_order < 0) throw InvalidInput("compute_moments: negative order");
  const Eigen::Index m = blocks.m();
  const Eigen::Index k = blocks.k();
  KernelMoments out;

  const double scale = blocks.a11.norm() + blocks.a22.norm() + blocks.g11.norm() + blocks.g22.norm() +
                       blocks.a12.norm() + blocks.g12.norm();
  if (blocks.left.norm() <= 1e-13 * std::max(scale, 1e-300)) {
    out.vanishing = true;
    out.m.assign(static_cast<std::size_t>(max_order) + 1, Matrix::Zero(m, m));
    if (with_inf) {
      out.m_inf = Matrix::Zero(m, m);
      out.has_inf = true;
    }
    return out;
  }

  Matrix v = blocks.right;
  double sign = 1.0;
  for (int l = 0; l <= max_order; ++l) {
    Matrix ml = sign * (blocks.left * v);
    out.max_asymmetry = std::max(out.max_asymmetry, asymmetry(ml));
    out.m.push_back(sym(ml));
    v = blocks.gmat * v;
    sign = -sign;
  }

  if (with_inf) {
    const double abscissa = spectral_abscissa(-blocks.gmat);
    if (!(abscissa < 0.0)) {
      throw StabilityError("compute_moments: kernel does not decay; M_inf undefined", abscissa);
    }
    // G^{-1} = [[A22^{-1} G22, A22^{-1}], [-I, 0]]
    Eigen::LLT<Matrix> llt(blocks.a22);
    const Matrix top = llt.solve(blocks.g22 * blocks.right.topRows(k) + blocks.right.bottomRows(k));
    const Matrix bottom = -blocks.right.topRows(k);
    Matrix minf = blocks.left.leftCols(k) * top + blocks.left.rightCols(k) * bottom;
    out.max_asymmetry = std::max(out.max_asymmetry, asymmetry(minf));
    out.m_inf = sym(minf);
    out.has_inf = true;
  }
  return out;
}

double moment_rate(const KernelMoments& moments, const ProjectedBlocks* blocks) {
  const double m0 = moments.m.empty() ? 0.0 : opnorm(moments.m.front());
  if (moments.vanishing || m0 == 0.0) return blocks ? std::max(opnorm(blocks->gmat), 1e-300) : 1.0;
  double rate = std::sqrt(m0);
  for (std::size_t l = 1; l < moments.m.size(); ++l) {
    const double ml = opnorm(moments.m[l]);
    if (ml > 0.0) rate = std::max(rate, std::pow(ml / m0, 1.0 / static_cast<double>(l)));
  }
  return rate;
}

double matched_interval(const KernelMoments& moments, const ProjectedBlocks* blocks) {
  return 0.5 / moment_rate(moments, blocks);
}

}  // namespace gle

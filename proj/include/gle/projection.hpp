#pragma once

#include <string>
#include <vector>

#include "gle/basis.hpp"
#include "gle/model.hpp"

namespace gle {

inline constexpr const char* kMomentConvention = "derivative";  // M_l = d^l theta / dt^l at 0, no 1/l!

struct ProjectedBlocks {
  Matrix a11, a12, a21, a22;
  Matrix g11, g12, g21, g22;
  Matrix gmat;   // [[0, -I], [A22, G22]]
  Matrix a_eff;  // A11 - A12 A22^{-1} A21
  Matrix left;   // [A12, G12]
  Matrix right;  // diag(A22^{-1}, -I) [A21; G21]

  Eigen::Index m() const { return a11.rows(); }
  Eigen::Index k() const { return a22.rows(); }
};

ProjectedBlocks compute_blocks(const FullModel& model, const PartitionBasis& basis);

/// theta(t) = left * exp(-G t) * right.
Matrix eval_kernel(const ProjectedBlocks& blocks, double t);

std::vector<Matrix> eval_kernel_grid(const ProjectedBlocks& blocks, const std::vector<double>& times,
                                     Exec exec = Exec::parallel);

/// theta(0) = A12 A22^{-1} A21 - G12 G21, evaluated without G.
Matrix kernel_at_zero(const ProjectedBlocks& blocks);

/// theta on the uniform grid 0, dt, ..., (count - 1) dt by repeated propagation.
std::vector<Matrix> kernel_table(const ProjectedBlocks& blocks, double dt, std::size_t count);

struct KernelMoments {
  std::vector<Matrix> m;  // M_0 .. M_L
  Matrix m_inf;
  bool has_inf = false;
  bool vanishing = false;
  double max_asymmetry = 0.0;
  std::string convention = kMomentConvention;

  Eigen::Index dim() const { return m.empty() ? m_inf.rows() : m.front().rows(); }
};

/// Moments M_0..M_L and, when with_inf is set, M_inf = left G^{-1} right.
/// M_inf requires -G Hurwitz (StabilityError otherwise).
KernelMoments compute_moments(const ProjectedBlocks& blocks, int max_order, bool with_inf = true);

/// Characteristic rate of the kernel from its moments:
/// max(sqrt|M0|, max_l (|M_l| / |M0|)^{1/l}). Falls back to |G| when theta vanishes.
double moment_rate(const KernelMoments& moments, const ProjectedBlocks* blocks = nullptr);

/// Interval [0, t*] on which the matched Taylor terms dominate; t* = 0.5 / moment_rate.
double matched_interval(const KernelMoments& moments, const ProjectedBlocks* blocks = nullptr);

}  // namespace gle

#pragma once

#include <vector>

#include "gle/model.hpp"

namespace gle {

struct PartitionBasis {
  Matrix phi;  // n x m, coarse-grained subspace
  Matrix psi;  // n x (n - m), orthogonal complement

  Eigen::Index full_dim() const { return phi.rows(); }
  Eigen::Index cg_dim() const { return phi.cols(); }
};

/// Rigid-block grouping of atoms. Coordinates are stored atom-major (x, y, z).
struct BlockAssignment {
  std::vector<int> group;  // one entry per coordinate
  Matrix positions;        // (n / 3) x 3 reference positions
};

struct RtbBasis {
  Matrix phi;
  std::vector<int> group_ids;       // sorted distinct groups
  std::vector<int> modes_per_group;
  std::vector<bool> degenerate;     // fewer than six modes survived
};

/// Three translations and three rotations per group about the unweighted centroid,
/// orthonormalized within each group. Columns of dependent generators are dropped.
RtbBasis build_rtb_basis(const BlockAssignment& assign, double drop_tol = 1e-8);

/// Eigenvectors of A for the m smallest eigenvalues, first nonzero entry positive.
Matrix build_modal_basis(const FullModel& model, Eigen::Index m);

/// Orthonormal basis of the orthogonal complement of span(phi).
Matrix complement_basis(const Matrix& phi);

PartitionBasis make_partition(const Matrix& phi);

struct PartitionCheck {
  double phi_orthonormality = 0.0;
  double psi_orthonormality = 0.0;
  double cross = 0.0;
  double completeness = 0.0;
  bool ok(double tol = 1e-10) const {
    return phi_orthonormality <= tol && psi_orthonormality <= tol && cross <= tol && completeness <= tol;
  }
};

PartitionCheck check_partition(const PartitionBasis& basis);

}  // namespace gle

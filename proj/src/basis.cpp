#include "gle/basis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gle/errors.hpp"

namespace gle {

namespace {

void fix_signs(Matrix& q, double tol = 1e-12) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      if (std::abs(q(i, j)) > tol) {
        if (q(i, j) < 0) q.col(j) *= -1.0;
        break;
      }
    }
  }
}

// Modified Gram-Schmidt with one reorthogonalization pass. Columns whose
// residual norm falls below drop_tol times their original norm are dropped.
Matrix orthonormalize(const Matrix& gen, double drop_tol) {
  Matrix q(gen.rows(), 0);
  for (Eigen::Index j = 0; j < gen.cols(); ++j) {
    Vector v = gen.col(j);
    const double original = v.norm();
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < q.cols(); ++k) v -= q.col(k).dot(v) * q.col(k);
    }
    const double r = v.norm();
    if (r <= drop_tol * original) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = v / r;
  }
  return q;
}

}  // namespace

RtbBasis build_rtb_basis(const BlockAssignment& assign, double drop_tol) {
  const auto n = static_cast<Eigen::Index>(assign.group.size());
  if (n == 0 || n % 3 != 0) throw InvalidInput("rtb: coordinate count must be a positive multiple of 3");
  if (assign.positions.rows() != n / 3 || assign.positions.cols() != 3)
    throw InvalidInput("rtb: positions must be (n/3) x 3");
  for (Eigen::Index a = 0; a < n / 3; ++a) {
    const int g = assign.group[3 * a];
    if (assign.group[3 * a + 1] != g || assign.group[3 * a + 2] != g)
      throw InvalidInput("rtb: the three coordinates of an atom must share a group");
  }

  std::map<int, std::vector<Eigen::Index>> atoms;
  for (Eigen::Index a = 0; a < n / 3; ++a) atoms[assign.group[3 * a]].push_back(a);

  RtbBasis out;
  std::vector<Matrix> blocks;
  for (const auto& [gid, members] : atoms) {
    Eigen::RowVector3d centroid = Eigen::RowVector3d::Zero();
    for (auto a : members) centroid += assign.positions.row(a);
    centroid /= static_cast<double>(members.size());

    Matrix gen = Matrix::Zero(n, 6);
    for (auto a : members) {
      const Eigen::Vector3d r = (assign.positions.row(a) - centroid).transpose();
      for (int k = 0; k < 3; ++k) {
        gen(3 * a + k, k) = 1.0;
        const Eigen::Vector3d rot = r.cross(Eigen::Vector3d::Unit(k));
        gen.block(3 * a, 3 + k, 3, 1) = rot;
      }
    }
    Matrix q = orthonormalize(gen, drop_tol);
    out.group_ids.push_back(gid);
    out.modes_per_group.push_back(static_cast<int>(q.cols()));
    out.degenerate.push_back(q.cols() < 6);
    blocks.push_back(std::move(q));
  }

  Eigen::Index m = 0;
  for (const auto& b : blocks) m += b.cols();
  out.phi = Matrix::Zero(n, m);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    out.phi.middleCols(col, b.cols()) = b;
    col += b.cols();
  }
  return out;
}

Matrix build_modal_basis(const FullModel& model, Eigen::Index m) {
  const Eigen::Index n = model.dim();
  if (m < 1 || m >= n) throw InvalidInput("modal basis: require 1 <= m < n");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (model.stiffness + model.stiffness.transpose()));
  if (es.info() != Eigen::Success) throw InvalidInput("modal basis: eigendecomposition failed");
  Matrix phi = es.eigenvectors().leftCols(m);
  fix_signs(phi);
  return phi;
}

Matrix complement_basis(const Matrix& phi) {
  const Eigen::Index n = phi.rows();
  const Eigen::Index m = phi.cols();
  if (m >= n) throw InvalidInput("complement: phi must have fewer columns than rows");
  if (m > 0) {
    Eigen::ColPivHouseholderQR<Matrix> rank_check(phi);
    rank_check.setThreshold(1e-10);
    if (rank_check.rank() < m) throw InvalidInput("complement: phi is rank deficient");
  }
  Eigen::HouseholderQR<Matrix> qr(phi);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix psi = q.rightCols(n - m);
  // Re-project to remove the residual component along phi.
  psi -= phi * (phi.transpose() * psi);
  Eigen::HouseholderQR<Matrix> qr2(psi);
  psi = qr2.householderQ() * Matrix::Identity(n, n - m);
  fix_signs(psi);
  return psi;
}

PartitionBasis make_partition(const Matrix& phi) {
  if (phi.cols() > 0) {
    const double defect = (phi.transpose() * phi - Matrix::Identity(phi.cols(), phi.cols())).norm();
    if (defect > 1e-8) throw InvalidInput("partition: phi is not orthonormal");
  }
  return {phi, complement_basis(phi)};
}

PartitionCheck check_partition(const PartitionBasis& b) {
  PartitionCheck c;
  const auto n = b.phi.rows();
  const auto m = b.phi.cols();
  const auto k = b.psi.cols();
  if (b.psi.rows() != n || m + k != n) {
    c.completeness = std::numeric_limits<double>::infinity();
    return c;
  }
  c.phi_orthonormality = (b.phi.transpose() * b.phi - Matrix::Identity(m, m)).cwiseAbs().maxCoeff();
  c.psi_orthonormality = k > 0 ? (b.psi.transpose() * b.psi - Matrix::Identity(k, k)).cwiseAbs().maxCoeff() : 0.0;
  c.cross = (m > 0 && k > 0) ? (b.phi.transpose() * b.psi).cwiseAbs().maxCoeff() : 0.0;
  c.completeness =
      (b.phi * b.phi.transpose() + b.psi * b.psi.transpose() - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  return c;
}

}  // namespace gle

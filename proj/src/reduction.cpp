#include "gle/reduction.hpp"

#include <omp.h>

#include <cmath>
#include <string>

#include "gle/errors.hpp"

namespace gle {

namespace {

Matrix sym(const Matrix& x) { return 0.5 * (x + x.transpose()); }

double opnorm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(x).singularValues()(0);
}

// Characteristic rate of M_0..M_{count-1}.
double rate_from(const std::vector<Matrix>& m, std::size_t count) {
  const double m0 = opnorm(m[0]);
  double rate = 0.0;
  if (m0 > 0.0) {
    rate = std::sqrt(m0);
    for (std::size_t l = 1; l < count; ++l) {
      const double ml = opnorm(m[l]);
      if (ml > 0.0) rate = std::max(rate, std::pow(ml / m0, 1.0 / static_cast<double>(l)));
    }
  } else {
    for (std::size_t l = 0; l < count; ++l) {
      const double ml = opnorm(m[l]);
      if (ml > 0.0) rate = std::max(rate, std::pow(ml, 1.0 / static_cast<double>(l + 2)));
    }
  }
  return rate > 0.0 ? rate : 1.0;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Position of z_k inside w = (z_{n-1}, ..., z_0).
Eigen::Index slot(int n, int k) { return n - 1 - k; }

// Symmetric Qtilde with last block column pinned to chat. The free leading
// block is the minimum-norm least-squares solution that zeroes the off-block-
// diagonal blocks of Bhat Q + Q Bhat^T.
Matrix build_qtilde(const Matrix& bhat, const Matrix& chat, int n, Eigen::Index m, FitDiagnostics& diag) {
  const Eigen::Index nm = bhat.rows();
  const Eigen::Index p = nm - m;
  Matrix q = Matrix::Zero(nm, nm);
  q.rightCols(m) = chat;
  q.bottomRows(m) = chat.transpose();
  q.bottomRightCorner(m, m) = sym(chat.bottomRows(m));
  if (p == 0) return q;

  auto off_blocks = [&](const Matrix& s) {
    Vector out(n * (n - 1) / 2 * m * m);
    Eigen::Index r = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const Matrix blk = s.block(i * m, j * m, m, m);
        for (Eigen::Index a = 0; a < m; ++a)
          for (Eigen::Index b = 0; b < m; ++b) out(r++) = blk(a, b);
      }
    }
    return out;
  };

  const Vector s0 = off_blocks(bhat * q + q * bhat.transpose());
  const Eigen::Index unknowns = p * (p + 1) / 2;
  Matrix lhs(s0.size(), unknowns);
  Eigen::Index col = 0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      Matrix e = Matrix::Zero(nm, nm);
      e(a, b) = 1.0;
      e(b, a) = 1.0;
      lhs.col(col++) = off_blocks(bhat * e + e * bhat.transpose());
    }
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(lhs);
  cod.setThreshold(1e-10);
  const Vector x = cod.solve(-s0);
  diag.qaux_nonunique = cod.rank() < unknowns;
  diag.qaux_constraint_residual = (lhs * x + s0).norm() / std::max(s0.norm(), 1e-300);
  if (diag.qaux_nonunique) diag.warnings.push_back("auxiliary covariance constraints are rank deficient");

  col = 0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      q(a, b) = x(col);
      q(b, a) = x(col);
      ++col;
    }
  }
  return q;
}

ReducedModel base_model(int order, const Matrix& a_eff, const Matrix& gamma11, double kbt) {
  if (a_eff.rows() != a_eff.cols() || gamma11.rows() != a_eff.rows() || gamma11.cols() != a_eff.rows())
    throw InvalidInput("reduction: A_eff and Gamma11 must be square and conformal");
  if (!(kbt >= 0.0)) throw InvalidInput("reduction: kBT must be non-negative");
  ReducedModel r;
  r.order = order;
  r.m = a_eff.rows();
  r.kbt = kbt;
  r.a_eff = a_eff;
  r.gamma11 = gamma11;
  return r;
}

}  // namespace

Matrix ReducedModel::sigma() const {
  if (order == 0) return 2.0 * kbt * (gamma11 + gamma_add);
  const Eigen::Index nm = aux_dim();
  Matrix s = Matrix::Zero(m + nm, m + nm);
  s.topLeftCorner(m, m) = 2.0 * kbt * gamma11;
  s.bottomRightCorner(nm, nm) = kbt * sigma_tilde;
  return s;
}

Matrix ReducedModel::e_last() const {
  Matrix e = Matrix::Zero(aux_dim(), m);
  if (aux_dim() > 0) e.bottomRows(m).setIdentity();
  return e;
}

ReducedModel fit_markovian(const KernelMoments& moments, const Matrix& a_eff, const Matrix& gamma11, double kbt) {
  if (!moments.has_inf) throw InvalidInput("fit_markovian: M_inf is required");
  ReducedModel r = base_model(0, a_eff, gamma11, kbt);
  if (moments.m_inf.rows() != r.m) throw InvalidInput("fit_markovian: moment dimension mismatch");
  r.vanishing = moments.vanishing;
  r.gamma_add = moments.m_inf;
  const Matrix total = r.gamma11 + r.gamma_add;
  const double lam = min_sym_eigenvalue(total);
  if (lam < -1e-10 * std::max(total.norm(), 1e-300)) {
    r.diagnostics.warnings.push_back("total friction has eigenvalue " + std::to_string(lam) +
                                     "; noise factorization clips it");
  }
  r.diagnostics.sigma_min_eigenvalue = lam;
  return r;
}

ReducedModel fit_markovian(const ProjectedBlocks& blocks, const KernelMoments& moments, double kbt) {
  return fit_markovian(moments, blocks.a_eff, blocks.g11, kbt);
}

void assemble_companion(const std::vector<Matrix>& b, const std::vector<Matrix>& c, Matrix& bhat, Matrix& chat) {
  const int n = static_cast<int>(b.size());
  if (n == 0 || c.size() != b.size()) throw InvalidInput("companion: need n >= 1 matching B and C blocks");
  const Eigen::Index m = b[0].rows();
  bhat = Matrix::Zero(n * m, n * m);
  chat = Matrix::Zero(n * m, m);
  for (int k = 0; k < n; ++k) {
    const Eigen::Index row = slot(n, k) * m;
    bhat.block(row, slot(n, 0) * m, m, m) += b[k];
    if (k + 1 < n) bhat.block(row, slot(n, k + 1) * m, m, m) += Matrix::Identity(m, m);
    chat.block(row, 0, m, m) = c[k];
  }
}

ReducedModel fit_rational(const KernelMoments& moments, int order, const Matrix& a_eff, const Matrix& gamma11,
                          double kbt) {
  if (order < 1) throw InvalidInput("fit_rational: order must be >= 1");
  const int n = order;
  const auto needed = static_cast<std::size_t>(2 * n - 1);
  if (moments.m.size() < needed || !moments.has_inf) {
    throw InvalidInput("fit_rational: order " + std::to_string(n) + " needs M_0..M_" + std::to_string(2 * n - 2) +
                       " and M_inf");
  }
  ReducedModel r = base_model(n, a_eff, gamma11, kbt);
  const Eigen::Index m = r.m;
  if (moments.dim() != m) throw InvalidInput("fit_rational: moment dimension mismatch");
  r.vanishing = moments.vanishing;
  auto& diag = r.diagnostics;

  if (moments.vanishing) {
    for (int k = 0; k < n; ++k) {
      r.b.push_back(-binomial(n, k + 1) * Matrix::Identity(m, m));
      r.c.push_back(Matrix::Zero(m, m));
    }
    assemble_companion(r.b, r.c, r.bhat, r.chat);
    r.qtilde = Matrix::Zero(n * m, n * m);
    r.sigma_tilde = Matrix::Zero(n * m, n * m);
    diag.hurwitz_margin = 1.0;
    diag.warnings.push_back("memory kernel vanishes; auxiliary block decoupled");
    return r;
  }

  // Nondimensionalize: M~_l = tau^{l+2} M_l, M~_inf = tau M_inf.
  const double tau = 1.0 / rate_from(moments.m, needed);
  diag.time_scale = tau;
  std::vector<Matrix> ms(needed);
  for (std::size_t l = 0; l < needed; ++l) ms[l] = std::pow(tau, static_cast<double>(l) + 2.0) * moments.m[l];
  const Matrix minf = tau * moments.m_inf;
  auto mom = [&](int l) -> Matrix { return l < 0 ? Matrix(-minf) : ms[static_cast<std::size_t>(l)]; };

  if (n == 1) {
    diag.system_rcond = rcond(minf);
    if (!(diag.system_rcond > 1e-12)) {
      throw SingularMoment("fit_rational: M_inf is singular (rcond " + std::to_string(diag.system_rcond) + ")");
    }
  }

  // X K = R with X = [B_0 ... B_{n-1}], K_{j,c} = M_{n-2-j+c}, R = [M_{n-1} ... M_{2n-2}].
  Matrix kmat(n * m, n * m);
  Matrix rhs(m, n * m);
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < n; ++c) kmat.block(j * m, c * m, m, m) = mom(n - 2 - j + c);
  for (int c = 0; c < n; ++c) rhs.block(0, c * m, m, m) = mom(n - 1 + c);

  Eigen::PartialPivLU<Matrix> lu(kmat.transpose());
  if (n > 1) {
    diag.system_rcond = rcond(kmat);
    if (!(diag.system_rcond > 1e-13)) {
      throw SingularSystem("fit_rational: moment system is singular (rcond " + std::to_string(diag.system_rcond) +
                           ")");
    }
  }
  const Matrix x = lu.solve(rhs.transpose()).transpose();
  diag.moment_residual = (x * kmat - rhs).norm() / std::max(rhs.norm(), 1e-300);
  if (!(diag.moment_residual <= 1e-10)) {
    throw SingularSystem("fit_rational: moment equations not satisfied (residual " +
                         std::to_string(diag.moment_residual) + ")");
  }

  std::vector<Matrix> bs(n), cs(n);
  for (int k = 0; k < n; ++k) bs[k] = x.block(0, k * m, m, m);
  for (int k = 0; k < n; ++k) {
    Matrix ck = mom(k);
    for (int j = 0; j < k; ++j) ck -= bs[j] * mom(k - 1 - j);
    cs[k] = ck;
  }

  Matrix bhat_s, chat_s;
  assemble_companion(bs, cs, bhat_s, chat_s);
  const double abscissa = spectral_abscissa(bhat_s);
  if (!(abscissa < 0.0)) {
    throw StabilityError("fit_rational: order-" + std::to_string(n) + " embedding is not Hurwitz", abscissa / tau);
  }
  diag.hurwitz_margin = -abscissa / tau;

  {
    const Matrix el = Matrix::Identity(n * m, n * m).rightCols(m);
    double scale = minf.norm();
    for (const auto& mm : ms) scale = std::max(scale, mm.norm());
    Matrix v = chat_s;
    double worst = 0.0;
    for (std::size_t l = 0; l < needed; ++l) {
      worst = std::max(worst, (el.transpose() * v - ms[l]).norm());
      v = bhat_s * v;
    }
    const Matrix inf_fit = -el.transpose() * bhat_s.partialPivLu().solve(chat_s);
    worst = std::max(worst, (inf_fit - minf).norm());
    diag.matching_residual = worst / std::max(scale, 1e-300);
  }

  Matrix qs = build_qtilde(bhat_s, chat_s, n, m, diag);
  Matrix sig_s = sym(-(bhat_s * qs + qs * bhat_s.transpose()));
  const double sig_norm = opnorm(sig_s);
  const double sig_min = min_sym_eigenvalue(sig_s);
  diag.sigma_min_eigenvalue = sig_norm > 0.0 ? sig_min / sig_norm : 0.0;
  r.fdt_feasible = diag.sigma_min_eigenvalue >= -1e-9;
  if (!r.fdt_feasible) {
    diag.warnings.push_back("auxiliary noise covariance is indefinite (relative min eigenvalue " +
                            std::to_string(diag.sigma_min_eigenvalue) + ")");
  }
  const double q_min = min_sym_eigenvalue(qs);
  if (q_min < -1e-9 * std::max(opnorm(qs), 1e-300)) {
    diag.warnings.push_back("auxiliary covariance is indefinite");
  }

  // Back to physical units: z_k carries tau^{-(k+1)}.
  Vector s(n * m);
  for (int k = 0; k < n; ++k) s.segment(slot(n, k) * m, m).setConstant(std::pow(tau, -(k + 1.0)));
  for (int k = 0; k < n; ++k) {
    r.b.push_back(bs[k] * std::pow(tau, -(k + 1.0)));
    r.c.push_back(cs[k] * std::pow(tau, -(k + 2.0)));
  }
  assemble_companion(r.b, r.c, r.bhat, r.chat);
  r.qtilde = sym(s.asDiagonal() * qs * s.asDiagonal());
  r.sigma_tilde = sym(s.asDiagonal() * sig_s * s.asDiagonal() / tau);
  return r;
}

ReducedModel fit_rational(const ProjectedBlocks& blocks, const KernelMoments& moments, int order, double kbt) {
  return fit_rational(moments, order, blocks.a_eff, blocks.g11, kbt);
}

Matrix ExtendedSystem::drift() const {
  const Eigen::Index d = dim();
  Matrix out = Matrix::Zero(d, d);
  out.block(0, m, m, m).setIdentity();
  out.block(m, 0, m, m) = -stiffness;
  out.bottomRightCorner(m + aux, m + aux) = ou_drift;
  return out;
}

Matrix ExtendedSystem::noise() const {
  const Eigen::Index d = dim();
  Matrix out = Matrix::Zero(d, d);
  out.bottomRightCorner(m + aux, m + aux) = ou_noise;
  return out;
}

Matrix ExtendedSystem::stationary() const {
  const Eigen::Index d = dim();
  Matrix out = Matrix::Zero(d, d);
  out.topLeftCorner(m, m) = position_cov;
  out.bottomRightCorner(m + aux, m + aux) = y_stationary;
  return out;
}

Matrix extended_drift(const ReducedModel& r) {
  const Eigen::Index m = r.m;
  const Eigen::Index nm = r.order == 0 ? 0 : r.aux_dim();
  Matrix d = Matrix::Zero(2 * m + nm, 2 * m + nm);
  d.block(0, m, m, m).setIdentity();
  d.block(m, 0, m, m) = -r.a_eff;
  if (r.order == 0) {
    d.block(m, m, m, m) = -(r.gamma11 + r.gamma_add);
    return d;
  }
  d.block(m, m, m, m) = -r.gamma11;
  d.block(m, 2 * m, m, nm) = -r.e_last().transpose();
  d.block(2 * m, m, nm, m) = r.chat;
  d.bottomRightCorner(nm, nm) = r.bhat;
  return d;
}

ExtendedSystem assemble_extended(const ReducedModel& r) {
  if (r.order >= 1 && !r.fdt_feasible) {
    throw FdtInfeasible("assemble_extended: auxiliary noise covariance is not PSD",
                        r.diagnostics.sigma_min_eigenvalue);
  }
  ExtendedSystem e;
  e.m = r.m;
  e.aux = r.order == 0 ? 0 : r.aux_dim();
  e.kbt = r.kbt;
  e.stiffness = r.a_eff;
  Eigen::LLT<Matrix> llt(r.a_eff);
  if (llt.info() != Eigen::Success) throw InvalidInput("assemble_extended: A_eff is not positive definite");
  e.position_cov = sym(r.kbt * llt.solve(Matrix::Identity(r.m, r.m)));

  const Eigen::Index m = r.m;
  const Eigen::Index nm = e.aux;
  e.ou_drift = Matrix::Zero(m + nm, m + nm);
  e.ou_noise = Matrix::Zero(m + nm, m + nm);
  e.y_stationary = Matrix::Zero(m + nm, m + nm);
  e.y_stationary.topLeftCorner(m, m) = r.kbt * Matrix::Identity(m, m);
  if (r.order == 0) {
    e.ou_drift = -(r.gamma11 + r.gamma_add);
    e.ou_noise = 2.0 * r.kbt * sym(r.gamma11 + r.gamma_add);
    return e;
  }
  e.ou_drift.topLeftCorner(m, m) = -r.gamma11;
  e.ou_drift.topRightCorner(m, nm) = -r.e_last().transpose();
  e.ou_drift.bottomLeftCorner(nm, m) = r.chat;
  e.ou_drift.bottomRightCorner(nm, nm) = r.bhat;
  e.ou_noise.topLeftCorner(m, m) = 2.0 * r.kbt * r.gamma11;
  e.ou_noise.bottomRightCorner(nm, nm) = r.sigma_aux();
  e.y_stationary.bottomRightCorner(nm, nm) = r.qaux();
  return e;
}

Matrix eval_approx_kernel(const ReducedModel& r, double t) {
  if (r.order < 1) throw InvalidInput("eval_approx_kernel: order-0 kernel is a delta function");
  if (!(t >= 0.0)) throw InvalidInput("eval_approx_kernel: t must be non-negative");
  return expm(t * r.bhat).bottomRows(r.m) * r.chat;
}

std::vector<Matrix> eval_approx_kernel_grid(const ReducedModel& r, const std::vector<double>& times, Exec exec) {
  if (r.order < 1) throw InvalidInput("eval_approx_kernel: order-0 kernel is a delta function");
  const auto count = static_cast<long>(times.size());
  std::vector<Matrix> out(times.size());
  if (exec == Exec::serial) {
    for (long i = 0; i < count; ++i) out[i] = eval_approx_kernel(r, times[i]);
    return out;
  }
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (long i = 0; i < count; ++i) out[i] = eval_approx_kernel(r, times[i]);
  return out;
}

FdtResidual fdt_residual(const ReducedModel& r) {
  FdtResidual f;
  if (r.order == 0) return f;
  const Matrix& q = r.qtilde;
  const Matrix& s = r.sigma_tilde;
  const double s_norm = std::max(s.norm(), 1e-300);
  f.lyapunov = (r.bhat * q + q * r.bhat.transpose() + s).norm() / s_norm;
  f.pinning = (q * r.e_last() - r.chat).norm() / std::max(r.chat.norm(), 1e-300);
  if (s.norm() == 0.0 && q.norm() == 0.0) return f;
  const Matrix x = solve_lyapunov(r.bhat, -s);
  f.stationary_mismatch = (x - q).norm() / std::max(q.norm(), 1e-300);
  return f;
}

}  // namespace gle

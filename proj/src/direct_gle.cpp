#include "gle/direct_gle.hpp"

#include <random>

#include "gle/errors.hpp"
#include "gle/matops.hpp"

namespace gle {

Trajectory simulate_direct_gle(const DirectGleProblem& pr, const DirectGleConfig& cfg, const Vector& q0,
                               const Vector& p0) {
  const Eigen::Index m = pr.a_eff.rows();
  const long steps = cfg.steps;
  if (!(cfg.dt > 0.0) || steps < 1) throw InvalidInput("direct_gle: need dt > 0 and steps >= 1");
  if (static_cast<long>(pr.kernel.size()) < steps + 1) throw InvalidInput("direct_gle: kernel table too short");
  if (q0.size() != m || p0.size() != m || pr.gamma11.rows() != m) throw InvalidInput("direct_gle: size mismatch");
  const double dt = cfg.dt;

  // Kernel packed as [theta_1 theta_2 ... theta_steps], history stored newest first.
  Matrix theta_row(m, m * steps);
  for (long j = 1; j <= steps; ++j) theta_row.middleCols((j - 1) * m, m) = pr.kernel[j];
  Vector history = Vector::Zero(m * (steps + 1));
  auto slot = [&](long k) { return (steps - k) * m; };

  const bool noisy = pr.kbt > 0.0;
  Matrix white;
  Matrix colored;
  Vector colored_draw;
  std::mt19937_64 engine(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  if (noisy) {
    white = factor_psd(2.0 * pr.kbt * pr.gamma11 / dt, 1e-8);
    if (cfg.colored_noise) {
      if (m * steps > 4000) throw InvalidInput("direct_gle: colored noise factorization too large");
      Matrix cov(m * steps, m * steps);
      for (long i = 0; i < steps; ++i)
        for (long j = 0; j < steps; ++j) {
          const Matrix& th = pr.kernel[std::abs(i - j)];
          cov.block(i * m, j * m, m, m) = pr.kbt * (i >= j ? th : Matrix(th.transpose()));
        }
      colored = factor_psd(cov, 1e-6);
      Vector xi(m * steps);
      for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(engine);
      colored_draw = colored * xi;
    }
  }

  Trajectory tr;
  tr.dt = dt;
  tr.positions.resize(steps + 1, m);
  tr.velocities = Matrix(steps + 1, m);
  Vector q = q0, p = p0, mem(m), force(m), xi(m);
  tr.positions.row(0) = q.transpose();
  tr.velocities->row(0) = p.transpose();
  history.segment(slot(0), m) = p;

  for (long k = 0; k < steps; ++k) {
    mem.setZero();
    if (k >= 1) {
      mem.noalias() = 0.5 * (pr.kernel[0] * p) + 0.5 * (pr.kernel[k] * p0);
      if (k >= 2) mem.noalias() += theta_row.leftCols((k - 1) * m) * history.segment(slot(k - 1), (k - 1) * m);
      mem *= dt;
    }
    force.noalias() = -(pr.a_eff * q) - pr.gamma11 * p - mem;
    if (noisy) {
      for (Eigen::Index i = 0; i < m; ++i) xi(i) = normal(engine);
      force.noalias() += white * xi;
      if (cfg.colored_noise) force += colored_draw.segment(k * m, m);
    }
    p += dt * force;
    q += dt * p;
    history.segment(slot(k + 1), m) = p;
    tr.positions.row(k + 1) = q.transpose();
    tr.velocities->row(k + 1) = p.transpose();
  }
  return tr;
}

}  // namespace gle

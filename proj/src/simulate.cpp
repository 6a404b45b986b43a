#include "gle/simulate.hpp"

#include <omp.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "gle/errors.hpp"

namespace gle {

namespace {

void check_config(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidInput("simulate: dt must be positive");
  if (cfg.steps < 1) throw InvalidInput("simulate: steps must be >= 1");
  if (cfg.ensemble < 1) throw InvalidInput("simulate: ensemble must be >= 1");
  if (cfg.record_stride < 1) throw InvalidInput("simulate: record_stride must be >= 1");
}

void fill_normal(Vector& xi, std::mt19937_64& engine) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = normal(engine);
}

// Exact OU step y <- E y + L xi with L L^T = S - E S E^T.
struct OuStep {
  Matrix prop;
  Matrix chol;
  bool noisy = false;

  OuStep(const Matrix& drift, const Matrix& stationary, double dt) {
    prop = expm(dt * drift);
    const Matrix cov = stationary - prop * stationary * prop.transpose();
    noisy = cov.cwiseAbs().maxCoeff() > 0.0;
    if (noisy) chol = factor_psd(0.5 * (cov + cov.transpose()), 1e-8);
  }
};

template <class Body>
void for_members(int count, Exec exec, Body body) {
  if (exec == Exec::serial) {
    for (int k = 0; k < count; ++k) body(k);
    return;
  }
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
  for (int k = 0; k < count; ++k) body(k);
}

}  // namespace

ExtendedSystem as_linear_system(const FullModel& model) {
  require_valid(model);
  const FullModel unit = mass_scale(model);
  const Eigen::Index n = unit.dim();
  ExtendedSystem e;
  e.m = n;
  e.aux = 0;
  e.kbt = unit.kbt;
  e.stiffness = unit.stiffness;
  e.ou_drift = -unit.damping;
  e.ou_noise = 2.0 * unit.kbt * unit.damping;
  e.y_stationary = unit.kbt * Matrix::Identity(n, n);
  const Matrix inv = unit.stiffness.llt().solve(Matrix::Identity(n, n));
  e.position_cov = unit.kbt * 0.5 * (inv + inv.transpose());
  return e;
}

std::mt19937_64 member_engine(std::uint64_t seed, std::uint64_t member) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member), static_cast<std::uint32_t>(member >> 32)};
  return std::mt19937_64(seq);
}

Vector sample_stationary_initial(const ExtendedSystem& sys, std::mt19937_64& engine) {
  const Matrix lq = factor_psd(sys.position_cov, 1e-8);
  const Matrix ly = factor_psd(sys.y_stationary, 1e-8);
  Vector xi(sys.dim());
  fill_normal(xi, engine);
  Vector x(sys.dim());
  x.head(sys.m) = lq * xi.head(sys.m);
  x.tail(sys.m + sys.aux) = ly * xi.tail(sys.m + sys.aux);
  return x;
}

Vector sample_stationary_initial(const ExtendedSystem& sys, std::uint64_t seed) {
  auto engine = member_engine(seed, 0);
  return sample_stationary_initial(sys, engine);
}

std::string dt_stability_warning(const Matrix& stiffness, double dt) {
  if (stiffness.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (stiffness + stiffness.transpose()), Eigen::EigenvaluesOnly);
  const double omega = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
  if (dt * omega >= 2.0) {
    return "dt * omega_max = " + std::to_string(dt * omega) + " exceeds the splitting stability limit 2";
  }
  return {};
}

LinearIntegrator::LinearIntegrator(const ExtendedSystem& sys, double dt)
    : m_(sys.m), ny_(sys.m + sys.aux), dt_(dt), stiffness_(sys.stiffness) {
  if (!(dt > 0.0)) throw InvalidInput("simulate: dt must be positive");
  const OuStep ou(sys.ou_drift, sys.y_stationary, dt);
  prop_ = ou.prop;
  chol_ = ou.chol;
  noisy_ = ou.noisy;
}

Trajectory LinearIntegrator::run(Vector x, long steps, long stride, std::mt19937_64& engine) const {
  if (x.size() != m_ + ny_) throw InvalidInput("simulate: state dimension mismatch");
  const long rows = steps / stride + 1;
  const double h = 0.5 * dt_;
  Vector q = x.head(m_);
  Vector y = x.tail(ny_);
  Vector ynew(ny_), xi(ny_);
  Trajectory tr;
  tr.dt = dt_ * static_cast<double>(stride);
  tr.positions.resize(rows, m_);
  tr.velocities = Matrix(rows, m_);
  tr.positions.row(0) = q.transpose();
  tr.velocities->row(0) = y.head(m_).transpose();
  long rec = 1;
  for (long step = 1; step <= steps; ++step) {
    y.head(m_).noalias() -= h * (stiffness_ * q);
    q.noalias() += h * y.head(m_);
    ynew.noalias() = prop_ * y;
    if (noisy_) {
      fill_normal(xi, engine);
      ynew.noalias() += chol_ * xi;
    }
    y.swap(ynew);
    q.noalias() += h * y.head(m_);
    y.head(m_).noalias() -= h * (stiffness_ * q);
    if (step % stride == 0) {
      tr.positions.row(rec) = q.transpose();
      tr.velocities->row(rec) = y.head(m_).transpose();
      ++rec;
    }
  }
  return tr;
}

SimResult simulate_system(const ExtendedSystem& sys, const SimConfig& cfg, Exec exec) {
  check_config(cfg);
  const LinearIntegrator integrator(sys, cfg.dt);
  SimResult res;
  if (auto w = dt_stability_warning(sys.stiffness, cfg.dt); !w.empty()) res.warnings.push_back(w);
  res.members.resize(cfg.ensemble);
  for_members(cfg.ensemble, exec, [&](int k) {
    auto engine = member_engine(cfg.seed, static_cast<std::uint64_t>(k));
    Vector x0 = sample_stationary_initial(sys, engine);
    res.members[k] = integrator.run(std::move(x0), cfg.steps, cfg.record_stride, engine);
  });
  return res;
}

SimResult simulate_full(const FullModel& model, const SimConfig& cfg, Exec exec) {
  return simulate_system(as_linear_system(model), cfg, exec);
}

SimResult simulate_reduced(const ReducedModel& reduced, const SimConfig& cfg, Exec exec) {
  return simulate_system(assemble_extended(reduced), cfg, exec);
}

std::vector<Matrix> simulate_aux_noise(const ReducedModel& reduced, const SimConfig& cfg, Exec exec) {
  check_config(cfg);
  if (reduced.order < 1) throw InvalidInput("simulate_aux_noise: order-0 models have no auxiliary block");
  if (!reduced.fdt_feasible) {
    throw FdtInfeasible("simulate_aux_noise: auxiliary noise covariance is not PSD",
                        reduced.diagnostics.sigma_min_eigenvalue);
  }
  const Eigen::Index m = reduced.m;
  const Eigen::Index nm = reduced.aux_dim();
  const Matrix qaux = reduced.qaux();
  const OuStep ou(reduced.bhat, qaux, cfg.dt);
  const Matrix l0 = factor_psd(qaux, 1e-8);
  const long rows = cfg.steps / cfg.record_stride + 1;
  std::vector<Matrix> out(cfg.ensemble);

  for_members(cfg.ensemble, exec, [&](int k) {
    auto engine = member_engine(cfg.seed, static_cast<std::uint64_t>(k));
    Vector xi(nm), w(nm), wnew(nm);
    fill_normal(xi, engine);
    w = l0 * xi;
    Matrix& rec = out[k];
    rec.resize(rows, m);
    rec.row(0) = w.tail(m).transpose();
    long r = 1;
    for (long step = 1; step <= cfg.steps; ++step) {
      wnew.noalias() = ou.prop * w;
      if (ou.noisy) {
        fill_normal(xi, engine);
        wnew.noalias() += ou.chol * xi;
      }
      w.swap(wnew);
      if (step % cfg.record_stride == 0) rec.row(r++) = w.tail(m).transpose();
    }
  });
  return out;
}

}  // namespace gle

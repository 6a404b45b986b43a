#include "gle/correlation.hpp"

#include <omp.h>

#include <cmath>

#include "gle/errors.hpp"

namespace gle {

const char* to_string(CorrelationKind kind) {
  switch (kind) {
    case CorrelationKind::full_exact: return "full-exact";
    case CorrelationKind::reduced_analytic: return "reduced-analytic";
    case CorrelationKind::empirical: return "empirical";
  }
  return "unknown";
}

namespace {

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0)) throw InvalidInput("correlation: times must be non-negative");
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidInput("correlation: times must be increasing");
  }
}

// rows of exp(t drift) * cols, evaluated per grid point.
std::vector<Matrix> propagate(const Matrix& drift, const Matrix& rows, const Matrix& cols,
                              const std::vector<double>& times, Exec exec) {
  const auto count = static_cast<long>(times.size());
  std::vector<Matrix> out(times.size());
  auto one = [&](long i) { out[i] = rows * expm(times[i] * drift) * cols; };
  if (exec == Exec::serial) {
    for (long i = 0; i < count; ++i) one(i);
  } else {
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long i = 0; i < count; ++i) one(i);
  }
  return out;
}

}  // namespace

CorrelationSeries vacf_full(const FullModel& model, const PartitionBasis& basis, const std::vector<double>& times,
                            Exec exec) {
  check_times(times);
  const FullModel unit = mass_scale(model);
  const Eigen::Index n = unit.dim();
  if (basis.phi.rows() != n) throw InvalidInput("vacf_full: basis does not match the model dimension");
  const Eigen::Index m = basis.phi.cols();

  CorrelationSeries s;
  s.kind = CorrelationKind::full_exact;
  s.times = times;
  const Matrix d = full_drift(unit);
  const double abscissa = spectral_abscissa(d);
  if (abscissa > 1e-12 * std::max(d.norm(), 1.0)) {
    s.warnings.push_back("full drift is unstable; correlations grow");
  }
  Matrix rows = Matrix::Zero(m, 2 * n);
  rows.rightCols(n) = basis.phi.transpose();
  Matrix cols = Matrix::Zero(2 * n, m);
  cols.bottomRows(n) = unit.kbt * basis.phi;
  s.values = propagate(d, rows, cols, times, exec);
  return s;
}

CorrelationSeries vacf_reduced(const ReducedModel& reduced, const std::vector<double>& times, Exec exec) {
  check_times(times);
  const Matrix l = extended_drift(reduced);
  const Eigen::Index m = reduced.m;
  CorrelationSeries s;
  s.kind = CorrelationKind::reduced_analytic;
  s.times = times;
  if (spectral_abscissa(l) >= 0.0 && !times.empty() && times.back() > 0.0) {
    s.warnings.push_back("extended drift is not Hurwitz; correlations do not decay");
  }
  Matrix rows = Matrix::Zero(m, l.rows());
  rows.middleCols(m, m).setIdentity();
  Matrix cols = reduced.kbt * rows.transpose();
  s.values = propagate(l, rows, cols, times, exec);
  return s;
}

CorrelationSeries empirical_autocorrelation(const std::vector<Matrix>& members, double dt, Eigen::Index max_lag,
                                            Exec exec, int batches) {
  if (members.empty()) throw InvalidInput("autocorrelation: no samples");
  if (!(dt > 0.0)) throw InvalidInput("autocorrelation: dt must be positive");
  const Eigen::Index len = members.front().rows();
  const Eigen::Index m = members.front().cols();
  for (const auto& x : members) {
    if (x.rows() != len || x.cols() != m) throw InvalidInput("autocorrelation: members differ in shape");
  }
  if (max_lag < 0 || 5 * max_lag > len) throw InvalidInput("autocorrelation: max_lag exceeds a fifth of the span");
  if (members.size() == 1 && (batches < 2 || len / batches <= max_lag))
    throw InvalidInput("autocorrelation: batches too short for the requested lag");

  const auto nlag = static_cast<long>(max_lag + 1);
  const auto nmem = static_cast<Eigen::Index>(members.size());
  CorrelationSeries s;
  s.kind = CorrelationKind::empirical;
  s.times.resize(nlag);
  s.values.assign(nlag, Matrix::Zero(m, m));
  s.stderr_.assign(nlag, Matrix::Zero(m, m));

  auto lag_product = [&](const Matrix& x, Eigen::Index lag, Eigen::Index begin, Eigen::Index end) -> Matrix {
    end = std::min(end, len - lag);
    if (end <= begin) return Matrix::Zero(m, m);
    return x.middleRows(begin + lag, end - begin).transpose() * x.middleRows(begin, end - begin);
  };

  auto one = [&](long lag) {
    s.times[lag] = static_cast<double>(lag) * dt;
    std::vector<Matrix> est;
    if (nmem > 1) {
      for (const auto& x : members) est.push_back(lag_product(x, lag, 0, len) / static_cast<double>(len));
    } else {
      const Eigen::Index width = len / batches;
      for (int b = 0; b < batches; ++b) {
        est.push_back(lag_product(members.front(), lag, b * width, (b + 1) * width) / static_cast<double>(width));
      }
    }
    const auto k = static_cast<double>(est.size());
    Matrix mean = Matrix::Zero(m, m);
    for (const auto& e : est) mean += e;
    mean /= k;
    Matrix var = Matrix::Zero(m, m);
    for (const auto& e : est) var += (e - mean).cwiseAbs2();
    var /= (k - 1.0);
    s.stderr_[lag] = (var / k).cwiseSqrt();
    if (nmem > 1) {
      s.values[lag] = mean;
    } else {
      s.values[lag] = lag_product(members.front(), lag, 0, len) / static_cast<double>(len);
    }
  };
  if (exec == Exec::serial) {
    for (long lag = 0; lag < nlag; ++lag) one(lag);
  } else {
#pragma omp parallel for schedule(static) num_threads(worker_count())
    for (long lag = 0; lag < nlag; ++lag) one(lag);
  }
  return s;
}

CorrelationSeries empirical_autocorrelation(const Matrix& samples, double dt, Eigen::Index max_lag, Exec exec,
                                            int batches) {
  return empirical_autocorrelation(std::vector<Matrix>{samples}, dt, max_lag, exec, batches);
}

double l2_error(const std::vector<double>& times, const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                double horizon) {
  if (times.size() != a.size() || times.size() != b.size()) throw InvalidInput("l2_error: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < times.size() && times[i] <= horizon * (1.0 + 1e-12); ++i) {
    const double e0 = (a[i - 1] - b[i - 1]).squaredNorm();
    const double e1 = (a[i] - b[i]).squaredNorm();
    acc += 0.5 * (times[i] - times[i - 1]) * (e0 + e1);
  }
  return std::sqrt(acc);
}

std::vector<double> uniform_grid(double t0, double t1, int steps) {
  if (steps < 1 || !(t1 > t0) || !(t0 >= 0.0)) throw InvalidInput("grid: need 0 <= t0 < t1 and steps >= 1");
  std::vector<double> g(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) g[i] = t0 + (t1 - t0) * i / steps;
  g.back() = t1;
  return g;
}

}  // namespace gle

#pragma once

#include <string>
#include <vector>

#include "gle/basis.hpp"
#include "gle/reduction.hpp"

namespace gle {

enum class CorrelationKind { full_exact, reduced_analytic, empirical };

const char* to_string(CorrelationKind kind);

struct CorrelationSeries {
  CorrelationKind kind = CorrelationKind::full_exact;
  std::vector<double> times;
  std::vector<Matrix> values;
  std::vector<Matrix> stderr_;  // empirical only
  std::vector<std::string> warnings;
};

/// <p(t) p(0)^T> = [0 Phi^T] exp(tD) Q [0; Phi], Q = kBT diag(A^{-1}, I).
CorrelationSeries vacf_full(const FullModel& model, const PartitionBasis& basis, const std::vector<double>& times,
                            Exec exec = Exec::parallel);

/// E-block of the stacked correlation ODE of the extended system, E(0) = kBT I.
CorrelationSeries vacf_reduced(const ReducedModel& reduced, const std::vector<double>& times,
                               Exec exec = Exec::parallel);

/// Biased (1/T) lag-product estimator of <p(t + tau) p(t)^T> for tau = 0..max_lag.
/// One member: batch-means standard error. Several members: spread across members.
CorrelationSeries empirical_autocorrelation(const std::vector<Matrix>& members, double dt, Eigen::Index max_lag,
                                            Exec exec = Exec::parallel, int batches = 20);
CorrelationSeries empirical_autocorrelation(const Matrix& samples, double dt, Eigen::Index max_lag,
                                            Exec exec = Exec::parallel, int batches = 20);

/// sqrt(int_0^T |a - b|_F^2 dt) by the trapezoidal rule on the shared grid.
double l2_error(const std::vector<double>& times, const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                double horizon);

/// Uniform grid t0, ..., t1 with steps intervals.
std::vector<double> uniform_grid(double t0, double t1, int steps);

}  // namespace gle

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gle/reduction.hpp"

namespace gle {

struct SimConfig {
  double dt = 0.01;
  long steps = 1000;
  std::uint64_t seed = 0;
  int ensemble = 1;
  long record_stride = 1;
};

struct SimResult {
  std::vector<Trajectory> members;  // positions = q, velocities = p, row 0 = initial state
  std::vector<std::string> warnings;
};

/// The full model viewed as a linear system with an empty auxiliary block.
ExtendedSystem as_linear_system(const FullModel& model);

/// Independent stream for one ensemble member.
std::mt19937_64 member_engine(std::uint64_t seed, std::uint64_t member);

/// Draw of (q, p, w) from N(0, diag(position_cov, y_stationary)).
Vector sample_stationary_initial(const ExtendedSystem& sys, std::mt19937_64& engine);
Vector sample_stationary_initial(const ExtendedSystem& sys, std::uint64_t seed);

/// Splitting integrator: half kick, half drift, exact OU step on (p, w), half drift, half kick.
class LinearIntegrator {
 public:
  LinearIntegrator(const ExtendedSystem& sys, double dt);
  /// Advances x = (q, p, w) by steps, recording (q, p) every stride steps and at step 0.
  Trajectory run(Vector x, long steps, long stride, std::mt19937_64& engine) const;
  double dt() const { return dt_; }

 private:
  Eigen::Index m_, ny_;
  double dt_;
  Matrix stiffness_;
  Matrix prop_;
  Matrix chol_;
  bool noisy_ = false;
};

SimResult simulate_system(const ExtendedSystem& sys, const SimConfig& cfg, Exec exec = Exec::parallel);

SimResult simulate_full(const FullModel& model, const SimConfig& cfg, Exec exec = Exec::parallel);
SimResult simulate_reduced(const ReducedModel& reduced, const SimConfig& cfg, Exec exec = Exec::parallel);

/// Auxiliary block driven by its own noise with p held at zero. Returns the
/// memory-force samples z_0 per member (rows = recorded steps).
std::vector<Matrix> simulate_aux_noise(const ReducedModel& reduced, const SimConfig& cfg,
                                       Exec exec = Exec::parallel);

/// Empty when dt is acceptable for the given stiffness.
std::string dt_stability_warning(const Matrix& stiffness, double dt);

}  // namespace gle

#pragma once

#include <cstdint>
#include <vector>

#include "gle/model.hpp"

namespace gle {

/// Reference integrator for the GLE with an explicit memory convolution.
/// Cost grows quadratically with the step count; intended for validation and
/// benchmarking at small sizes.
struct DirectGleConfig {
  double dt = 0.01;
  long steps = 1000;
  std::uint64_t seed = 0;
  bool colored_noise = true;  // requires steps * m small enough for a dense factorization
};

struct DirectGleProblem {
  Matrix a_eff;
  Matrix gamma11;
  double kbt = 0.0;
  std::vector<Matrix> kernel;  // theta(k dt), k = 0 .. steps
};

/// p_{k+1} = p_k + dt (-A q_k - G11 p_k - mem_k) + noise, q_{k+1} = q_k + dt p_{k+1},
/// with mem_k the trapezoidal sum of theta against the stored p history.
Trajectory simulate_direct_gle(const DirectGleProblem& problem, const DirectGleConfig& cfg, const Vector& q0,
                               const Vector& p0);

}  // namespace gle

#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gle/correlation.hpp"
#include "gle/errors.hpp"
#include "gle/io.hpp"
#include "gle/simulate.hpp"

namespace gle {

struct Tolerances {
  double fdt_residual = 1e-10;
  double symmetry = 1e-9;
  double sigma_band = 3.0;  // agreement band in standard errors
};

struct PipelineConfig {
  std::filesystem::path config_dir = ".";
  FullModel model;  // mass-scaled on load
  PartitionBasis basis;
  std::string model_hash;
  std::string basis_hash;
  std::string config_hash;
  std::string basis_kind;
  std::vector<int> orders = {0, 1, 2, 3};
  std::vector<double> grid;
  SimConfig sim;
  Eigen::Index max_lag = 20;
  long lag_stride = 1;
  bool simulate_full_model = false;
  std::vector<long> bench_steps = {1000, 10000, 100000};
  int bench_order = 2;
  std::filesystem::path out_dir = "out";
  bool allow_partial = false;
  Tolerances tol;
};

struct ConfigOverrides {
  std::optional<std::vector<int>> orders;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> grid;  // "t0:t1:steps"
  bool allow_partial = false;
};

PipelineConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
PipelineConfig config_from_json(const io::json& j, const std::filesystem::path& base_dir,
                                const ConfigOverrides& overrides = {});

std::vector<int> parse_order_list(const std::string& text);
std::vector<double> parse_grid(const std::string& text);

struct FitFailure {
  std::string kind;
  std::string message;
  ExitCode code = ExitCode::generic;
};

struct ReductionRun {
  ProjectedBlocks blocks;
  KernelMoments moments;
  double t_star = 0.0;
  double g_norm = 0.0;
  std::map<int, ReducedModel> fits;       // accepted
  std::map<int, FitFailure> failures;     // rejected
};

/// Projects, computes moments and fits every requested order. Rejected fits are
/// recorded rather than thrown.
ReductionRun run_reduction(const PipelineConfig& cfg);

struct VacfRow {
  int order = 0;
  double l2_full = 0.0;     // on the configured grid
  double l2_tstar = 0.0;    // on [0, t*]
  double l2_gnorm = 0.0;    // on [0, 0.5 / |G|]
  double kernel_l2_tstar = 0.0;
};

struct VacfRun {
  ReductionRun reduction;
  CorrelationSeries exact;
  std::map<int, CorrelationSeries> reduced;
  std::vector<VacfRow> rows;
};

VacfRun run_vacf(const PipelineConfig& cfg);

struct BenchRow {
  long steps = 0;
  double direct_seconds = 0.0;
  double extended_seconds = 0.0;
  double ratio = 0.0;
  double direct_ops = 0.0;
  double extended_ops = 0.0;
  double extended_per_step = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double ratio_exponent = 0.0;         // slope of log ratio vs log steps
  double extended_step_slope = 0.0;    // slope of log per-step time vs log steps
  Eigen::Index m = 0;
  int order = 0;
};

/// Direct convolution against the memoryless extended system, both at zero
/// temperature so that only the deterministic work is timed.
BenchReport run_bench(const ProjectedBlocks& blocks, const ReducedModel& reduced, const std::vector<long>& steps,
                      double dt);

int cmd_reduce(const PipelineConfig& cfg, std::ostream& log);
int cmd_vacf(const PipelineConfig& cfg, std::ostream& log);
int cmd_simulate(const PipelineConfig& cfg, std::ostream& log);
int cmd_bench(const PipelineConfig& cfg, std::ostream& log);

}  // namespace gle

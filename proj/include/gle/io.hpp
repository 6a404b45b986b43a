#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gle/correlation.hpp"
#include "gle/reduction.hpp"

namespace gle::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex(std::uint64_t h);
std::string hash_matrix(const Matrix& m);
std::string hash_file(const fs::path& path);
std::string hash_text(const std::string& text);

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

/// Numeric CSV; a leading non-numeric row is treated as a header.
Matrix read_csv_matrix(const fs::path& path);
void write_csv_matrix(const fs::path& path, const Matrix& m, const std::vector<std::string>& header = {});

json matrix_to_json(const Matrix& m);
/// Row-major nested array, flat array (vector), or a CSV path relative to base_dir.
Matrix matrix_from_json(const json& j, const fs::path& base_dir);

/// {"n", "kBT", "masses"?, "A", "Gamma"} with inline or CSV matrix payloads.
FullModel model_from_json(const json& j, const fs::path& base_dir);
json model_to_json(const FullModel& model);
FullModel load_model(const fs::path& path);

/// CSV samples plus dt from a sidecar "<path>.json" ({"dt": ...}) unless given.
Trajectory load_trajectory(const fs::path& csv, double dt = -1.0);
void write_trajectory(const fs::path& csv, const Trajectory& traj, const json& meta);

/// Columns t, theta_11, theta_12, ..., theta_mm (row-major).
void write_kernel_csv(const fs::path& path, const std::vector<double>& times, const std::vector<Matrix>& values);
/// Same layout, plus stderr columns for empirical series, and "<path>.json" metadata.
void write_correlation(const fs::path& path, const CorrelationSeries& series, const json& meta);

json reduced_to_json(const ReducedModel& r, const json& provenance);
ReducedModel reduced_from_json(const json& j);

BlockAssignment load_block_assignment(const fs::path& assignment_csv, const fs::path& positions_csv);

}  // namespace gle::io

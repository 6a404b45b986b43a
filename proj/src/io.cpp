#include "gle/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gle/errors.hpp"

namespace gle::io {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string hash_matrix(const Matrix& m) {
  const std::int64_t dims[2] = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
  std::uint64_t h = fnv1a(dims, sizeof dims);
  h = fnv1a(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()), h);
  return hex(h);
}

std::string hash_text(const std::string& text) { return hex(fnv1a(text.data(), text.size())); }

std::string hash_file(const fs::path& path) { return hash_text(read_text(path)); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    if (b == std::string::npos) return false;
    const auto e = cell.find_last_not_of(" \t\r");
    cell = cell.substr(b, e - b + 1);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size()) return false;
    out.push_back(v);
  }
  return !out.empty();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

Matrix read_csv_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> row;
  bool first = true;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;
        continue;
      }
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": non-numeric entry");
    }
    first = false;
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(row);
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_csv_matrix(const fs::path& path, const Matrix& m, const std::vector<std::string>& header) {
  std::string out;
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + fmt(m(i, j));
    out += "\n";
  }
  write_text(path, out);
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const fs::path& base_dir) {
  if (j.is_string()) return read_csv_matrix(resolve(base_dir, j.get<std::string>()));
  if (!j.is_array()) throw InvalidInput("matrix payload must be an array or a CSV path");
  if (j.empty()) return Matrix(0, 0);
  if (!j.front().is_array()) {
    Matrix v(j.size(), 1);
    for (std::size_t i = 0; i < j.size(); ++i) v(i, 0) = j[i].get<double>();
    return v;
  }
  const std::size_t cols = j.front().size();
  Matrix m(j.size(), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw InvalidInput("matrix payload rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

FullModel model_from_json(const json& j, const fs::path& base_dir) {
  try {
    FullModel model;
    model.stiffness = matrix_from_json(j.at("A"), base_dir);
    model.damping = matrix_from_json(j.at("Gamma"), base_dir);
    model.kbt = j.value("kBT", 1.0);
    if (j.contains("masses") && !j["masses"].is_null()) {
      const Matrix mv = matrix_from_json(j["masses"], base_dir);
      model.masses = Eigen::Map<const Vector>(mv.data(), mv.size());
    }
    if (j.contains("n") && j["n"].get<long>() != model.dim())
      throw InvalidInput("model: n does not match the stiffness matrix");
    return model;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("model: ") + e.what());
  }
}

json model_to_json(const FullModel& model) {
  json j;
  j["n"] = model.dim();
  j["kBT"] = model.kbt;
  j["A"] = matrix_to_json(model.stiffness);
  j["Gamma"] = matrix_to_json(model.damping);
  if (model.masses) j["masses"] = std::vector<double>(model.masses->data(), model.masses->data() + model.masses->size());
  return j;
}

FullModel load_model(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return model_from_json(j, path.parent_path());
}

Trajectory load_trajectory(const fs::path& csv, double dt) {
  Trajectory t;
  t.positions = read_csv_matrix(csv);
  if (dt <= 0.0) {
    const fs::path side = csv.string() + ".json";
    try {
      dt = json::parse(read_text(side)).at("dt").get<double>();
    } catch (const json::exception& e) {
      throw IoError("trajectory sidecar " + side.string() + ": " + e.what());
    }
  }
  if (!(dt > 0.0)) throw InvalidInput("trajectory: dt must be positive");
  t.dt = dt;
  return t;
}

void write_trajectory(const fs::path& csv, const Trajectory& traj, const json& meta) {
  const Eigen::Index m = traj.positions.cols();
  const bool vel = traj.velocities.has_value();
  Matrix out(traj.samples(), vel ? 2 * m : m);
  out.leftCols(m) = traj.positions;
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < m; ++i) header.push_back("q" + std::to_string(i));
  if (vel) {
    out.rightCols(m) = *traj.velocities;
    for (Eigen::Index i = 0; i < m; ++i) header.push_back("p" + std::to_string(i));
  }
  write_csv_matrix(csv, out, header);
  json side = meta;
  side["dt"] = traj.dt;
  write_text(csv.string() + ".json", side.dump(2) + "\n");
}

namespace {

std::vector<std::string> entry_header(const std::string& prefix, Eigen::Index m) {
  std::vector<std::string> h;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) h.push_back(prefix + "_" + std::to_string(i + 1) + std::to_string(j + 1));
  return h;
}

}  // namespace

void write_kernel_csv(const fs::path& path, const std::vector<double>& times, const std::vector<Matrix>& values) {
  if (times.size() != values.size()) throw InvalidInput("kernel csv: length mismatch");
  const Eigen::Index m = values.empty() ? 0 : values.front().rows();
  Matrix out(times.size(), 1 + m * m);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out(i, 0) = times[i];
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) out(i, 1 + a * m + b) = values[i](a, b);
  }
  std::vector<std::string> header{"t"};
  for (auto& h : entry_header("theta", m)) header.push_back(h);
  write_csv_matrix(path, out, header);
}

void write_correlation(const fs::path& path, const CorrelationSeries& s, const json& meta) {
  const Eigen::Index m = s.values.empty() ? 0 : s.values.front().rows();
  const bool se = !s.stderr_.empty();
  Matrix out(s.times.size(), 1 + m * m * (se ? 2 : 1));
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    out(i, 0) = s.times[i];
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) {
        out(i, 1 + a * m + b) = s.values[i](a, b);
        if (se) out(i, 1 + m * m + a * m + b) = s.stderr_[i](a, b);
      }
  }
  std::vector<std::string> header{"t"};
  for (auto& h : entry_header("c", m)) header.push_back(h);
  if (se)
    for (auto& h : entry_header("stderr", m)) header.push_back(h);
  write_csv_matrix(path, out, header);
  json side = meta;
  side["kind"] = to_string(s.kind);
  side["warnings"] = s.warnings;
  write_text(path.string() + ".json", side.dump(2) + "\n");
}

json reduced_to_json(const ReducedModel& r, const json& provenance) {
  json j;
  j["order"] = r.order;
  j["m"] = r.m;
  j["kBT"] = r.kbt;
  j["vanishing"] = r.vanishing;
  j["moment_convention"] = kMomentConvention;
  j["A_eff"] = matrix_to_json(r.a_eff);
  j["Gamma11"] = matrix_to_json(r.gamma11);
  if (r.order == 0) {
    j["Gamma_add"] = matrix_to_json(r.gamma_add);
  } else {
    json b = json::array(), c = json::array();
    for (const auto& x : r.b) b.push_back(matrix_to_json(x));
    for (const auto& x : r.c) c.push_back(matrix_to_json(x));
    j["B"] = b;
    j["C"] = c;
    j["Qaux"] = matrix_to_json(r.qaux());
    j["Qtilde"] = matrix_to_json(r.qtilde);
  }
  j["Sigma"] = matrix_to_json(r.sigma());
  j["fdt_feasible"] = r.fdt_feasible;
  const auto& d = r.diagnostics;
  j["diagnostics"] = {{"time_scale", d.time_scale},
                      {"system_rcond", d.system_rcond},
                      {"moment_residual", d.moment_residual},
                      {"matching_residual", d.matching_residual},
                      {"hurwitz_margin", d.hurwitz_margin},
                      {"sigma_min_eigenvalue", d.sigma_min_eigenvalue},
                      {"qaux_constraint_residual", d.qaux_constraint_residual},
                      {"qaux_nonunique", d.qaux_nonunique},
                      {"warnings", d.warnings}};
  j["provenance"] = provenance;
  return j;
}

ReducedModel reduced_from_json(const json& j) {
  try {
    ReducedModel r;
    r.order = j.at("order").get<int>();
    r.kbt = j.at("kBT").get<double>();
    r.vanishing = j.value("vanishing", false);
    r.a_eff = matrix_from_json(j.at("A_eff"), {});
    r.gamma11 = matrix_from_json(j.at("Gamma11"), {});
    r.m = r.a_eff.rows();
    r.fdt_feasible = j.value("fdt_feasible", true);
    if (r.order == 0) {
      r.gamma_add = matrix_from_json(j.at("Gamma_add"), {});
      return r;
    }
    for (const auto& x : j.at("B")) r.b.push_back(matrix_from_json(x, {}));
    for (const auto& x : j.at("C")) r.c.push_back(matrix_from_json(x, {}));
    assemble_companion(r.b, r.c, r.bhat, r.chat);
    r.qtilde = matrix_from_json(j.at("Qtilde"), {});
    const Matrix sig = matrix_from_json(j.at("Sigma"), {});
    const Eigen::Index nm = r.bhat.rows();
    r.sigma_tilde = r.kbt > 0.0 ? Matrix(sig.bottomRightCorner(nm, nm) / r.kbt)
                                : Matrix(-(r.bhat * r.qtilde + r.qtilde * r.bhat.transpose()));
    return r;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("reduced model: ") + e.what());
  }
}

BlockAssignment load_block_assignment(const fs::path& assignment_csv, const fs::path& positions_csv) {
  const Matrix a = read_csv_matrix(assignment_csv);
  if (a.cols() != 2) throw InvalidInput("assignment CSV must have columns coordinate_index, group_id");
  BlockAssignment out;
  out.group.assign(a.rows(), -1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto idx = static_cast<long>(a(i, 0));
    if (idx < 0 || idx >= a.rows()) throw InvalidInput("assignment: coordinate index out of range");
    out.group[idx] = static_cast<int>(a(i, 1));
  }
  for (int g : out.group)
    if (g < 0) throw InvalidInput("assignment: every coordinate needs a non-negative group id");
  out.positions = read_csv_matrix(positions_csv);
  return out;
}

}  // namespace gle::io

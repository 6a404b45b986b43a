#include "gle/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <sstream>

#include "gle/direct_gle.hpp"

namespace gle {

namespace fs = std::filesystem;
using io::json;

namespace {

double opnorm(const Matrix& x) {
  if (x.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(x).singularValues()(0);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

PartitionBasis build_basis(const json& spec, const FullModel& model, const fs::path& base, std::string& kind) {
  kind = spec.value("type", "");
  Matrix phi;
  if (kind == "modal") {
    phi = build_modal_basis(model, spec.at("m").get<long>());
  } else if (kind == "rtb") {
    const BlockAssignment assign = io::load_block_assignment(base / spec.at("assignment").get<std::string>(),
                                                             base / spec.at("positions").get<std::string>());
    const RtbBasis rtb = build_rtb_basis(assign);
    if (spec.contains("groups")) {
      const auto wanted = spec["groups"].get<std::vector<int>>();
      std::vector<Eigen::Index> cols;
      Eigen::Index col = 0;
      for (std::size_t g = 0; g < rtb.group_ids.size(); ++g) {
        const bool keep = std::find(wanted.begin(), wanted.end(), rtb.group_ids[g]) != wanted.end();
        for (int k = 0; k < rtb.modes_per_group[g]; ++k, ++col)
          if (keep) cols.push_back(col);
      }
      phi.resize(rtb.phi.rows(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) phi.col(c) = rtb.phi.col(cols[c]);
    } else {
      phi = rtb.phi;
    }
  } else if (kind == "explicit") {
    phi = io::matrix_from_json(spec.at("phi"), base);
  } else {
    throw InvalidInput("basis: type must be modal, rtb or explicit");
  }
  if (phi.rows() != model.dim()) throw InvalidInput("basis: phi has the wrong number of rows");
  return make_partition(phi);
}

json provenance(const PipelineConfig& cfg) {
  return {{"model_hash", cfg.model_hash},
          {"basis_hash", cfg.basis_hash},
          {"config_hash", cfg.config_hash},
          {"moment_convention", kMomentConvention}};
}

int first_failure_code(const ReductionRun& run, bool allow_partial) {
  if (run.failures.empty() || allow_partial) return 0;
  return static_cast<int>(run.failures.begin()->second.code);
}

void log_failures(const ReductionRun& run, std::ostream& log) {
  for (const auto& [order, f] : run.failures) {
    log << "order " << order << ": rejected [" << f.kind << "] " << f.message << "\n";
  }
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

template <class F>
double time_seconds(F&& f, double min_total = 0.05, int max_reps = 1000) {
  using clock = std::chrono::steady_clock;
  int reps = 0;
  const auto start = clock::now();
  double elapsed = 0.0;
  do {
    f();
    ++reps;
    elapsed = std::chrono::duration<double>(clock::now() - start).count();
  } while (elapsed < min_total && reps < max_reps);
  return elapsed / reps;
}

}  // namespace

std::vector<int> parse_order_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto dash = item.find('-');
    try {
      if (dash != std::string::npos && dash > 0) {
        const int a = std::stoi(item.substr(0, dash));
        const int b = std::stoi(item.substr(dash + 1));
        for (int o = a; o <= b; ++o) out.push_back(o);
      } else {
        out.push_back(std::stoi(item));
      }
    } catch (const std::exception&) {
      throw InvalidInput("order list: cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw InvalidInput("order list is empty");
  for (int o : out)
    if (o < 0) throw InvalidInput("order list: orders must be non-negative");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  double t0 = 0, t1 = 0;
  int steps = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> t0 >> c1 >> t1 >> c2 >> steps) || c1 != ':' || c2 != ':')
    throw InvalidInput("grid must look like t0:t1:steps");
  if (t0 != 0.0) throw InvalidInput("grid must start at 0");
  return uniform_grid(t0, t1, steps);
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir, const ConfigOverrides& ov) {
  PipelineConfig cfg;
  cfg.config_dir = base_dir;
  try {
    const json& mspec = j.at("model");
    FullModel raw;
    if (mspec.is_string()) {
      const fs::path mpath = base_dir / mspec.get<std::string>();
      raw = io::load_model(mpath);
      cfg.model_hash = io::hash_file(mpath);
    } else {
      raw = io::model_from_json(mspec, base_dir);
      cfg.model_hash = io::hash_text(mspec.dump());
    }
    require_valid(raw);
    cfg.model = mass_scale(raw);

    cfg.basis = build_basis(j.at("basis"), cfg.model, base_dir, cfg.basis_kind);
    cfg.basis_hash = io::hash_matrix(cfg.basis.phi);

    if (j.contains("orders")) cfg.orders = j["orders"].get<std::vector<int>>();
    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (g.is_string()) {
        cfg.grid = parse_grid(g.get<std::string>());
      } else {
        if (g.value("t0", 0.0) != 0.0) throw InvalidInput("grid must start at 0");
        cfg.grid = uniform_grid(0.0, g.at("t1").get<double>(), g.at("steps").get<int>());
      }
    } else {
      cfg.grid = uniform_grid(0.0, 10.0, 200);
    }
    if (j.contains("sim")) {
      const json& s = j["sim"];
      cfg.sim.dt = s.value("dt", cfg.sim.dt);
      cfg.sim.steps = s.value("steps", cfg.sim.steps);
      cfg.sim.seed = s.value("seed", cfg.sim.seed);
      cfg.sim.ensemble = s.value("ensemble", cfg.sim.ensemble);
      cfg.sim.record_stride = s.value("record_stride", cfg.sim.record_stride);
      cfg.max_lag = s.value("max_lag", static_cast<long>(cfg.max_lag));
      cfg.simulate_full_model = s.value("full", false);
    }
    if (j.contains("bench")) {
      const json& b = j["bench"];
      if (b.contains("steps")) cfg.bench_steps = b["steps"].get<std::vector<long>>();
      cfg.bench_order = b.value("order", cfg.bench_order);
    }
    if (j.contains("output")) cfg.out_dir = base_dir / j["output"].get<std::string>();
    cfg.allow_partial = j.value("allow_partial", false);
    if (j.contains("tolerances")) {
      const json& t = j["tolerances"];
      cfg.tol.fdt_residual = t.value("fdt_residual", cfg.tol.fdt_residual);
      cfg.tol.symmetry = t.value("symmetry", cfg.tol.symmetry);
      cfg.tol.sigma_band = t.value("sigma_band", cfg.tol.sigma_band);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }

  std::string ov_text;
  if (ov.orders) {
    cfg.orders = *ov.orders;
    ov_text += "orders";
    for (int o : *ov.orders) ov_text += "," + std::to_string(o);
  }
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) {
    cfg.sim.seed = *ov.seed;
    ov_text += ";seed=" + std::to_string(*ov.seed);
  }
  if (ov.grid) {
    cfg.grid = parse_grid(*ov.grid);
    ov_text += ";grid=" + *ov.grid;
  }
  if (ov.allow_partial) cfg.allow_partial = true;
  if (cfg.orders.empty()) throw InvalidInput("config: orders must be nonempty");
  for (int o : cfg.orders)
    if (o < 0) throw InvalidInput("config: orders must be non-negative");
  cfg.config_hash = io::hash_text(j.dump() + "|" + ov_text);
  return cfg;
}

PipelineConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path(), overrides);
}

ReductionRun run_reduction(const PipelineConfig& cfg) {
  ReductionRun run;
  run.blocks = compute_blocks(cfg.model, cfg.basis);
  run.g_norm = opnorm(run.blocks.gmat);
  const int max_order = *std::max_element(cfg.orders.begin(), cfg.orders.end());
  const int levels = std::max(4, 2 * max_order - 2);

  std::optional<FitFailure> moment_failure;
  try {
    run.moments = compute_moments(run.blocks, levels, true);
  } catch (const Error& e) {
    moment_failure = FitFailure{e.kind(), e.what(), e.exit_code()};
    run.moments = compute_moments(run.blocks, levels, false);
  }
  KernelMoments leading = run.moments;
  leading.m.resize(5);
  run.t_star = matched_interval(leading, &run.blocks);

  for (int order : cfg.orders) {
    if (moment_failure) {
      run.failures[order] = *moment_failure;
      continue;
    }
    try {
      ReducedModel r = order == 0 ? fit_markovian(run.blocks, run.moments, cfg.model.kbt)
                                  : fit_rational(run.blocks, run.moments, order, cfg.model.kbt);
      if (order >= 1 && !r.fdt_feasible) {
        throw FdtInfeasible("order-" + std::to_string(order) + " auxiliary noise covariance is indefinite",
                            r.diagnostics.sigma_min_eigenvalue);
      }
      run.fits.emplace(order, std::move(r));
    } catch (const Error& e) {
      run.failures[order] = FitFailure{e.kind(), e.what(), e.exit_code()};
    }
  }
  return run;
}

int cmd_reduce(const PipelineConfig& cfg, std::ostream& log) {
  const ReductionRun run = run_reduction(cfg);
  const auto& b = run.blocks;
  const json prov = provenance(cfg);

  json blocks = {{"n", cfg.model.dim()},
                 {"m", b.m()},
                 {"basis", cfg.basis_kind},
                 {"A_eff", io::matrix_to_json(b.a_eff)},
                 {"Gamma11", io::matrix_to_json(b.g11)},
                 {"A12_norm", b.a12.norm()},
                 {"Gamma12_norm", b.g12.norm()},
                 {"G_norm", run.g_norm},
                 {"kernel_decay_rate", -spectral_abscissa(-b.gmat)},
                 {"kernel_vanishes", run.moments.vanishing},
                 {"provenance", prov}};
  io::write_text(cfg.out_dir / "blocks.json", blocks.dump(2) + "\n");

  json moments = {{"convention", run.moments.convention},
                  {"vanishing", run.moments.vanishing},
                  {"t_star", run.t_star},
                  {"provenance", prov}};
  json ml = json::array();
  for (const auto& mm : run.moments.m) ml.push_back(io::matrix_to_json(mm));
  moments["M"] = ml;
  moments["M_inf"] = run.moments.has_inf ? io::matrix_to_json(run.moments.m_inf) : json(nullptr);
  io::write_text(cfg.out_dir / "moments.json", moments.dump(2) + "\n");

  log << "n=" << cfg.model.dim() << " m=" << b.m() << " basis=" << cfg.basis_kind << "\n";
  if (run.moments.vanishing) log << "memory kernel vanishes identically; all orders are equivalent\n";
  if (!run.moments.m.empty()) {
    log << "M0 = " << io::matrix_to_json(run.moments.m[0]).dump() << "\n";
  }
  if (run.moments.has_inf) log << "M_inf = " << io::matrix_to_json(run.moments.m_inf).dump() << "\n";
  log << "t* = " << fmt("%.6g", run.t_star) << "\n";

  json report = json::array();
  for (int order : cfg.orders) {
    json entry = {{"order", order}};
    if (auto it = run.fits.find(order); it != run.fits.end()) {
      const ReducedModel& r = it->second;
      io::write_text(cfg.out_dir / ("reduced_order" + std::to_string(order) + ".json"),
                     io::reduced_to_json(r, prov).dump(2) + "\n");
      const FdtResidual f = fdt_residual(r);
      entry["status"] = "accepted";
      entry["hurwitz_margin"] = r.diagnostics.hurwitz_margin;
      entry["moment_residual"] = r.diagnostics.moment_residual;
      entry["matching_residual"] = r.diagnostics.matching_residual;
      entry["fdt_lyapunov_residual"] = f.lyapunov;
      entry["fdt_pinning_residual"] = f.pinning;
      entry["fdt_stationary_mismatch"] = f.stationary_mismatch;
      entry["qaux_nonunique"] = r.diagnostics.qaux_nonunique;
      entry["warnings"] = r.diagnostics.warnings;
      log << "order " << order << ": accepted (hurwitz margin " << fmt("%.3g", r.diagnostics.hurwitz_margin)
          << ", fdt residual " << fmt("%.2e", std::max(f.lyapunov, f.pinning)) << ")\n";
    } else {
      const FitFailure& f = run.failures.at(order);
      entry["status"] = "rejected";
      entry["error"] = f.kind;
      entry["message"] = f.message;
      entry["exit_code"] = static_cast<int>(f.code);
    }
    report.push_back(entry);
  }
  log_failures(run, log);
  io::write_text(cfg.out_dir / "fit_report.json",
                 json({{"fits", report}, {"provenance", prov}}).dump(2) + "\n");
  return first_failure_code(run, cfg.allow_partial);
}

VacfRun run_vacf(const PipelineConfig& cfg) {
  VacfRun out;
  out.reduction = run_reduction(cfg);
  const ReductionRun& run = out.reduction;
  out.exact = vacf_full(cfg.model, cfg.basis, cfg.grid);

  const std::vector<double> tgrid = uniform_grid(0.0, run.t_star, 200);
  const double g_end = 0.5 / std::max(run.g_norm, 1e-300);
  const std::vector<double> ggrid = uniform_grid(0.0, g_end, 200);
  const auto exact_t = vacf_full(cfg.model, cfg.basis, tgrid).values;
  const auto exact_g = vacf_full(cfg.model, cfg.basis, ggrid).values;
  const auto theta_t = eval_kernel_grid(run.blocks, tgrid);

  for (const auto& [order, r] : run.fits) {
    CorrelationSeries s = vacf_reduced(r, cfg.grid);
    VacfRow row;
    row.order = order;
    row.l2_full = l2_error(cfg.grid, out.exact.values, s.values, cfg.grid.back());
    row.l2_tstar = l2_error(tgrid, exact_t, vacf_reduced(r, tgrid).values, run.t_star);
    row.l2_gnorm = l2_error(ggrid, exact_g, vacf_reduced(r, ggrid).values, g_end);
    std::vector<Matrix> approx;
    if (order == 0) {
      approx.assign(tgrid.size(), Matrix::Zero(r.m, r.m));
    } else {
      approx = eval_approx_kernel_grid(r, tgrid);
    }
    row.kernel_l2_tstar = l2_error(tgrid, theta_t, approx, run.t_star);
    out.rows.push_back(row);
    out.reduced.emplace(order, std::move(s));
  }
  return out;
}

int cmd_vacf(const PipelineConfig& cfg, std::ostream& log) {
  const VacfRun v = run_vacf(cfg);
  const ReductionRun& run = v.reduction;
  json meta = provenance(cfg);
  meta["kBT"] = cfg.model.kbt;

  json m = meta;
  m["curve"] = "exact";
  io::write_correlation(cfg.out_dir / "vacf_exact.csv", v.exact, m);
  io::write_kernel_csv(cfg.out_dir / "kernel_exact.csv", cfg.grid, eval_kernel_grid(run.blocks, cfg.grid));
  for (const auto& [order, s] : v.reduced) {
    m["curve"] = "order" + std::to_string(order);
    m["order"] = order;
    for (const auto& w : s.warnings) log << "order " << order << ": warning: " << w << "\n";
    io::write_correlation(cfg.out_dir / ("vacf_order" + std::to_string(order) + ".csv"), s, m);
    if (order >= 1) {
      io::write_kernel_csv(cfg.out_dir / ("kernel_order" + std::to_string(order) + ".csv"), cfg.grid,
                           eval_approx_kernel_grid(run.fits.at(order), cfg.grid));
    }
  }
  for (const auto& w : v.exact.warnings) log << "exact: warning: " << w << "\n";

  json rows = json::array();
  std::string csv = "order,l2_vacf_grid,l2_vacf_tstar,l2_vacf_gnorm,l2_kernel_tstar\n";
  log << "t* = " << fmt("%.6g", run.t_star) << ", 0.5/|G| = " << fmt("%.6g", 0.5 / run.g_norm) << "\n";
  log << "order  L2[0,T] vacf   L2[0,t*] vacf   L2[0,0.5/|G|] vacf   L2[0,t*] kernel\n";
  for (const auto& r : v.rows) {
    rows.push_back({{"order", r.order},
                    {"l2_vacf_grid", r.l2_full},
                    {"l2_vacf_tstar", r.l2_tstar},
                    {"l2_vacf_gnorm", r.l2_gnorm},
                    {"l2_kernel_tstar", r.kernel_l2_tstar}});
    csv += std::to_string(r.order) + "," + fmt("%.17g", r.l2_full) + "," + fmt("%.17g", r.l2_tstar) + "," +
           fmt("%.17g", r.l2_gnorm) + "," + fmt("%.17g", r.kernel_l2_tstar) + "\n";
    log << "  " << r.order << "    " << fmt("%.4e", r.l2_full) << "     " << fmt("%.4e", r.l2_tstar)
        << "      " << fmt("%.4e", r.l2_gnorm) << "           " << fmt("%.4e", r.kernel_l2_tstar) << "\n";
  }
  json summary = {{"t_star", run.t_star},
                  {"g_interval", 0.5 / run.g_norm},
                  {"grid_end", cfg.grid.back()},
                  {"rows", rows},
                  {"provenance", provenance(cfg)}};
  io::write_text(cfg.out_dir / "vacf_summary.json", summary.dump(2) + "\n");
  io::write_text(cfg.out_dir / "vacf_summary.csv", csv);
  log_failures(run, log);
  return first_failure_code(run, cfg.allow_partial);
}

int cmd_simulate(const PipelineConfig& cfg, std::ostream& log) {
  const ReductionRun run = run_reduction(cfg);
  const json prov = provenance(cfg);
  const bool thermal = cfg.model.kbt > 0.0;
  if (!thermal) log << "kBT = 0: trajectories are noise free; analytic comparison skipped\n";

  auto compare = [&](const CorrelationSeries& emp, const std::vector<Matrix>& analytic, json& verdict) {
    double worst = 0.0;
    bool ok = true;
    for (std::size_t l = 0; l < emp.values.size(); ++l) {
      const Matrix diff = (emp.values[l] - analytic[l]).cwiseAbs();
      for (Eigen::Index i = 0; i < diff.size(); ++i) {
        const double se = emp.stderr_[l](i);
        const double z = se > 0.0 ? diff(i) / se : (diff(i) == 0.0 ? 0.0 : INFINITY);
        worst = std::max(worst, z);
        if (z > cfg.tol.sigma_band) ok = false;
      }
    }
    // Equipartition: diagonal of the lag-0 estimate against kBT.
    bool var_ok = true;
    const Matrix& c0 = emp.values.front();
    const Matrix& s0 = emp.stderr_.front();
    for (Eigen::Index i = 0; i < c0.rows(); ++i)
      if (std::abs(c0(i, i) - cfg.model.kbt) > cfg.tol.sigma_band * s0(i, i)) var_ok = false;
    verdict["max_abs_z"] = worst;
    verdict["lags"] = emp.values.size() - 1;
    verdict["vacf_verdict"] = ok ? "PASS" : "FAIL";
    verdict["equipartition_verdict"] = var_ok ? "PASS" : "FAIL";
    return ok && var_ok;
  };

  json report = json::array();
  auto process = [&](const std::string& label, const SimResult& sim, const std::vector<Matrix>& p_samples,
                     const std::function<std::vector<Matrix>(const std::vector<double>&)>& analytic) {
    json meta = prov;
    meta["label"] = label;
    meta["seed"] = cfg.sim.seed;
    meta["dt"] = cfg.sim.dt;
    meta["steps"] = cfg.sim.steps;
    meta["ensemble"] = cfg.sim.ensemble;
    io::write_trajectory(cfg.out_dir / ("traj_" + label + "_member0.csv"), sim.members.front(), meta);
    const double rec_dt = sim.members.front().dt;
    json verdict = {{"label", label}, {"warnings", sim.warnings}};
    for (const auto& w : sim.warnings) log << label << ": warning: " << w << "\n";
    const CorrelationSeries emp = empirical_autocorrelation(p_samples, rec_dt, cfg.max_lag);
    io::write_correlation(cfg.out_dir / ("autocorr_" + label + ".csv"), emp, meta);
    if (thermal) {
      const bool pass = compare(emp, analytic(emp.times), verdict);
      log << label << ": " << (pass ? "PASS" : "FAIL") << " (max |z| = " << fmt("%.2f", verdict["max_abs_z"].get<double>())
          << " over " << cfg.max_lag << " lags)\n";
    } else {
      verdict["vacf_verdict"] = "SKIPPED";
      log << label << ": analytic comparison skipped (kBT = 0)\n";
    }
    report.push_back(verdict);
  };

  for (const auto& [order, r] : run.fits) {
    const SimResult sim = simulate_reduced(r, cfg.sim);
    std::vector<Matrix> p;
    for (const auto& t : sim.members) p.push_back(*t.velocities);
    process("order" + std::to_string(order), sim, p,
            [&](const std::vector<double>& ts) { return vacf_reduced(r, ts).values; });
  }
  if (cfg.simulate_full_model) {
    const SimResult sim = simulate_full(cfg.model, cfg.sim);
    std::vector<Matrix> p;
    for (const auto& t : sim.members) p.push_back(*t.velocities * cfg.basis.phi);
    process("full", sim, p, [&](const std::vector<double>& ts) { return vacf_full(cfg.model, cfg.basis, ts).values; });
  }
  io::write_text(cfg.out_dir / "simulate_report.json",
                 json({{"results", report}, {"provenance", prov}}).dump(2) + "\n");
  log_failures(run, log);
  return first_failure_code(run, cfg.allow_partial);
}

BenchReport run_bench(const ProjectedBlocks& blocks, const ReducedModel& reduced, const std::vector<long>& steps,
                      double dt) {
  BenchReport rep;
  rep.m = reduced.m;
  rep.order = reduced.order;
  ReducedModel cold = reduced;
  cold.kbt = 0.0;
  const ExtendedSystem sys = assemble_extended(cold);
  const LinearIntegrator integrator(sys, dt);
  const Eigen::Index m = reduced.m;
  const Eigen::Index ny = sys.m + sys.aux;
  const Vector q0 = Vector::Ones(m);
  const Vector p0 = Vector::Zero(m);
  Vector x0 = Vector::Zero(sys.dim());
  x0.head(m) = q0;

  std::vector<double> logn, logratio, logstep;
  for (long n : steps) {
    DirectGleProblem prob;
    prob.a_eff = blocks.a_eff;
    prob.gamma11 = blocks.g11;
    prob.kbt = 0.0;
    prob.kernel = kernel_table(blocks, dt, static_cast<std::size_t>(n) + 1);
    DirectGleConfig dcfg;
    dcfg.dt = dt;
    dcfg.steps = n;
    dcfg.colored_noise = false;

    BenchRow row;
    row.steps = n;
    row.direct_seconds = time_seconds([&] { (void)simulate_direct_gle(prob, dcfg, q0, p0); });
    std::mt19937_64 engine(0);
    row.extended_seconds = time_seconds([&] { (void)integrator.run(x0, n, 1, engine); });
    row.ratio = row.direct_seconds / row.extended_seconds;
    const double mm = static_cast<double>(m * m);
    const double nn = static_cast<double>(n);
    row.direct_ops = mm * (0.5 * nn * nn + 3.0 * nn);
    row.extended_ops = nn * (static_cast<double>(ny * ny) + 2.0 * mm);
    row.extended_per_step = row.extended_seconds / nn;
    rep.rows.push_back(row);
    logn.push_back(std::log(nn));
    logratio.push_back(std::log(row.ratio));
    logstep.push_back(std::log(row.extended_per_step));
  }
  if (steps.size() >= 2) {
    rep.ratio_exponent = slope(logn, logratio);
    rep.extended_step_slope = slope(logn, logstep);
  }
  return rep;
}

int cmd_bench(const PipelineConfig& cfg, std::ostream& log) {
  PipelineConfig local = cfg;
  local.orders = {cfg.bench_order};
  const ReductionRun run = run_reduction(local);
  if (run.fits.empty()) {
    log_failures(run, log);
    return static_cast<int>(run.failures.begin()->second.code);
  }
  const BenchReport rep = run_bench(run.blocks, run.fits.begin()->second, cfg.bench_steps, cfg.sim.dt);
  json rows = json::array();
  std::string csv = "steps,direct_s,extended_s,ratio,direct_ops,extended_ops,extended_s_per_step\n";
  log << "m=" << rep.m << " order=" << rep.order << " dt=" << cfg.sim.dt << "\n";
  log << "   steps     direct[s]   extended[s]       ratio    direct ops  extended ops\n";
  for (const auto& r : rep.rows) {
    rows.push_back({{"steps", r.steps},
                    {"direct_seconds", r.direct_seconds},
                    {"extended_seconds", r.extended_seconds},
                    {"ratio", r.ratio},
                    {"direct_ops", r.direct_ops},
                    {"extended_ops", r.extended_ops},
                    {"extended_seconds_per_step", r.extended_per_step}});
    csv += std::to_string(r.steps) + "," + fmt("%.6g", r.direct_seconds) + "," + fmt("%.6g", r.extended_seconds) +
           "," + fmt("%.6g", r.ratio) + "," + fmt("%.6g", r.direct_ops) + "," + fmt("%.6g", r.extended_ops) + "," +
           fmt("%.6g", r.extended_per_step) + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%8ld  %12.4e  %12.4e  %10.3f  %12.4e  %12.4e\n", r.steps, r.direct_seconds,
                  r.extended_seconds, r.ratio, r.direct_ops, r.extended_ops);
    log << line;
  }
  log << "ratio growth exponent: " << fmt("%.3f", rep.ratio_exponent)
      << ", extended per-step slope: " << fmt("%.3f", rep.extended_step_slope) << "\n";
  json out = {{"m", rep.m},
              {"order", rep.order},
              {"dt", cfg.sim.dt},
              {"rows", rows},
              {"ratio_exponent", rep.ratio_exponent},
              {"extended_step_slope", rep.extended_step_slope},
              {"provenance", provenance(cfg)}};
  io::write_text(cfg.out_dir / "bench.json", out.dump(2) + "\n");
  io::write_text(cfg.out_dir / "bench.csv", csv);
  return 0;
}

}  // namespace gle

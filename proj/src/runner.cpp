#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "dispersim/config.hpp"
#include "dispersim/io.hpp"
#include "dispersim/verify.hpp"

namespace dispersim {

namespace {

using nlohmann::json;

json report_to_json(const EstimateReport& rep) {
  json j;
  j["values"] = rep.values;
  j["window"] = {rep.window_start, rep.window_end};
  j["boundary_contaminated"] = rep.boundary_contaminated;
  j["provenance"] = rep.provenance;
  if (rep.refinement_delta)
    j["refinement_delta"] = *rep.refinement_delta;
  else
    j["refinement_delta"] = nullptr;
  j["flags"] = rep.flags;
  return j;
}

json fit_to_json(const DecayFit& fit) {
  json j;
  j["values"] = {{"exponent", fit.exponent},
                 {"intercept", fit.intercept},
                 {"r_squared", fit.r_squared}};
  j["window"] = {fit.t_min, fit.t_max};
  j["refinement_delta"] = nullptr;
  json flags = json::array();
  if (!fit.defined) flags.push_back("undefined_fit");
  if (fit.defined && !fit.decreasing) flags.push_back("non_decaying");
  j["flags"] = flags;
  return j;
}

double param(const json& p, const std::string& key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number())
    throw SchemaError("check parameter '" + key + "' must be a number");
  return p[key].get<double>();
}

Vec3 param_vec(const json& p, const std::string& key, const Vec3& fallback) {
  if (!p.contains(key)) return fallback;
  const json& a = p[key];
  if (!a.is_array() || a.empty() || a.size() > 3)
    throw SchemaError("check parameter '" + key + "' must be a short array");
  Vec3 v{0, 0, 0};
  for (std::size_t d = 0; d < a.size(); ++d) v[d] = a[d].get<double>();
  return v;
}

std::vector<AdmissiblePair> param_pairs(const json& p, int dim) {
  if (!p.contains("pairs")) return list_admissible_pairs(dim);
  std::vector<AdmissiblePair> out;
  for (const auto& e : p["pairs"]) {
    if (!e.is_array() || e.size() != 2)
      throw SchemaError("'pairs' entries must be [p, q]");
    double pp = e[0].is_string() ? kInf : e[0].get<double>();
    out.push_back({pp, e[1].get<double>()});
  }
  return out;
}

const std::set<std::string> kScalarChecks = {
    "dispersive",   "strichartz",    "energy",       "weighted_curve",
    "weighted_operator", "kato",     "orthogonality", "decomposition"};
const std::set<std::string> kMatrixChecks = {"matrix_conjugacy",
                                             "matrix_stability", "energy"};

struct RunState {
  ExperimentConfig cfg;
  GridPtr grid;
  std::optional<ChargeTransferModel> model;
  std::optional<MatrixChargeTransferModel> matrix_model;
  std::vector<SpectralFamily> families;
  bool families_ready = false;
  ComplexField psi0;
  SpinorField spinor0;
  Trajectory traj;
};

const std::vector<SpectralFamily>& need_families(RunState& st) {
  if (!st.families_ready) {
    for (std::size_t j = 0; j < st.cfg.wells.size(); ++j) {
      PotentialSpec frozen = st.cfg.wells[j];
      frozen.velocity = {0, 0, 0};
      SpectralFamily fam = bound_states(frozen, st.grid, 8);
      fam.channel = static_cast<int>(j);
      st.families.push_back(std::move(fam));
    }
    st.families_ready = true;
  }
  return st.families;
}

json run_check(RunState& st, const CheckSpec& check) {
  const auto& cfg = st.cfg;
  const json& p = check.params;
  const double T = cfg.t1;
  const double default_sigma = 0.5 * cfg.dim + 0.51;

  if (check.name == "dispersive") {
    DispersiveResult r =
        dispersive_report(*st.model, st.psi0, T, cfg.dt, cfg.stride,
                          param(p, "fit_start_frac", 0.25));
    return report_to_json(r.report);
  }
  if (check.name == "strichartz") {
    return report_to_json(strichartz_report(st.traj, param_pairs(p, cfg.dim)));
  }
  if (check.name == "energy") {
    return report_to_json(
        energy_report(st.traj, static_cast<int>(param(p, "k", 1))));
  }
  if (check.name == "weighted_curve") {
    return report_to_json(weighted_curve_report(
        *st.model, st.psi0, param_vec(p, "curve_velocity", {0, 0, 0}),
        param(p, "sigma", default_sigma), T, cfg.dt, cfg.stride));
  }
  if (check.name == "weighted_operator") {
    DecayFit fit = weighted_operator_report(
        *st.model, need_families(st), param_vec(p, "x0", {0, 0, 0}),
        param_vec(p, "x1", {0, 0, 0}), param(p, "sigma", default_sigma), T,
        cfg.dt, static_cast<int>(param(p, "probes", 3)), cfg.stride, cfg.seed);
    return fit_to_json(fit);
  }
  if (check.name == "kato") {
    return report_to_json(kato_smoothing_report(
        st.psi0, param(p, "sigma", default_sigma), T, cfg.dt, cfg.stride));
  }
  if (check.name == "orthogonality") {
    OrthogonalityDecay d =
        orthogonality_decay_report(*st.model, st.traj, need_families(st));
    json j = fit_to_json(d.fit);
    j["values"]["transient_end"] = d.transient_end;
    j["values"]["already_orthogonal"] = d.already_orthogonal ? 1.0 : 0.0;
    return j;
  }
  if (check.name == "decomposition") {
    DecompositionReport r =
        asymptotic_decomposition(*st.model, st.traj, need_families(st));
    json j;
    json coeffs = json::array();
    for (const auto& c : r.coeff_stationary)
      coeffs.push_back({{"channel", 0}, {"abs", std::abs(c)}});
    for (const auto& c : r.coeff_moving)
      coeffs.push_back({{"channel", 1}, {"abs", std::abs(c)}});
    j["coefficients"] = coeffs;
    j["values"] = {
        {"residual_final",
         r.residual_norms.size() >= 2
             ? r.residual_norms[r.residual_norms.size() - 2]
             : 0.0},
        {"residual_max",
         *std::max_element(r.residual_norms.begin(), r.residual_norms.end())}};
    j["window"] = {r.times.front(), r.fit_time};
    j["refinement_delta"] = nullptr;
    json flags = json::array();
    if (!r.residual_decreasing) flags.push_back("residual_not_decreasing");
    j["flags"] = flags;
    return j;
  }
  if (check.name == "matrix_conjugacy") {
    return report_to_json(matrix_conjugacy_report(
        cfg.channels[0], st.grid, st.spinor0, T, cfg.dt));
  }
  if (check.name == "matrix_stability") {
    auto pairs = matrix_bound_states(cfg.channels[0], st.grid);
    return report_to_json(matrix_stability_report(
        cfg.channels[0], st.grid, pairs, st.spinor0, T, cfg.dt, cfg.stride));
  }
  throw SchemaError("unknown check '" + check.name + "'");
}

int resolve_threads(const RunOptions& opts) {
  if (opts.threads > 0) return opts.threads;
  if (const char* env = std::getenv("DISPERSIM_THREADS")) {
    int t = std::atoi(env);
    if (t > 0) return t;
  }
  return 1;
}

}  // namespace

int run_experiment(const std::filesystem::path& config_path,
                   const RunOptions& opts) {
  RunState st;
  std::vector<std::string> adjustments;
  try {
    st.cfg = load_config(config_path, &adjustments);
    for (const auto& check : st.cfg.checks) {
      bool known = st.cfg.matrix ? kMatrixChecks.count(check.name) > 0
                                 : kScalarChecks.count(check.name) > 0;
      if (!known)
        throw SchemaError("check '" + check.name + "' is not available for " +
                          (st.cfg.matrix ? std::string("matrix")
                                         : std::string("scalar")) +
                          " models");
    }
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& a : adjustments) std::cerr << "adjusted: " << a << "\n";

  const auto& cfg = st.cfg;
  try {
    st.grid = make_grid(cfg.dim, cfg.points, cfg.box_length);
    ValidationReport validation;
    if (cfg.matrix) {
      st.matrix_model = MatrixChargeTransferModel{cfg.channels, st.grid};
      validation = validate_model(*st.matrix_model, cfg.initial.packet.width);
    } else {
      st.model = ChargeTransferModel{cfg.wells, st.grid};
      validation = validate_model(*st.model, cfg.initial.packet.width);
    }
    for (const auto& issue : validation.issues)
      if (!issue.hard) std::cerr << "warning: " << issue.message << "\n";
    require_valid(validation);
    if (validation.boundary_potential_max > 1e-8)
      std::cerr << "warning: potential reaches "
                << validation.boundary_potential_max
                << " on the boundary shell\n";
    if (validation.wrap_horizon < cfg.t1)
      std::cerr << "warning: a well wraps around the torus near t = "
                << validation.wrap_horizon << "\n";
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  int threads = resolve_threads(opts);
  int nsteps = static_cast<int>(std::llround((cfg.t1 - cfg.t0) / cfg.dt));
  if (opts.dry_run) {
    std::cout << "dry run: grid n=" << cfg.dim << " N=" << cfg.points
              << " L=" << cfg.box_length << ", " << nsteps << " steps of dt="
              << cfg.dt << ", " << (nsteps / cfg.stride + 1)
              << " snapshots, threads=" << threads << "\n";
    for (const auto& c : st.cfg.checks)
      std::cout << "  check: " << c.name << "\n";
    return 0;
  }

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  if (ec) {
    std::cerr << "cannot create output directory " << opts.out_dir << "\n";
    return 2;
  }

  try {
    // Initial data.
    if (cfg.matrix) {
      if (cfg.initial.kind == InitialData::Kind::file) {
        auto loaded = load_snapshot(cfg.initial.path);
        if (!std::holds_alternative<SpinorField>(loaded))
          throw SchemaError("matrix run needs a spinor snapshot");
        st.spinor0 = std::get<SpinorField>(std::move(loaded));
        if (!st.spinor0.grid().same_as(*st.grid))
          throw SchemaError("snapshot grid does not match the config grid");
      } else {
        st.spinor0 = SpinorField(st.grid);
        st.spinor0.up = gaussian_packet_field(st.grid, cfg.initial.packet);
      }
    } else {
      switch (cfg.initial.kind) {
        case InitialData::Kind::packet:
          if (cfg.initial.prepare_scattering) {
            st.psi0 = prepare_scattering_state(cfg.initial.packet, *st.model,
                                               need_families(st))
                          .field;
          } else {
            st.psi0 = gaussian_packet_field(st.grid, cfg.initial.packet);
          }
          break;
        case InitialData::Kind::bound_state: {
          const auto& fams = need_families(st);
          if (cfg.initial.channel >= static_cast<int>(fams.size()) ||
              cfg.initial.index >=
                  static_cast<int>(fams[cfg.initial.channel].size()))
            throw SchemaError("bound_state initial data out of range");
          st.psi0 =
              fams[cfg.initial.channel].states[cfg.initial.index].eigenfunction;
          break;
        }
        case InitialData::Kind::file: {
          auto loaded = load_snapshot(cfg.initial.path);
          if (!std::holds_alternative<ComplexField>(loaded))
            throw SchemaError("scalar run needs a scalar snapshot");
          st.psi0 = std::get<ComplexField>(std::move(loaded));
          if (!st.psi0.grid().same_as(*st.grid))
            throw SchemaError("snapshot grid does not match the config grid");
          break;
        }
      }
    }

    // Propagation.
    if (cfg.matrix)
      st.traj = evolve_matrix(*st.matrix_model, st.spinor0, cfg.t0, cfg.t1,
                              cfg.dt, cfg.stride);
    else
      st.traj = evolve(*st.model, st.psi0, cfg.t0, cfg.t1, cfg.dt, cfg.stride);
  } catch (const PropagationError& e) {
    std::cerr << "propagation error: " << e.what() << "\n";
    return 3;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  // Time series.
  {
    std::ofstream csv(opts.out_dir / "timeseries.csv");
    csv << "t,value,boundary_shell_mass\n";
    csv.precision(15);
    for (std::size_t i = 0; i < st.traj.size(); ++i)
      csv << st.traj.times[i] << "," << st.traj.diagnostics[i].l2_norm << ","
          << st.traj.diagnostics[i].boundary_shell_mass << "\n";
  }

  if (cfg.save_snapshots) {
    for (std::size_t i = 0; i < st.traj.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%04zu.dspf", i);
      if (st.traj.is_spinor())
        emit_snapshot(st.traj.spinors[i], opts.out_dir / name);
      else
        emit_snapshot(st.traj.fields[i], opts.out_dir / name);
    }
  }

  // Checks.
  json report = json::object();
  bool any_flagged = false;
  int exit_code = 0;
  for (const auto& check : st.cfg.checks) {
    try {
      json entry = run_check(st, check);
      if (entry.contains("flags") && !entry["flags"].empty())
        any_flagged = true;
      report[check.name] = std::move(entry);
    } catch (const PropagationError& e) {
      std::cerr << "propagation error in check '" << check.name
                << "': " << e.what() << "\n";
      return 3;
    } catch (const std::runtime_error& e) {
      report[check.name] = {{"error", e.what()}};
      any_flagged = true;
    }
  }
  {
    std::ofstream os(opts.out_dir / "report.json");
    os << report.dump(2) << "\n";
  }

  // Manifest.
  {
    json manifest;
    manifest["config_path"] = config_path.string();
    manifest["config"] = cfg.raw;
    manifest["adjustments"] = adjustments;
    manifest["grid"] = {{"dim", cfg.dim},
                        {"points", cfg.points},
                        {"box_length", cfg.box_length}};
    manifest["seed"] = cfg.seed;
    manifest["threads"] = threads;
    manifest["steps"] = nsteps;
    manifest["snapshot_version"] = kSnapshotVersion;
    std::ofstream os(opts.out_dir / "manifest.json");
    os << manifest.dump(2) << "\n";
  }

  if (any_flagged) exit_code = 1;
  return exit_code;
}

}  // namespace dispersim

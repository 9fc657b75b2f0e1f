#include <iostream>

#include <CLI11.hpp>

#include "dispersim/config.hpp"
#include "dispersim/norms.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudospectral simulator for charge transfer models"};
  app.require_subcommand(1);

  std::string config_path;
  dispersim::RunOptions opts;

  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", opts.out_dir, "output directory");
  run->add_option("--threads", opts.threads,
                  "worker threads (DISPERSIM_THREADS also honored)");
  run->add_flag("--dry-run", opts.dry_run,
                "validate and print the plan without propagating");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Validate a config file");
  validate->add_option("config", validate_path, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);

  int pairs_dim = 0;
  auto* pairs = app.add_subcommand("pairs", "List admissible exponent pairs");
  pairs->add_option("--dim", pairs_dim, "space dimension (1-3)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return dispersim::run_experiment(config_path, opts);

    if (validate->parsed()) {
      std::vector<std::string> adjustments;
      try {
        auto cfg = dispersim::load_config(validate_path, &adjustments);
        auto grid = dispersim::make_grid(cfg.dim, cfg.points, cfg.box_length);
        dispersim::ValidationReport rep;
        if (cfg.matrix) {
          dispersim::MatrixChargeTransferModel m{cfg.channels, grid};
          rep = dispersim::validate_model(m, cfg.initial.packet.width);
        } else {
          dispersim::ChargeTransferModel m{cfg.wells, grid};
          rep = dispersim::validate_model(m, cfg.initial.packet.width);
        }
        for (const auto& a : adjustments) std::cout << "adjusted: " << a << "\n";
        bool bad = false;
        for (const auto& i : rep.issues) {
          std::cout << (i.hard ? "error: " : "warning: ") << i.message << "\n";
          bad = bad || i.hard;
        }
        if (rep.wrap_horizon < dispersim::ValidationReport::kInfHorizon)
          std::cout << "wrap horizon: t = " << rep.wrap_horizon << "\n";
        if (!bad) std::cout << "ok\n";
        return bad ? 2 : 0;
      } catch (const dispersim::SchemaError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      } catch (const dispersim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }

    if (pairs->parsed()) {
      if (pairs_dim < 1 || pairs_dim > 3) {
        std::cerr << "dimension must be 1, 2, or 3\n";
        return 2;
      }
      for (const auto& pr : dispersim::list_admissible_pairs(pairs_dim)) {
        if (pr.p == dispersim::kInf)
          std::cout << "(inf, " << pr.q << ")\n";
        else
          std::cout << "(" << pr.p << ", " << pr.q << ")\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// interf_sweep: phase-error curves for the round-trip interferometer.
//
//   interf_sweep --family optimal --axis n --eta 0.9 --out fig2_left.csv
//   interf_sweep --family mm --axis eta --n 20 --m-prime 10 --out fig3_right.csv
//
// Exit codes: 0 success, 1 usage error, 2 validation failure, 3 I/O error.
// Flags override `--config` (key=value per line), which overrides defaults.

#include "interf/sweep.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kIo = 3 };

std::string sidecar(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  p.replace_extension(suffix);
  return p.string();
}

void write_validation(const std::string& out, const interf::ValidationReport& rep) {
  interf::write_file(sidecar(out, ".validation.txt"), rep.to_table());
  interf::write_file(sidecar(out, ".validation.kv"), rep.to_key_value());
}

}  // namespace

int main(int argc, char** argv) {
  using interf::StateFamily;
  using interf::SweepAxis;

  interf::SweepConfig cfg;
  CLI::App app{"Phase-error sweeps for single-mode round-trip interferometry"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  const std::map<std::string, StateFamily> families{
      {"optimal", StateFamily::optimal}, {"mm", StateFamily::mm}, {"no", StateFamily::no}, {"noon", StateFamily::noon}};
  const std::map<std::string, SweepAxis> axes{{"n", SweepAxis::n}, {"eta", SweepAxis::eta}};

  double n_min = 0.0;
  std::string external;
  bool emit_plot = false;

  app.add_option("--family", cfg.family, "Input state family")
      ->transform(CLI::CheckedTransformer(families, CLI::ignore_case));
  app.add_option("--axis", cfg.axis, "Swept parameter")->transform(CLI::CheckedTransformer(axes, CLI::ignore_case));
  app.add_option("--eta", cfg.fixed_eta, "Transmissivity for --axis n")->capture_default_str();
  app.add_option("--n", cfg.fixed_n, "Average photon number for --axis eta")->capture_default_str();
  auto* n_min_opt = app.add_option("--n-min", n_min, "First N (default 2; M'+1 for mm)");
  app.add_option("--n-max", cfg.n_max, "Last N")->capture_default_str();
  app.add_option("--n-step", cfg.n_step, "N step")->capture_default_str();
  app.add_option("--eta-min", cfg.eta_min, "First eta")->capture_default_str();
  app.add_option("--eta-max", cfg.eta_max, "Last eta")->capture_default_str();
  app.add_option("--eta-step", cfg.eta_step, "eta step")->capture_default_str();
  app.add_option("--m-prime", cfg.m_prime, "M' for the mm family (M = 2N - M')")->capture_default_str();
  app.add_option("--phi-grid", cfg.phi_grid_points, "Phase grid points per period")->capture_default_str();
  app.add_option("--rounds", cfg.rounds, "Round trips")->capture_default_str();
  app.add_flag("--validate", cfg.validate, "Check closed forms against the Kraus oracle first");
  app.add_option("--external", external, "Two-column CSV of comparison data (sweep, error)");
  app.add_option("--out", cfg.output_path, "Output CSV")->capture_default_str();
  app.add_flag("--emit-plot", emit_plot, "Also write a gnuplot script next to the CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (n_min_opt->count() > 0) cfg.n_min = n_min;
  if (!external.empty()) cfg.external_comparison_file = external;

  if ((cfg.family == StateFamily::mm || cfg.family == StateFamily::no)) {
    // A's index sets overlap when delta <= M'; the results are still consistent.
    const int mp = cfg.family == StateFamily::mm ? cfg.m_prime : 0;
    try {
      for (double v : interf::sweep_values(cfg)) {
        const auto p = interf::row_params(cfg, v);
        if (interf::observable_a_overlaps(p.m, mp)) {
          std::clog << "warning: delta <= M' at M=" << p.m << ", M'=" << mp
                    << "; observable A chains basis states\n";
          break;
        }
      }
    } catch (const std::exception&) {
      // reported by run_sweep below
    }
  }

  if (cfg.rounds > 0 && cfg.rounds % 2 == 0)
    std::clog << "warning: an even number of round trips cancels phi; the output state carries no phase information\n";

  const auto t0 = std::chrono::steady_clock::now();
  interf::SweepResult res;
  try {
    res = interf::run_sweep(cfg);
  } catch (const interf::ValidationFailure& e) {
    try {
      write_validation(cfg.output_path, e.report);
    } catch (const interf::InputError& io) {
      std::cerr << "error: " << io.what() << '\n';
      return kIo;
    }
    std::cerr << "validation failed: " << e.what() << "\nreport: " << sidecar(cfg.output_path, ".validation.txt")
              << '\n';
    return kValidation;
  } catch (const interf::ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kValidation;
  }

  try {
    if (res.validation) write_validation(cfg.output_path, *res.validation);
    std::string csv = interf::to_csv(res.rows);
    if (cfg.external_comparison_file) {
      auto merged = interf::merge_external(csv, interf::read_file(*cfg.external_comparison_file));
      for (const auto& w : merged.warnings) std::clog << "warning: " << w << '\n';
      csv = std::move(merged.csv);
    }
    interf::write_file(cfg.output_path, csv);
    if (cfg.family == StateFamily::optimal)
      interf::write_file(sidecar(cfg.output_path, ".diag.csv"), interf::to_diagnostic_csv(res.rows));
    if (emit_plot) {
      const auto gp = interf::emit_gnu_plot_script(cfg.output_path, cfg.axis == SweepAxis::n ? "N" : "eta");
      std::cout << "plot script: " << gp << '\n';
    }
  } catch (const interf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "family=" << interf::to_string(cfg.family) << " axis=" << interf::to_string(cfg.axis)
            << " rows=" << res.rows.size() << " max_M=" << res.max_m << " time=" << secs << "s\n";
  if (res.validation)
    std::cout << "validation: max_dev=" << res.validation->max_dev() << " status="
              << (res.validation->passed() ? "pass" : "fail") << '\n';
  std::cout << "wrote " << cfg.output_path << '\n';
  return kOk;
}

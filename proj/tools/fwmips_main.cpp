#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwmips/bench.hpp"
#include "fwmips/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe over MaxIP oracles: instance generation, calibration, "
               "experiment runs and reports"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir = "out";
  bool fallback_exact = false;
  std::vector<std::string> run_dirs;

  auto* generate = app.add_subcommand("generate", "write instance files for a spec");
  generate->add_option("--spec", spec_path, "experiment spec JSON")->required();
  generate->add_option("--out", out_dir, "output directory override");

  auto* calibrate = app.add_subcommand("calibrate", "pilot sweeps for planner constants");
  calibrate->add_option("--out", out_dir, "output directory");

  auto* run = app.add_subcommand("run", "execute all seeds of a spec");
  run->add_option("--spec", spec_path, "experiment spec JSON")->required();
  run->add_option("--out", out_dir, "output directory override");
  run->add_flag("--fallback-exact", fallback_exact,
                "debug: exact scan instead of r-halving on oracle failure");

  auto* report = app.add_subcommand("report", "aggregate run directories");
  report->add_option("--runs", run_dirs, "run directories")->required();
  report->add_option("--out", out_dir, "report output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      fwmips::ExperimentSpec spec = fwmips::ExperimentSpec::from_json_file(spec_path);
      if (generate->count("--out")) spec.output_dir = out_dir;
      return fwmips::cmd_generate(spec);
    }
    if (calibrate->parsed()) {
      const auto path = fwmips::cmd_calibrate(out_dir);
      std::cout << "calibration written to " << path.string() << "\n";
      return 0;
    }
    if (run->parsed()) {
      fwmips::ExperimentSpec spec = fwmips::ExperimentSpec::from_json_file(spec_path);
      if (run->count("--out")) spec.output_dir = out_dir;
      spec.fallback_exact = fallback_exact;
      return fwmips::cmd_run(spec);
    }
    if (report->parsed()) {
      std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
      return fwmips::cmd_report(dirs, out_dir);
    }
  } catch (const fwmips::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const fwmips::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}

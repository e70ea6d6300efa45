#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "strongstab/cli.hpp"

namespace cli = strongstab::cli;

namespace {

std::pair<double, double> parse_bracket(const std::string& text) {
  double lo = 0.0, hi = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf%c", &lo, &hi, &tail) != 2 || !(0.0 < lo && lo < hi)) {
    throw CLI::ValidationError("--bracket", "expected lo:hi with 0 < lo < hi");
  }
  return {lo, hi};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable H-infinity controller synthesis via strong stabilization"};
  app.set_version_flag("--version", STRONGSTAB_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")->envname("STRONGSTAB_CONFIG");
  app.add_option("--out", out_dir, "Directory for reports and CSV files");
  app.add_option("--seed", seed, "Seed for randomized certificate checks");
  app.add_flag("--verbose", verbose, "Print search probes");

  cli::AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "PIP, zeros, norm and assumption checks");
  analyze_cmd->add_option("plant", analyze.plant_path, "Plant JSON file")->required();
  analyze_cmd->add_flag("--pip", analyze.pip, "Parity interlacing check on the u->y channel");
  analyze_cmd->add_flag("--norm", analyze.norm, "H-infinity norm of a stable plant");
  analyze_cmd->add_flag("--zeros", analyze.zeros, "Transmission zeros of the u->y channel");
  analyze_cmd->add_flag("--assumptions", analyze.assumptions,
                        "Check the synthesis assumptions even without a performance channel");

  cli::StrongStabArgs ss;
  auto* ss_cmd = app.add_subcommand("strongstab", "Stable stabilizing controller with a norm bound");
  ss_cmd->add_option("plant", ss.plant_path, "Plant JSON file")->required();
  auto* gamma_k = ss_cmd->add_option("--gamma-k", ss.gamma_K, "Controller norm bound");
  auto* minimize = ss_cmd->add_flag("--minimize", ss.minimize, "Minimize the controller norm bound");
  auto* stab_only = ss_cmd->add_flag("--stability-only", ss.stability_only, "Drop the norm bound");
  ss_cmd->add_flag("--structured", ss.structured, "Restrict to Z = -gamma_K C^T");
  ss_cmd->add_flag("--dump-lmi", ss.dump_lmi, "Write the LMI matrices next to the report");
  gamma_k->excludes(minimize)->excludes(stab_only);
  minimize->excludes(stab_only);

  cli::StableHinfArgs sh;
  std::optional<std::string> bracket;
  auto* sh_cmd = app.add_subcommand("stable-hinf", "Stable H-infinity controller");
  sh_cmd->add_option("plant", sh.plant_path, "Plant JSON file")->required();
  auto* gamma = sh_cmd->add_option("--gamma", sh.gamma, "Closed-loop norm bound");
  auto* min_gamma = sh_cmd->add_flag("--min-gamma", sh.min_gamma, "Search the smallest bound");
  sh_cmd->add_option("--bracket", bracket, "Search bracket lo:hi")->needs(min_gamma);
  sh_cmd->add_option("--tol", sh.tol, "Relative tolerance of the gamma search");
  gamma->excludes(min_gamma);

  cli::BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Reference cases and sweeps");
  bench_cmd->add_option("case", bench.case_name,
                        "lee-soh, benchmark10, siso-mixed-sensitivity, g1-sweep, g2-sweep, "
                        "cc-pipeline or all")
      ->required();
  bench_cmd->add_option("--alpha", bench.alpha, "Sweep grid lo:hi:points");
  bench_cmd->add_option("--beta", bench.betas, "Benchmark control weights");

  CLI11_PARSE(app, argc, argv);

  cli::RunConfig config;
  try {
    if (bracket) sh.bracket = parse_bracket(*bracket);
    config = cli::load_config(config_path);
    if (out_dir) config.out_dir = *out_dir;
    if (seed) config.seed = *seed;
    if (verbose) config.verbose = true;
    cli::validate(config);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const strongstab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kError;
  }

  if (analyze_cmd->parsed()) return cli::cmd_analyze(analyze, config, std::cout, std::cerr);
  if (ss_cmd->parsed()) return cli::cmd_strongstab(ss, config, std::cout, std::cerr);
  if (sh_cmd->parsed()) return cli::cmd_stable_hinf(sh, config, std::cout, std::cerr);
  return cli::cmd_bench(bench, config, std::cout, std::cerr);
}

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "strongstab/bench.hpp"
#include "strongstab/hinfsynth.hpp"
#include "strongstab/strongstab.hpp"
#include "strongstab/sysmodel.hpp"

namespace strongstab::cli {

using nlohmann::json;

enum ExitCode : int { kSuccess = 0, kError = 1, kInfeasible = 2 };

/// A plant read from disk. Plain files ({"A","B","C"[,"D"]}) describe only
/// the u→y channel and load with empty disturbance/performance partitions.
struct PlantFile {
  std::string name;
  GeneralizedPlant plant;
  bool plain = false;

  PlantTriple channel() const { return PlantTriple::from(plant); }
};

PlantFile parse_plant(const std::string& text, const std::string& origin = "<string>");
PlantFile load_plant(const std::string& path);
json plant_to_json(const PlantFile& file);

struct RunConfig {
  double eps_strict = 0.0;  // 0 selects the relative margin below
  double eps_relative = 1e-6;
  double bisect_tol = 1e-5;
  double schur_tol = 1e-9;
  double condition_threshold = 1e8;
  double gamma_lo = 1e-3;
  double gamma_hi = 1e6;
  double axis_shift = 1e-4;
  int sweep_points = 60;
  std::string out_dir = ".";
  std::uint64_t seed = 0x5eed;
  bool verbose = false;
  bench::Weights weights;

  json snapshot() const;
  StrongStabOptions strongstab_options() const;
  HinfOptions hinf_options() const;
};

/// Config JSON merged over defaults, then STRONGSTAB_<KEY> environment
/// overrides. Throws ParseError / BadShape on invalid input.
RunConfig load_config(const std::optional<std::string>& path);
void apply_json(RunConfig& config, const json& j);
void apply_environment(RunConfig& config);
void validate(const RunConfig& config);

struct StrongStabArgs {
  std::string plant_path;
  std::optional<double> gamma_K;
  bool minimize = false;
  bool stability_only = false;
  bool structured = false;
  bool dump_lmi = false;
};

struct StableHinfArgs {
  std::string plant_path;
  std::optional<double> gamma;
  bool min_gamma = false;
  std::optional<std::pair<double, double>> bracket;
  std::optional<double> tol;
};

struct BenchArgs {
  std::string case_name = "all";
  std::optional<std::string> alpha;  // "lo:hi:points"
  std::vector<double> betas;
};

struct AnalyzeArgs {
  std::string plant_path;
  bool pip = false;
  bool norm = false;
  bool zeros = false;
  bool assumptions = false;
};

/// Each command prints a short summary to `out`, diagnostics to `err`, writes
/// its JSON (and CSV for bench) into config.out_dir and returns the exit code.
int cmd_strongstab(const StrongStabArgs& args, const RunConfig& config, std::ostream& out,
                   std::ostream& err);
int cmd_stable_hinf(const StableHinfArgs& args, const RunConfig& config, std::ostream& out,
                    std::ostream& err);
int cmd_bench(const BenchArgs& args, const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeArgs& args, const RunConfig& config, std::ostream& out,
                std::ostream& err);

/// Maps an error to the exit-code contract.
int exit_code_for(ErrorCode code);

json to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& what);
std::string format6(double v);

/// Parses "lo:hi:points".
std::vector<double> parse_grid(const std::string& spec);

/// Largest σ_max(S(jω)) over `samples` frequencies drawn log-uniformly from
/// [1e-3, 1e3]·scale with the given seed.
double random_frequency_peak(const StateSpace& S, std::uint64_t seed, int samples = 64);

}  // namespace strongstab::cli

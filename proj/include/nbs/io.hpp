// io.hpp
//
// Instance generation (synthetic deficit/surplus settings), workload-trace
// ingestion, file serialization, and the experiment runner behind the CLI.

#ifndef NBSHARE_IO_HPP
#define NBSHARE_IO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nbs/metrics.hpp"
#include "nbs/model.hpp"
#include "nbs/nbs_dist.hpp"
#include "nbs/protocol.hpp"

namespace nbs {

enum class SolverKind { Alone, Central, Dist, Protocol };

const char* solver_kind_name(SolverKind kind);
std::optional<SolverKind> parse_solver_kind(const std::string& name);

struct ExperimentConfig {
  // network shape: a preset (1-5) or custom dimensions
  int preset = 1;  // 0 means custom
  int providers = 3;
  int apps_per_provider = 3;
  int resources = 3;

  std::uint64_t seed = 1;

  // synthetic generation
  double request_lo = 1.0;
  double request_hi = 5.0;
  std::vector<int> deficit_providers = {0};
  double deficit_factor = 0.6;
  double surplus_factor = 1.5;
  double delta = 1.0;
  double comm_weight_lo = 5.0;
  double comm_weight_hi = 15.0;

  // solving
  SolverKind solver = SolverKind::Central;
  DistConfig dist;
  double central_grad_tol = 1e-6;
  long central_max_iters = 50000;

  // inputs: a trace file, a saved instance, or neither (generate)
  std::string trace_path;
  std::string instance_path;
  int trace_apps_per_provider = 20;

  std::string out_dir = ".";
  bool engine_trace = false;
};

// Applies a preset's dimensions (Table of network settings) to the config.
// Preset 0 leaves custom dimensions untouched. Throws BadConfig.
void apply_preset(ExperimentConfig& config);

// Seeded synthetic instance: uniform requests, capacities set to the native
// demand scaled by the deficit or surplus factor, uniform comm weights.
// Deterministic for a fixed seed across platforms.
Instance generate_instance(const ExperimentConfig& config);

struct IngestWarning {
  std::string column;
  double max_value = 0;  // values were divided by this
};

struct IngestResult {
  Instance instance;
  std::vector<IngestWarning> warnings;
  std::vector<std::string> provider_tags;
};

// Reads a delimited text file with a header naming provider plus the three
// resource columns (cpu_cores, cpu, memory), samples rows per provider tag,
// and builds a K=3 instance with the deficit/surplus capacity rule.
// Throws ParseError / MissingColumn.
IngestResult ingest_trace(const std::string& path,
                          const ExperimentConfig& config);

// --- file formats -----------------------------------------------------------

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
void save_instance(const Instance& inst, const std::string& path);
Instance load_instance(const std::string& path);

struct SolutionFile {
  std::string solver;
  Allocation allocation;
  std::vector<double> d0;
  std::vector<double> utility;
  std::vector<double> surplus;
  bool converged = true;
  long iterations = 0;
  double objective = 0;  // log objective when defined
};

std::string solution_to_json(const SolutionFile& sol);
SolutionFile solution_from_json(const std::string& text, const Instance& inst);
void save_solution(const SolutionFile& sol, const std::string& path);
SolutionFile load_solution(const std::string& path, const Instance& inst);

std::string metrics_to_json(const MetricsReport& rep);
MetricsReport metrics_from_json(const std::string& text);
std::string metrics_to_csv(const MetricsReport& rep);

std::string round_trace_to_text(const std::vector<RoundRecord>& trace);

// --- experiment runner ------------------------------------------------------

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNotConverged = 3;

struct ExperimentResult {
  int exit_code = kExitOk;
  Instance instance;
  StandaloneSolution alone;
  SolutionFile solution;
  MetricsReport metrics;
  std::optional<ProtocolTrace> protocol_trace;
};

// Builds or ingests the instance, solves, computes metrics, writes artifacts
// under config.out_dir, and prints a one-line summary per provider.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace nbs

#endif  // NBSHARE_IO_HPP

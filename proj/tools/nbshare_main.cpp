// nbshare_main.cpp
//
// Command-line entry points: generate, solve, ingest, report, batch.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "nbs/io.hpp"
#include "nbs/standalone.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("NBSHARE_OUT_DIR");
  return env ? env : ".";
}

void add_shape_options(CLI::App* cmd, nbs::ExperimentConfig& config) {
  cmd->add_option("--preset", config.preset,
                  "network setting 1-5 (0 = custom dimensions)");
  cmd->add_option("--providers", config.providers, "providers (custom preset)");
  cmd->add_option("--apps", config.apps_per_provider,
                  "apps per provider (custom preset)");
  cmd->add_option("--resources", config.resources, "resources (custom preset)");
  cmd->add_option("--seed", config.seed, "RNG seed");
  cmd->add_option("--request-lo", config.request_lo, "request range low");
  cmd->add_option("--request-hi", config.request_hi, "request range high");
  cmd->add_option("--deficit", config.deficit_providers,
                  "deficit provider indices");
  cmd->add_option("--deficit-factor", config.deficit_factor,
                  "capacity = factor * native demand for deficit providers");
  cmd->add_option("--surplus-factor", config.surplus_factor,
                  "capacity factor for the remaining providers");
  cmd->add_option("--delta", config.delta, "utility offset");
  cmd->add_option("--weight-lo", config.comm_weight_lo, "comm weight low");
  cmd->add_option("--weight-hi", config.comm_weight_hi, "comm weight high");
}

void add_solver_options(CLI::App* cmd, nbs::ExperimentConfig& config,
                        std::string& solver_name) {
  cmd->add_option("--solver", solver_name,
                  "alone | central | dist | protocol");
  cmd->add_option("--kkt-tol", config.dist.kkt_tol,
                  "distributed stopping tolerance");
  cmd->add_option("--max-rounds", config.dist.max_rounds,
                  "distributed round limit");
  cmd->add_option("--step", config.dist.uniform_step,
                  "distributed multiplier step size");
  cmd->add_flag("--decay", config.dist.sqrt_decay,
                "scale multiplier steps by 1/sqrt(round)");
  cmd->add_option("--grad-tol", config.central_grad_tol,
                  "central projected-gradient tolerance");
  cmd->add_option("--max-iters", config.central_max_iters,
                  "central iteration limit");
  cmd->add_flag("--engine-trace", config.engine_trace,
                "write per-round engine records");
}

int run_one(nbs::ExperimentConfig config, const std::string& solver_name) {
  if (auto kind = nbs::parse_solver_kind(solver_name)) {
    config.solver = *kind;
  } else {
    std::cerr << "error: unknown solver '" << solver_name << "'\n";
    return nbs::kExitBadConfig;
  }
  return nbs::run_experiment(config).exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nash-bargaining resource sharing: solvers and simulator"};
  app.require_subcommand(1);

  nbs::ExperimentConfig config;
  config.out_dir = default_out_dir();
  std::string solver_name = "central";
  std::string out_path;
  std::string batch_presets = "1,2,4,5";

  auto* gen = app.add_subcommand("generate", "write a synthetic instance file");
  add_shape_options(gen, config);
  gen->add_option("--out", out_path, "instance output path (default stdout)");

  auto* solve = app.add_subcommand("solve", "solve an instance");
  add_shape_options(solve, config);
  add_solver_options(solve, config, solver_name);
  solve->add_option("--instance", config.instance_path,
                    "saved instance file (skips generation)");
  solve->add_option("--trace", config.trace_path,
                    "workload trace file (skips generation)");
  solve->add_option("--out-dir", config.out_dir, "artifact directory");

  auto* ingest = app.add_subcommand("ingest", "trace file -> instance file");
  add_shape_options(ingest, config);
  ingest->add_option("--trace", config.trace_path, "workload trace file")
      ->required();
  ingest->add_option("--rows", config.trace_apps_per_provider,
                     "rows sampled per provider tag");
  ingest->add_option("--out", out_path, "instance output path (default stdout)");

  auto* report = app.add_subcommand("report", "recompute metrics from files");
  std::string instance_file, solution_file;
  report->add_option("--instance", instance_file, "instance file")->required();
  report->add_option("--solution", solution_file, "solution file")->required();
  report->add_option("--out-dir", config.out_dir, "artifact directory");

  auto* batch = app.add_subcommand("batch", "run several presets concurrently");
  add_shape_options(batch, config);
  add_solver_options(batch, config, solver_name);
  batch->add_option("--presets", batch_presets, "comma-separated preset list");
  batch->add_option("--out-dir", config.out_dir, "artifact directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      nbs::apply_preset(config);
      const nbs::Instance inst = nbs::generate_instance(config);
      if (out_path.empty())
        std::cout << nbs::instance_to_json(inst);
      else
        nbs::save_instance(inst, out_path);
      return nbs::kExitOk;
    }

    if (ingest->parsed()) {
      nbs::apply_preset(config);
      nbs::IngestResult result = nbs::ingest_trace(config.trace_path, config);
      for (const auto& w : result.warnings)
        std::cerr << "warning: column " << w.column
                  << " exceeded 1.0, rescaled by max " << w.max_value << "\n";
      if (out_path.empty())
        std::cout << nbs::instance_to_json(result.instance);
      else
        nbs::save_instance(result.instance, out_path);
      return nbs::kExitOk;
    }

    if (solve->parsed()) return run_one(config, solver_name);

    if (report->parsed()) {
      const nbs::Instance inst = nbs::load_instance(instance_file);
      const nbs::SolutionFile sol = nbs::load_solution(solution_file, inst);
      const nbs::StandaloneSolution alone = nbs::disagreement_vector(inst);
      const nbs::MetricsReport metrics =
          nbs::compare_alone_vs_nbs(inst, alone, sol.allocation);
      std::filesystem::create_directories(config.out_dir);
      std::ofstream(config.out_dir + "/metrics.json")
          << nbs::metrics_to_json(metrics);
      std::ofstream(config.out_dir + "/metrics.csv")
          << nbs::metrics_to_csv(metrics);
      std::cout << nbs::metrics_to_csv(metrics);
      return nbs::kExitOk;
    }

    if (batch->parsed()) {
      std::vector<int> presets;
      std::stringstream ss(batch_presets);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) presets.push_back(std::stoi(tok));
      if (presets.empty()) {
        std::cerr << "error: empty preset list\n";
        return nbs::kExitBadConfig;
      }
      std::vector<int> codes(presets.size(), 0);
      std::vector<std::thread> workers;
      for (size_t i = 0; i < presets.size(); ++i) {
        nbs::ExperimentConfig pc = config;
        pc.preset = presets[i];
        pc.out_dir = config.out_dir + "/preset" + std::to_string(presets[i]);
        workers.emplace_back([pc, &codes, i, &solver_name]() {
          codes[i] = run_one(pc, solver_name);
        });
      }
      for (auto& w : workers) w.join();
      int worst = nbs::kExitOk;
      for (int c : codes) worst = std::max(worst, c);
      return worst;
    }
  } catch (const nbs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nbs::kExitBadConfig;
  }
  return nbs::kExitOk;
}

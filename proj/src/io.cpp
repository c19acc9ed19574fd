#include "nbs/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"
#include "nbs/nbs_central.hpp"
#include "nbs/standalone.hpp"

namespace nbs {

namespace {

using nlohmann::json;

// Platform-independent uniform double in [0,1) from raw engine draws; the
// standard distributions are implementation-defined.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json allocation_to_json(const Allocation& X) {
  json a = json::array();
  for (int n = 0; n < X.providers(); ++n) {
    json row = json::array();
    for (int j = 0; j < X.apps(); ++j) {
      json cell = json::array();
      for (int k = 0; k < X.resources(); ++k) cell.push_back(X.at(n, j, k));
      row.push_back(cell);
    }
    a.push_back(row);
  }
  return a;
}

Allocation allocation_from_json(const json& a, const Instance& inst) {
  Allocation X(inst.num_providers, inst.num_apps(), inst.num_resources);
  for (int n = 0; n < X.providers(); ++n)
    for (int j = 0; j < X.apps(); ++j)
      for (int k = 0; k < X.resources(); ++k)
        X.at(n, j, k) = a.at(n).at(j).at(k).get<double>();
  return X;
}

void fill_capacities(Instance& inst, const std::vector<int>& deficit,
                     double deficit_factor, double surplus_factor) {
  for (int d : deficit)
    if (d < 0 || d >= inst.num_providers)
      throw BadConfig("deficit provider index out of range");
  for (int n = 0; n < inst.num_providers; ++n) {
    const bool is_deficit =
        std::find(deficit.begin(), deficit.end(), n) != deficit.end();
    const double factor = is_deficit ? deficit_factor : surplus_factor;
    for (int k = 0; k < inst.num_resources; ++k) {
      double demand = 0;
      for (int j : inst.native_apps[n]) demand += inst.req(j, k);
      inst.capacity[n * inst.num_resources + k] = factor * demand;
    }
  }
}

void draw_comm_weights(Instance& inst, std::mt19937_64& rng, double lo,
                       double hi) {
  const int M = inst.num_apps();
  inst.comm_weight.assign(static_cast<size_t>(inst.num_providers) * M, 0.0);
  for (int n = 0; n < inst.num_providers; ++n)
    for (int j = 0; j < M; ++j)
      if (inst.owner[j] != n)
        inst.comm_weight[n * M + j] = uniform_in(rng, lo, hi);
}

}  // namespace

const char* solver_kind_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::Alone: return "alone";
    case SolverKind::Central: return "central";
    case SolverKind::Dist: return "dist";
    case SolverKind::Protocol: return "protocol";
  }
  return "?";
}

std::optional<SolverKind> parse_solver_kind(const std::string& name) {
  if (name == "alone") return SolverKind::Alone;
  if (name == "central") return SolverKind::Central;
  if (name == "dist") return SolverKind::Dist;
  if (name == "protocol") return SolverKind::Protocol;
  return std::nullopt;
}

void apply_preset(ExperimentConfig& config) {
  switch (config.preset) {
    case 0: break;  // custom dimensions
    case 1: config.providers = 3; config.apps_per_provider = 3;  config.resources = 3; break;
    case 2: config.providers = 3; config.apps_per_provider = 20; config.resources = 3; break;
    case 3: config.providers = 3; config.apps_per_provider = 20; config.resources = 3; break;
    case 4: config.providers = 6; config.apps_per_provider = 6;  config.resources = 3; break;
    case 5: config.providers = 6; config.apps_per_provider = 20; config.resources = 3; break;
    default:
      throw BadConfig("preset must be 1-5 (or 0 for custom dimensions)");
  }
}

Instance generate_instance(const ExperimentConfig& config) {
  if (config.providers < 1 || config.apps_per_provider < 1 ||
      config.resources < 1)
    throw BadConfig("dimensions must be positive");
  if (!(config.request_lo > 0) || config.request_hi < config.request_lo)
    throw BadConfig("request range must be positive");
  if (!(config.comm_weight_lo > 0) ||
      config.comm_weight_hi < config.comm_weight_lo)
    throw BadConfig("comm weight range must be positive");
  if (!(config.delta > 0)) throw BadConfig("delta must be > 0");
  if (!(config.deficit_factor > 0) || !(config.surplus_factor > 0))
    throw BadConfig("capacity factors must be > 0");

  const int N = config.providers;
  const int A = config.apps_per_provider;
  const int K = config.resources;
  const int M = N * A;

  Instance inst;
  inst.num_providers = N;
  inst.num_resources = K;
  inst.native_apps.resize(N);
  for (int n = 0; n < N; ++n)
    for (int a = 0; a < A; ++a) inst.native_apps[n].push_back(n * A + a);

  std::mt19937_64 rng(config.seed);
  inst.requests.resize(static_cast<size_t>(M) * K);
  for (int j = 0; j < M; ++j)
    for (int k = 0; k < K; ++k)
      inst.requests[j * K + k] =
          uniform_in(rng, config.request_lo, config.request_hi);

  inst.delta.assign(M, config.delta);
  inst.scale.assign(M, 1.0);
  inst.capacity.assign(static_cast<size_t>(N) * K, 0.0);

  inst.owner.resize(M);
  for (int n = 0; n < N; ++n)
    for (int j : inst.native_apps[n]) inst.owner[j] = n;
  draw_comm_weights(inst, rng, config.comm_weight_lo, config.comm_weight_hi);
  fill_capacities(inst, config.deficit_providers, config.deficit_factor,
                  config.surplus_factor);
  inst.finalize();
  return inst;
}

IngestResult ingest_trace(const std::string& path,
                          const ExperimentConfig& config) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path, 0);

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty trace file", 0);
  const std::vector<std::string> header = split_csv(line);

  auto find_col = [&](const std::string& name) {
    for (size_t i = 0; i < header.size(); ++i)
      if (lower(header[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int col_provider = find_col("provider");
  if (col_provider < 0) throw MissingColumn("provider");
  const std::array<std::string, 3> resource_names = {"cpu_cores", "cpu",
                                                     "memory"};
  std::array<int, 3> col_res;
  for (int k = 0; k < 3; ++k) {
    col_res[k] = find_col(resource_names[k]);
    if (col_res[k] < 0) throw MissingColumn(resource_names[k]);
  }

  std::vector<std::string> tags;                       // first-appearance order
  std::vector<std::vector<std::array<double, 3>>> rows_per_tag;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (static_cast<int>(fields.size()) <= col_provider ||
        static_cast<int>(fields.size()) <=
            *std::max_element(col_res.begin(), col_res.end()))
      throw ParseError("too few fields", line_no);
    const std::string tag = fields[col_provider];
    auto it = std::find(tags.begin(), tags.end(), tag);
    size_t tag_idx;
    if (it == tags.end()) {
      tags.push_back(tag);
      rows_per_tag.emplace_back();
      tag_idx = tags.size() - 1;
    } else {
      tag_idx = static_cast<size_t>(it - tags.begin());
    }
    std::array<double, 3> vals{};
    for (int k = 0; k < 3; ++k) {
      try {
        vals[k] = std::stod(fields[col_res[k]]);
      } catch (const std::exception&) {
        throw ParseError("cannot parse value '" + fields[col_res[k]] + "'",
                         line_no);
      }
      if (!std::isfinite(vals[k]) || vals[k] < 0)
        throw ParseError("resource values must be finite and >= 0", line_no);
    }
    rows_per_tag[tag_idx].push_back(vals);
  }
  if (tags.empty()) throw ParseError("no data rows", line_no);

  IngestResult result;
  result.provider_tags = tags;

  // columns are normalized to [0,1]; larger values are rescaled
  std::array<double, 3> col_max = {1.0, 1.0, 1.0};
  for (const auto& rows : rows_per_tag)
    for (const auto& r : rows)
      for (int k = 0; k < 3; ++k) col_max[k] = std::max(col_max[k], r[k]);
  for (int k = 0; k < 3; ++k)
    if (col_max[k] > 1.0)
      result.warnings.push_back({resource_names[k], col_max[k]});

  const int N = static_cast<int>(tags.size());
  const int A = config.trace_apps_per_provider;
  std::mt19937_64 rng(config.seed);

  Instance inst;
  inst.num_providers = N;
  inst.num_resources = 3;
  inst.native_apps.resize(N);
  inst.requests.reserve(static_cast<size_t>(N) * A * 3);

  int app_id = 0;
  for (int n = 0; n < N; ++n) {
    auto& rows = rows_per_tag[n];
    if (static_cast<int>(rows.size()) < A)
      throw ParseError("provider tag '" + tags[n] + "' has only " +
                           std::to_string(rows.size()) + " rows, need " +
                           std::to_string(A),
                       line_no);
    // seeded sample without replacement, keeping file order
    std::vector<size_t> idx(rows.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (size_t i = idx.size() - 1; i > 0; --i)
      std::swap(idx[i], idx[rng() % (i + 1)]);
    idx.resize(A);
    std::sort(idx.begin(), idx.end());

    for (size_t i : idx) {
      inst.native_apps[n].push_back(app_id++);
      for (int k = 0; k < 3; ++k) {
        const double v = rows[i][k] / col_max[k];  // back into [0,1]
        inst.requests.push_back(config.request_lo +
                                v * (config.request_hi - config.request_lo));
      }
    }
  }

  const int M = app_id;
  inst.delta.assign(M, config.delta);
  inst.scale.assign(M, 1.0);
  inst.capacity.assign(static_cast<size_t>(N) * 3, 0.0);
  inst.owner.resize(M);
  for (int n = 0; n < N; ++n)
    for (int j : inst.native_apps[n]) inst.owner[j] = n;
  draw_comm_weights(inst, rng, config.comm_weight_lo, config.comm_weight_hi);
  fill_capacities(inst, config.deficit_providers, config.deficit_factor,
                  config.surplus_factor);
  inst.finalize();
  result.instance = std::move(inst);
  return result;
}

// --- file formats -----------------------------------------------------------

std::string instance_to_json(const Instance& inst) {
  json out;
  out["num_providers"] = inst.num_providers;
  out["num_resources"] = inst.num_resources;
  out["native_apps"] = inst.native_apps;
  out["capacity"] = inst.capacity;
  out["requests"] = inst.requests;
  out["delta"] = inst.delta;
  out["scale"] = inst.scale;
  out["comm_weight"] = inst.comm_weight;
  out["feas_tol"] = inst.feas_tol;
  return out.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad instance json: ") + e.what(), 0);
  }
  Instance inst;
  try {
    inst.num_providers = in.at("num_providers").get<int>();
    inst.num_resources = in.at("num_resources").get<int>();
    inst.native_apps = in.at("native_apps").get<std::vector<std::vector<int>>>();
    inst.capacity = in.at("capacity").get<std::vector<double>>();
    inst.requests = in.at("requests").get<std::vector<double>>();
    inst.delta = in.at("delta").get<std::vector<double>>();
    inst.scale = in.at("scale").get<std::vector<double>>();
    inst.comm_weight = in.at("comm_weight").get<std::vector<double>>();
    inst.feas_tol = in.value("feas_tol", 1e-6);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad instance json: ") + e.what(), 0);
  }
  inst.finalize();
  return inst;
}

void save_instance(const Instance& inst, const std::string& path) {
  write_text_file(path, instance_to_json(inst));
}

Instance load_instance(const std::string& path) {
  return instance_from_json(read_text_file(path));
}

std::string solution_to_json(const SolutionFile& sol) {
  json out;
  out["solver"] = sol.solver;
  out["allocation"] = allocation_to_json(sol.allocation);
  out["d0"] = sol.d0;
  out["utility"] = sol.utility;
  out["surplus"] = sol.surplus;
  out["converged"] = sol.converged;
  out["iterations"] = sol.iterations;
  out["objective"] = sol.objective;
  return out.dump(2) + "\n";
}

SolutionFile solution_from_json(const std::string& text, const Instance& inst) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad solution json: ") + e.what(), 0);
  }
  SolutionFile sol;
  try {
    sol.solver = in.at("solver").get<std::string>();
    sol.allocation = allocation_from_json(in.at("allocation"), inst);
    sol.d0 = in.at("d0").get<std::vector<double>>();
    sol.utility = in.at("utility").get<std::vector<double>>();
    sol.surplus = in.at("surplus").get<std::vector<double>>();
    sol.converged = in.at("converged").get<bool>();
    sol.iterations = in.at("iterations").get<long>();
    sol.objective = in.at("objective").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad solution json: ") + e.what(), 0);
  }
  return sol;
}

void save_solution(const SolutionFile& sol, const std::string& path) {
  write_text_file(path, solution_to_json(sol));
}

SolutionFile load_solution(const std::string& path, const Instance& inst) {
  return solution_from_json(read_text_file(path), inst);
}

std::string metrics_to_json(const MetricsReport& rep) {
  json out;
  out["utility_alone"] = rep.utility_alone;
  out["utility_nbs"] = rep.utility_nbs;
  out["surplus"] = rep.surplus;
  out["rs_alone"] = rep.rs_alone;
  out["rs_nbs"] = rep.rs_nbs;
  out["util_alone"] = rep.util_alone;
  out["util_nbs"] = rep.util_nbs;
  std::vector<int> zc(rep.zero_capacity.begin(), rep.zero_capacity.end());
  out["zero_capacity"] = zc;
  out["aggregate_rs_alone"] = rep.aggregate_rs_alone;
  out["aggregate_rs_nbs"] = rep.aggregate_rs_nbs;
  out["aggregate_util_alone_nk"] = rep.aggregate_util_alone_nk;
  out["aggregate_util_nbs_nk"] = rep.aggregate_util_nbs_nk;
  out["aggregate_util_alone_k"] = rep.aggregate_util_alone_k;
  out["aggregate_util_nbs_k"] = rep.aggregate_util_nbs_k;
  out["jain_surplus"] = rep.jain_surplus;
  if (std::isnan(rep.jain_utility))
    out["jain_utility"] = nullptr;
  else
    out["jain_utility"] = rep.jain_utility;
  return out.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad metrics json: ") + e.what(), 0);
  }
  MetricsReport rep;
  rep.utility_alone = in.at("utility_alone").get<std::vector<double>>();
  rep.utility_nbs = in.at("utility_nbs").get<std::vector<double>>();
  rep.surplus = in.at("surplus").get<std::vector<double>>();
  rep.rs_alone = in.at("rs_alone").get<std::vector<double>>();
  rep.rs_nbs = in.at("rs_nbs").get<std::vector<double>>();
  rep.util_alone = in.at("util_alone").get<std::vector<double>>();
  rep.util_nbs = in.at("util_nbs").get<std::vector<double>>();
  for (int v : in.at("zero_capacity").get<std::vector<int>>())
    rep.zero_capacity.push_back(v != 0);
  rep.aggregate_rs_alone = in.at("aggregate_rs_alone").get<double>();
  rep.aggregate_rs_nbs = in.at("aggregate_rs_nbs").get<double>();
  rep.aggregate_util_alone_nk = in.at("aggregate_util_alone_nk").get<double>();
  rep.aggregate_util_nbs_nk = in.at("aggregate_util_nbs_nk").get<double>();
  rep.aggregate_util_alone_k = in.at("aggregate_util_alone_k").get<double>();
  rep.aggregate_util_nbs_k = in.at("aggregate_util_nbs_k").get<double>();
  rep.jain_surplus = in.at("jain_surplus").get<double>();
  rep.jain_utility = in.at("jain_utility").is_null()
                         ? std::numeric_limits<double>::quiet_NaN()
                         : in.at("jain_utility").get<double>();
  return rep;
}

std::string metrics_to_csv(const MetricsReport& rep) {
  std::ostringstream out;
  out.precision(17);
  out << "esp,utility_alone,utility_nbs,surplus,rs_alone,rs_nbs,util_alone,"
         "util_nbs\n";
  for (size_t n = 0; n < rep.utility_alone.size(); ++n)
    out << n << ',' << rep.utility_alone[n] << ',' << rep.utility_nbs[n] << ','
        << rep.surplus[n] << ',' << rep.rs_alone[n] << ',' << rep.rs_nbs[n]
        << ',' << rep.util_alone[n] << ',' << rep.util_nbs[n] << '\n';
  out << "\nmetric,value\n";
  out << "aggregate_rs_alone," << rep.aggregate_rs_alone << '\n';
  out << "aggregate_rs_nbs," << rep.aggregate_rs_nbs << '\n';
  out << "aggregate_util_alone_nk," << rep.aggregate_util_alone_nk << '\n';
  out << "aggregate_util_nbs_nk," << rep.aggregate_util_nbs_nk << '\n';
  out << "aggregate_util_alone_k," << rep.aggregate_util_alone_k << '\n';
  out << "aggregate_util_nbs_k," << rep.aggregate_util_nbs_k << '\n';
  out << "jain_surplus," << rep.jain_surplus << '\n';
  out << "jain_utility," << rep.jain_utility << '\n';
  return out.str();
}

std::string round_trace_to_text(const std::vector<RoundRecord>& trace) {
  std::ostringstream out;
  out.precision(17);
  out << "round,provider,kkt,objective,max_violation\n";
  for (const auto& r : trace)
    out << r.round << ',' << r.provider << ',' << r.kkt << ',' << r.objective
        << ',' << r.max_violation << '\n';
  return out.str();
}

// --- experiment runner ------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config_in) {
  ExperimentResult result;
  ExperimentConfig config = config_in;

  try {
    apply_preset(config);
    if (!config.trace_path.empty()) {
      IngestResult ingest = ingest_trace(config.trace_path, config);
      result.instance = std::move(ingest.instance);
      for (const auto& w : ingest.warnings)
        std::cerr << "warning: column " << w.column
                  << " exceeded 1.0, rescaled by max " << w.max_value << "\n";
    } else if (!config.instance_path.empty()) {
      result.instance = load_instance(config.instance_path);
    } else {
      result.instance = generate_instance(config);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    result.exit_code = kExitBadConfig;
    return result;
  }

  const Instance& inst = result.instance;
  result.alone = disagreement_vector(inst);

  DistConfig dist = config.dist;
  dist.seed = config.seed;
  dist.record_trace = config.engine_trace;

  SolutionFile sol;
  sol.solver = solver_kind_name(config.solver);
  sol.d0 = result.alone.d0;
  bool converged = true;
  try {
    switch (config.solver) {
      case SolverKind::Alone: {
        sol.allocation = result.alone.allocation;
        sol.converged = true;
        break;
      }
      case SolverKind::Central: {
        CentralConfig cc;
        cc.grad_tol = config.central_grad_tol;
        cc.max_iters = config.central_max_iters;
        CentralReport rep = solve_central(inst, result.alone.d0, cc);
        sol.allocation = rep.allocation;
        sol.converged = rep.converged;
        sol.iterations = rep.iterations;
        converged = rep.converged;
        break;
      }
      case SolverKind::Dist: {
        DistReport rep = solve_distributed(inst, result.alone.d0, dist);
        sol.allocation = rep.allocation;
        sol.converged = rep.converged;
        sol.iterations = rep.rounds;
        converged = rep.converged;
        if (config.engine_trace) {
          std::filesystem::create_directories(config.out_dir);
          write_text_file(config.out_dir + "/engine_trace.csv",
                          round_trace_to_text(rep.trace));
        }
        break;
      }
      case SolverKind::Protocol: {
        ProtocolResult rep = run_protocol(inst, result.alone.d0, dist);
        sol.allocation = rep.solution.allocation;
        sol.converged = rep.solution.converged;
        sol.iterations = rep.solution.rounds;
        converged = rep.solution.converged;
        if (config.engine_trace) {
          std::filesystem::create_directories(config.out_dir);
          write_text_file(config.out_dir + "/engine_trace.csv",
                          round_trace_to_text(rep.solution.trace));
        }
        result.protocol_trace = std::move(rep.trace);
        break;
      }
    }
  } catch (const InfeasibleBargain& e) {
    std::cerr << "error: " << e.what() << "\n";
    result.exit_code = kExitInfeasible;
    return result;
  }

  sol.utility.resize(inst.num_providers);
  sol.surplus.resize(inst.num_providers);
  for (int n = 0; n < inst.num_providers; ++n) {
    sol.utility[n] = esp_utility_unchecked(inst, sol.allocation, n);
    sol.surplus[n] = sol.utility[n] - sol.d0[n];
  }
  try {
    sol.objective = nbs_log_objective(inst, sol.allocation, sol.d0);
  } catch (const OutOfDomain&) {
    sol.objective = std::numeric_limits<double>::quiet_NaN();
  }
  result.solution = std::move(sol);
  result.metrics =
      compare_alone_vs_nbs(inst, result.alone, result.solution.allocation);

  std::filesystem::create_directories(config.out_dir);
  save_instance(inst, config.out_dir + "/instance.json");
  SolutionFile alone_file;
  alone_file.solver = "alone";
  alone_file.allocation = result.alone.allocation;
  alone_file.d0 = result.alone.d0;
  alone_file.utility = result.alone.d0;
  alone_file.surplus.assign(inst.num_providers, 0.0);
  alone_file.objective = std::numeric_limits<double>::quiet_NaN();
  save_solution(alone_file, config.out_dir + "/alone.json");
  save_solution(result.solution, config.out_dir + "/solution.json");
  write_text_file(config.out_dir + "/metrics.json",
                  metrics_to_json(result.metrics));
  write_text_file(config.out_dir + "/metrics.csv",
                  metrics_to_csv(result.metrics));
  if (result.protocol_trace)
    write_text_file(config.out_dir + "/protocol_trace.csv",
                    result.protocol_trace->to_text());

  for (int n = 0; n < inst.num_providers; ++n) {
    std::ostringstream line;
    line.precision(6);
    line << "esp " << n << ": utility " << result.metrics.utility_alone[n]
         << " -> " << result.metrics.utility_nbs[n] << ", rs "
         << result.metrics.rs_alone[n] << "% -> " << result.metrics.rs_nbs[n]
         << "%, util " << result.metrics.util_alone[n] << "% -> "
         << result.metrics.util_nbs[n] << "%";
    std::cout << line.str() << "\n";
  }
  std::cout << "aggregate rs " << result.metrics.aggregate_rs_alone << "% -> "
            << result.metrics.aggregate_rs_nbs << "%, jain(surplus) "
            << result.metrics.jain_surplus << "\n";

  if (!converged) result.exit_code = kExitNotConverged;
  return result;
}

}  // namespace nbs

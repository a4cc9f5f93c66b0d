#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <string>

#include "corrnoise/descriptor.hpp"
#include "corrnoise/dpsgd.hpp"
#include "corrnoise/loss.hpp"
#include "corrnoise/noisegen.hpp"
#include "corrnoise/optimizer.hpp"
#include "corrnoise/privacy.hpp"
#include "table_gen.hpp"

namespace {

using namespace corrnoise;
using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "corrnoise 0.1.0";
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;

int materialize_limit() {
  if (const char* env = std::getenv("CORRNOISE_MATERIALIZE_LIMIT")) {
    const int limit = std::atoi(env);
    if (limit > 0) return limit;
  }
  return kDefaultMaterializeLimit;
}

[[noreturn]] void usage_error(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitUsage);
}

// "single" | "cyclic:B,K" | "minsep:B,K" | "full"
ParticipationSchema parse_schema(const std::string& text) {
  if (text == "single") return ParticipationSchema::single();
  if (text == "full") return ParticipationSchema::full();
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    const auto comma = rest.find(',');
    if (comma != std::string::npos) {
      const int b = std::atoi(rest.substr(0, comma).c_str());
      const int k = std::atoi(rest.substr(comma + 1).c_str());
      if (b > 0 && k > 0) {
        if (kind == "cyclic") return ParticipationSchema::cyclic(b, k);
        if (kind == "minsep") return ParticipationSchema::minsep(b, k);
      }
    }
  }
  usage_error("invalid --schema '" + text +
              "' (expect single | cyclic:B,K | minsep:B,K | full)");
}

std::string schema_string(const ParticipationSchema& schema) {
  switch (schema.kind) {
    case SchemaKind::kSingle:
      return "single";
    case SchemaKind::kFull:
      return "full";
    case SchemaKind::kCyclic:
      return "cyclic:" + std::to_string(schema.b) + "," +
             std::to_string(schema.k);
    case SchemaKind::kMinSep:
      return "minsep:" + std::to_string(schema.b) + "," +
             std::to_string(schema.k);
  }
  return "?";
}

// "prefix" | "momentum:BETA[,WD]" | "custom:a0,a1,..."
WorkloadSpec parse_workload(const std::string& text, int n) {
  if (text == "prefix") return WorkloadSpec::prefix(n);
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "momentum") {
      const auto comma = rest.find(',');
      const double beta = std::atof(rest.substr(0, comma).c_str());
      const double wd =
          comma == std::string::npos ? 0.0 : std::atof(rest.substr(comma + 1).c_str());
      try {
        return WorkloadSpec::momentum(n, beta, wd);
      } catch (const Error& e) {
        usage_error(e.what());
      }
    }
    if (kind == "custom") {
      std::vector<double> coeffs;
      std::stringstream stream(rest);
      std::string item;
      while (std::getline(stream, item, ',')) coeffs.push_back(std::atof(item.c_str()));
      if (static_cast<int>(coeffs.size()) != n) {
        usage_error("custom workload needs exactly n coefficients");
      }
      try {
        return WorkloadSpec::custom(coeffs);
      } catch (const Error& e) {
        usage_error(e.what());
      }
    }
  }
  usage_error("invalid --workload '" + text +
              "' (expect prefix | momentum:BETA[,WD] | custom:a0,a1,...)");
}

Json loss_report_json(const LossReport& report) {
  Json j;
  j["sensitivity"] = report.sensitivity;
  j["max_error"] = report.max_error;
  j["rms_error"] = report.rms_error;
  j["normalized_max_loss"] = report.normalized_max_loss;
  j["normalized_rms_loss"] = report.normalized_rms_loss;
  if (report.calibrated_nu.has_value()) {
    j["calibrated_nu"] = *report.calibrated_nu;
  }
  return j;
}

// ----------------------------- optimize -----------------------------

struct OptimizeArgs {
  std::string strategy;
  int steps = 0;
  std::string loss = "rms";
  std::string schema = "single";
  int bands = 0;    // 0: derive from the schema
  int buffers = 4;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_optimize(const OptimizeArgs& args) {
  const ParticipationSchema schema = parse_schema(args.schema);
  if (args.loss != "max" && args.loss != "rms") {
    usage_error("--loss must be max or rms");
  }
  const LossObjective objective =
      args.loss == "max" ? LossObjective::kMaxLoss : LossObjective::kRmsLoss;
  const WorkloadSpec workload = WorkloadSpec::prefix(args.steps);
  OptimizerConfig config;
  config.seed = args.seed;
  config.max_iterations = args.strategy == "blt" ? 600 : 3000;
  config.gradient_tolerance = 1e-10;

  OptimizationResult result{Strategy::identity(1), 0, 0, false, 0};
  try {
    if (args.strategy == "dense") {
      if (objective == LossObjective::kMaxLoss) {
        usage_error("--loss max is not supported for dense strategies (the "
                    "dense optimizer targets RMS loss)");
      }
      result = schema.kind == SchemaKind::kSingle
                   ? optimize_dense_streaming(workload, args.steps, config)
                   : optimize_dense_multi(workload, args.steps, schema, config);
    } else if (args.strategy == "banded-toeplitz") {
      int bands = args.bands;
      if (bands == 0) {
        bands = schema.kind == SchemaKind::kCyclic ||
                        schema.kind == SchemaKind::kMinSep
                    ? schema.b
                    : args.steps;
      }
      result = optimize_banded_toeplitz(workload, args.steps, bands, schema,
                                        objective, config);
    } else if (args.strategy == "blt") {
      result = optimize_blt(workload, args.steps, args.buffers, schema,
                            objective, config);
    } else {
      usage_error("--strategy must be dense, banded-toeplitz, or blt");
    }
  } catch (const Error& e) {
    usage_error(e.what());
  }

  MechanismDescriptor descriptor;
  descriptor.strategy = result.strategy;
  DescriptorMetadata meta;
  meta.workload = "prefix";
  meta.schema = schema_string(schema);
  meta.objective = args.loss;
  meta.objective_value = result.objective;
  meta.converged = result.converged;
  meta.tool_version = kToolVersion;
  try {
    const LossReport report =
        evaluate_loss(workload, result.strategy, schema, materialize_limit());
    meta.sensitivity = report.sensitivity;
    meta.max_error = report.max_error;
    meta.rms_error = report.rms_error;
    meta.normalized_max_loss = report.normalized_max_loss;
    meta.normalized_rms_loss = report.normalized_rms_loss;
  } catch (const Error&) {
    // Loss metadata is best-effort (e.g. enumeration limits).
  }
  descriptor.metadata = meta;
  try {
    save_descriptor(descriptor, args.out);
  } catch (const Error& e) {
    usage_error(e.what());
  }
  std::cerr << "wrote " << args.out << " (objective " << result.objective
            << ", converged " << (result.converged ? "yes" : "no") << ")\n";
  return result.converged ? 0 : kExitNoConvergence;
}

// ------------------------ evaluate / sensitivity ------------------------

struct EvaluateArgs {
  std::string mechanism;
  std::string schema = "single";
  std::string workload = "prefix";
  std::string loss = "both";
  double mu = 0.0;  // 0: no calibration requested
  std::string adjacency = "zero-out";
  std::string oracle = "auto";  // sensitivity subcommand only
};

MechanismDescriptor load_or_exit(const std::string& path) {
  try {
    return load_descriptor(path);
  } catch (const Error& e) {
    usage_error(e.what());
  }
}

int cmd_evaluate(const EvaluateArgs& args) {
  const MechanismDescriptor descriptor = load_or_exit(args.mechanism);
  const ParticipationSchema schema = parse_schema(args.schema);
  const WorkloadSpec workload =
      parse_workload(args.workload, descriptor.strategy.n);
  LossReport report;
  try {
    report =
        evaluate_loss(workload, descriptor.strategy, schema, materialize_limit());
  } catch (const Error& e) {
    usage_error(e.what());
  }
  if (args.mu != 0.0) {
    PrivacyTarget target;
    target.mu = args.mu;
    if (args.adjacency == "zero-out") {
      target.adjacency = Adjacency::kZeroOut;
    } else if (args.adjacency == "replace-one") {
      target.adjacency = Adjacency::kReplaceOne;
    } else {
      usage_error("--adjacency must be zero-out or replace-one");
    }
    report.calibrated_nu = calibrate_nu(report.sensitivity, target);
  }
  std::cout << loss_report_json(report).dump(2) << "\n";
  return 0;
}

int cmd_sensitivity(const EvaluateArgs& args) {
  const MechanismDescriptor descriptor = load_or_exit(args.mechanism);
  const ParticipationSchema schema = parse_schema(args.schema);
  Json j;
  try {
    if (args.oracle == "brute") {
      if (schema.kind == SchemaKind::kCyclic || schema.kind == SchemaKind::kMinSep) {
        const GramMatrix gram = gram_matrix(
            materialize_strategy(descriptor.strategy, materialize_limit()));
        const SensitivityBound bound = sensitivity_upper_bound(gram, schema);
        j["sensitivity"] = bound.value;
        j["exact"] = bound.exact;
        j["route"] = "brute";
      } else {
        j["sensitivity"] =
            sensitivity(descriptor.strategy, schema, materialize_limit());
        j["exact"] = true;
        j["route"] = "brute";
      }
    } else if (args.oracle == "auto") {
      j["sensitivity"] =
          sensitivity(descriptor.strategy, schema, materialize_limit());
      j["exact"] = true;
      j["route"] = "auto";
    } else {
      usage_error("--oracle must be auto or brute");
    }
  } catch (const Error& e) {
    usage_error(e.what());
  }
  if (args.mu != 0.0) {
    PrivacyTarget target;
    target.mu = args.mu;
    target.adjacency = args.adjacency == "replace-one" ? Adjacency::kReplaceOne
                                                       : Adjacency::kZeroOut;
    j["calibrated_nu"] =
        calibrate_nu(j["sensitivity"].get<double>(), target);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ------------------------------- noise -------------------------------

struct NoiseArgs {
  std::string mechanism;
  int dim = 1;
  int steps = 0;
  std::uint64_t seed = 0;
  double nu = 1.0;
  std::string format = "csv";
  std::string out;  // empty: stdout
};

int cmd_noise(const NoiseArgs& args) {
  const MechanismDescriptor descriptor = load_or_exit(args.mechanism);
  if (args.steps > descriptor.strategy.n) {
    usage_error("--steps exceeds the mechanism's step count");
  }
  if (args.dim < 1 || args.steps < 1) {
    usage_error("--dim and --steps must be positive");
  }
  if (args.format != "csv" && args.format != "f64le") {
    usage_error("--format must be csv or f64le");
  }
  NoiseSource source;
  source.base_seed = args.seed;
  source.nu = args.nu;
  source.m = args.dim;
  std::unique_ptr<NoiseGenerator> generator;
  try {
    generator =
        make_noise_generator(descriptor.strategy, source, materialize_limit());
  } catch (const Error& e) {
    usage_error(e.what());
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!args.out.empty()) {
    file.open(args.out, std::ios::binary);
    if (!file) usage_error("cannot write " + args.out);
    out = &file;
  }
  for (int t = 0; t < args.steps; ++t) {
    const Eigen::VectorXd row = generator->next();
    if (args.format == "csv") {
      char buffer[64];
      for (int j = 0; j < args.dim; ++j) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", row[j]);
        (*out) << (j == 0 ? "" : ",") << buffer;
      }
      (*out) << "\n";
    } else {
      // Row-major little-endian doubles (the build targets are all LE).
      out->write(reinterpret_cast<const char*>(row.data()),
                 static_cast<std::streamsize>(sizeof(double)) * args.dim);
    }
  }
  return 0;
}

// ------------------------------- table -------------------------------

struct TableArgs {
  std::string name;
  std::string steps = "8,16,32,64,128,256,512,1024";
  std::string columns;
  int dense_limit = 128;
  std::uint64_t seed = 0;
};

int cmd_table(const TableArgs& args) {
  tables::TableOptions options;
  if (args.name == "max-error") {
    options.name = tables::TableName::kMaxError;
  } else if (args.name == "rmse") {
    options.name = tables::TableName::kRmse;
  } else {
    usage_error("--name must be max-error or rmse");
  }
  std::stringstream stream(args.steps);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const int n = std::atoi(item.c_str());
    if (n < 1 || n > 8192) usage_error("--steps entries must lie in 1..8192");
    options.steps.push_back(n);
  }
  if (options.steps.empty()) usage_error("--steps must list at least one size");
  if (!args.columns.empty()) {
    options.columns.clear();
    std::stringstream cstream(args.columns);
    while (std::getline(cstream, item, ',')) {
      const std::optional<tables::Column> column = tables::column_from_label(item);
      if (!column.has_value()) usage_error("unknown column '" + item + "'");
      options.columns.push_back(*column);
    }
  }
  options.dense_limit = args.dense_limit;
  options.seed = args.seed;
  const tables::TableResult result = tables::generate_table(options);
  for (const std::string& note : result.notes) std::cerr << "note: " << note << "\n";
  std::cout << result.csv;
  return 0;
}

// ------------------------------ simulate ------------------------------

struct SimulateArgs {
  std::string problem = "constant2d";
  std::string mechanism;
  std::string schema = "single";
  std::string mu = "1";
  double eta = 1.0;
  double clip_norm = 1.0;
  int batch = 1;
  int steps = 0;
  int seeds = 1;
  std::uint64_t seed = 0;
  std::string adjacency = "zero-out";
};

int cmd_simulate(const SimulateArgs& args) {
  const MechanismDescriptor descriptor = load_or_exit(args.mechanism);
  const ParticipationSchema schema = parse_schema(args.schema);
  const int steps = args.steps > 0 ? args.steps : descriptor.strategy.n;
  SyntheticProblem problem = SyntheticProblem::constant2d();
  if (args.problem == "linreg") {
    problem = SyntheticProblem::linreg({1.0, 0.04}, {1.0, -1.0});
  } else if (args.problem != "constant2d") {
    usage_error("--problem must be constant2d or linreg");
  }
  if (args.seeds < 1) usage_error("--seeds must be >= 1");

  double nu = 0.0;
  if (args.mu == "inf") {
    nu = 0.0;  // noiseless guard
  } else {
    const double mu = std::atof(args.mu.c_str());
    if (!(mu > 0.0)) usage_error("--mu must be positive or 'inf'");
    PrivacyTarget target;
    target.mu = mu;
    target.adjacency = args.adjacency == "replace-one" ? Adjacency::kReplaceOne
                                                       : Adjacency::kZeroOut;
    try {
      nu = calibrate_nu(
          sensitivity(descriptor.strategy, schema, materialize_limit()), target);
    } catch (const Error& e) {
      usage_error(e.what());
    }
  }

  double grad_sum = 0.0, grad_sq = 0.0, prefix_sum = 0.0, prefix_sq = 0.0;
  try {
    for (int s = 0; s < args.seeds; ++s) {
      const TrainingRun run = run_dpsgd(
          problem, descriptor.strategy, schema, args.eta, args.clip_norm, nu,
          args.batch, steps, args.seed + static_cast<std::uint64_t>(s),
          materialize_limit());
      grad_sum += run.grad_rmse;
      grad_sq += run.grad_rmse * run.grad_rmse;
      prefix_sum += run.prefix_rmse;
      prefix_sq += run.prefix_rmse * run.prefix_rmse;
    }
  } catch (const Error& e) {
    usage_error(e.what());
  }

  const double count = args.seeds;
  Json j;
  j["problem"] = args.problem;
  j["steps"] = steps;
  j["batch"] = args.batch;
  j["nu"] = nu;
  j["seeds"] = args.seeds;
  j["grad_rmse_mean"] = grad_sum / count;
  j["grad_rmse_std"] =
      std::sqrt(std::max(0.0, grad_sq / count - (grad_sum / count) * (grad_sum / count)));
  j["prefix_rmse_mean"] = prefix_sum / count;
  j["prefix_rmse_std"] = std::sqrt(
      std::max(0.0, prefix_sq / count - (prefix_sum / count) * (prefix_sum / count)));
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated-noise mechanism design and execution"};
  app.require_subcommand(1);

  OptimizeArgs optimize_args;
  CLI::App* optimize = app.add_subcommand("optimize", "Optimize a strategy");
  optimize->add_option("--strategy", optimize_args.strategy,
                       "dense | banded-toeplitz | blt")->required();
  optimize->add_option("--steps", optimize_args.steps, "step count n")
      ->required()->check(CLI::PositiveNumber);
  optimize->add_option("--loss", optimize_args.loss, "max | rms");
  optimize->add_option("--schema", optimize_args.schema,
                       "single | cyclic:B,K | minsep:B,K | full");
  optimize->add_option("--bands", optimize_args.bands, "band count");
  optimize->add_option("--buffers", optimize_args.buffers, "BLT buffer count");
  optimize->add_option("--seed", optimize_args.seed, "optimizer seed");
  optimize->add_option("--out", optimize_args.out, "output descriptor path")
      ->required();

  EvaluateArgs evaluate_args;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a mechanism");
  evaluate->add_option("--mechanism", evaluate_args.mechanism)->required();
  evaluate->add_option("--schema", evaluate_args.schema);
  evaluate->add_option("--workload", evaluate_args.workload);
  evaluate->add_option("--loss", evaluate_args.loss, "both (default)");
  evaluate->add_option("--mu", evaluate_args.mu, "GDP target for nu");
  evaluate->add_option("--adjacency", evaluate_args.adjacency,
                       "zero-out | replace-one");

  EvaluateArgs sensitivity_args;
  CLI::App* sens = app.add_subcommand("sensitivity", "Compute sensitivity");
  sens->add_option("--mechanism", sensitivity_args.mechanism)->required();
  sens->add_option("--schema", sensitivity_args.schema);
  sens->add_option("--oracle", sensitivity_args.oracle, "auto | brute");
  sens->add_option("--mu", sensitivity_args.mu);
  sens->add_option("--adjacency", sensitivity_args.adjacency);

  NoiseArgs noise_args;
  CLI::App* noise = app.add_subcommand("noise", "Stream correlated noise");
  noise->add_option("--mechanism", noise_args.mechanism)->required();
  noise->add_option("--dim", noise_args.dim, "row dimension m")->required();
  noise->add_option("--steps", noise_args.steps, "rows to emit")->required();
  noise->add_option("--seed", noise_args.seed, "noise seed");
  noise->add_option("--nu", noise_args.nu, "per-coordinate stddev");
  noise->add_option("--format", noise_args.format, "csv | f64le");
  noise->add_option("--out", noise_args.out, "output file (default stdout)");

  TableArgs table_args;
  CLI::App* table = app.add_subcommand("table", "Reproduce the loss tables");
  table->add_option("--name", table_args.name, "max-error | rmse")->required();
  table->add_option("--steps", table_args.steps, "comma list of sizes");
  table->add_option("--columns", table_args.columns,
                    "subset: identity,workload,streaming-h2,full-h2,blt,"
                    "toeplitz,colnorm-toeplitz,dense");
  table->add_option("--dense-limit", table_args.dense_limit,
                    "largest n for the Dense column");
  table->add_option("--seed", table_args.seed);

  SimulateArgs simulate_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Run toy DP-SGD");
  simulate->add_option("--problem", simulate_args.problem,
                       "constant2d | linreg");
  simulate->add_option("--mechanism", simulate_args.mechanism)->required();
  simulate->add_option("--schema", simulate_args.schema);
  simulate->add_option("--mu", simulate_args.mu, "GDP target or 'inf'");
  simulate->add_option("--eta", simulate_args.eta, "learning rate");
  simulate->add_option("--clip", simulate_args.clip_norm, "clip norm zeta");
  simulate->add_option("--batch", simulate_args.batch, "batch size");
  simulate->add_option("--steps", simulate_args.steps, "steps (default n)");
  simulate->add_option("--seeds", simulate_args.seeds, "Monte-Carlo seeds");
  simulate->add_option("--seed", simulate_args.seed, "base seed");
  simulate->add_option("--adjacency", simulate_args.adjacency);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (optimize->parsed()) return cmd_optimize(optimize_args);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
    if (sens->parsed()) return cmd_sensitivity(sensitivity_args);
    if (noise->parsed()) return cmd_noise(noise_args);
    if (table->parsed()) return cmd_table(table_args);
    if (simulate->parsed()) return cmd_simulate(simulate_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

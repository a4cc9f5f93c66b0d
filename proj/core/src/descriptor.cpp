#include "corrnoise/descriptor.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace corrnoise {

namespace {

using Json = nlohmann::ordered_json;

const char* kind_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kDense:
      return "dense";
    case StrategyKind::kToeplitz:
      return "toeplitz";
    case StrategyKind::kBandedToeplitz:
      return "banded_toeplitz";
    case StrategyKind::kBlt:
      return "blt";
    case StrategyKind::kTree:
      return "tree";
  }
  throw_error(ErrorCode::kConfig, "unknown strategy kind");
}

Json params_json(const Strategy& strategy) {
  Json params = Json::object();
  switch (strategy.kind) {
    case StrategyKind::kDense: {
      // Row-major lower-triangular values, diagonal included.
      std::vector<double> values;
      values.reserve(static_cast<std::size_t>(strategy.n) * (strategy.n + 1) / 2);
      for (int i = 0; i < strategy.n; ++i) {
        for (int j = 0; j <= i; ++j) values.push_back(strategy.dense(i, j));
      }
      params["values"] = values;
      break;
    }
    case StrategyKind::kToeplitz:
    case StrategyKind::kBandedToeplitz:
      params["coeffs"] = strategy.coeffs;
      break;
    case StrategyKind::kBlt:
      params["alpha"] = strategy.alpha;
      params["lambda"] = strategy.lambda;
      break;
    case StrategyKind::kTree:
      params["variant"] = strategy.tree_variant == TreeVariant::kBasic
                              ? "basic"
                              : "full_pseudoinverse";
      break;
  }
  return params;
}

Strategy strategy_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.at("n").get<int>();
  const Json& params = j.at("params");
  if (kind == "dense") {
    const auto values = params.at("values").get<std::vector<double>>();
    if (values.size() != static_cast<std::size_t>(n) * (n + 1) / 2) {
      throw_error(ErrorCode::kShape, "dense descriptor has wrong value count");
    }
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j2 = 0; j2 <= i; ++j2) c(i, j2) = values[idx++];
    }
    return Strategy::dense_strategy(std::move(c));
  }
  if (kind == "toeplitz") {
    return Strategy::toeplitz(n, params.at("coeffs").get<std::vector<double>>());
  }
  if (kind == "banded_toeplitz") {
    return Strategy::banded_toeplitz(
        n, params.at("coeffs").get<std::vector<double>>());
  }
  if (kind == "blt") {
    return Strategy::blt(n, params.at("alpha").get<std::vector<double>>(),
                         params.at("lambda").get<std::vector<double>>());
  }
  if (kind == "tree") {
    const std::string variant = params.at("variant").get<std::string>();
    if (variant == "basic") return Strategy::tree(n, TreeVariant::kBasic);
    if (variant == "full_pseudoinverse") {
      return Strategy::tree(n, TreeVariant::kFullPseudoinverse);
    }
    throw_error(ErrorCode::kConfig, "unknown tree variant: " + variant);
  }
  throw_error(ErrorCode::kConfig, "unknown mechanism kind: " + kind);
}

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& value) {
  if (value.has_value()) j[key] = *value;
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::string descriptor_to_json(const MechanismDescriptor& descriptor) {
  Json j;
  j["version"] = descriptor.version;
  j["kind"] = kind_name(descriptor.strategy.kind);
  j["n"] = descriptor.strategy.n;
  j["params"] = params_json(descriptor.strategy);
  if (descriptor.metadata.has_value()) {
    const DescriptorMetadata& meta = *descriptor.metadata;
    Json m = Json::object();
    put_optional(m, "workload", meta.workload);
    put_optional(m, "schema", meta.schema);
    put_optional(m, "objective", meta.objective);
    put_optional(m, "objective_value", meta.objective_value);
    put_optional(m, "sensitivity", meta.sensitivity);
    put_optional(m, "max_error", meta.max_error);
    put_optional(m, "rms_error", meta.rms_error);
    put_optional(m, "normalized_max_loss", meta.normalized_max_loss);
    put_optional(m, "normalized_rms_loss", meta.normalized_rms_loss);
    put_optional(m, "calibrated_nu", meta.calibrated_nu);
    put_optional(m, "converged", meta.converged);
    put_optional(m, "tool_version", meta.tool_version);
    j["metadata"] = std::move(m);
  }
  return j.dump(2) + "\n";
}

MechanismDescriptor descriptor_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kConfig,
                std::string("invalid mechanism descriptor: ") + e.what());
  }
  MechanismDescriptor out{std::string(), Strategy::identity(1), std::nullopt};
  try {
    out.version = j.at("version").get<std::string>();
    if (out.version != "1") {
      throw_error(ErrorCode::kConfig,
                  "unsupported descriptor version: " + out.version);
    }
    out.strategy = strategy_from_json(j);
    if (j.contains("metadata")) {
      const Json& m = j.at("metadata");
      DescriptorMetadata meta;
      meta.workload = get_optional<std::string>(m, "workload");
      meta.schema = get_optional<std::string>(m, "schema");
      meta.objective = get_optional<std::string>(m, "objective");
      meta.objective_value = get_optional<double>(m, "objective_value");
      meta.sensitivity = get_optional<double>(m, "sensitivity");
      meta.max_error = get_optional<double>(m, "max_error");
      meta.rms_error = get_optional<double>(m, "rms_error");
      meta.normalized_max_loss = get_optional<double>(m, "normalized_max_loss");
      meta.normalized_rms_loss = get_optional<double>(m, "normalized_rms_loss");
      meta.calibrated_nu = get_optional<double>(m, "calibrated_nu");
      meta.converged = get_optional<bool>(m, "converged");
      meta.tool_version = get_optional<std::string>(m, "tool_version");
      out.metadata = std::move(meta);
    }
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::kConfig,
                std::string("invalid mechanism descriptor: ") + e.what());
  }
  return out;
}

void save_descriptor(const MechanismDescriptor& descriptor,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw_error(ErrorCode::kConfig, "cannot write " + path);
  out << descriptor_to_json(descriptor);
  if (!out) throw_error(ErrorCode::kConfig, "failed writing " + path);
}

MechanismDescriptor load_descriptor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::kConfig, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return descriptor_from_json(buffer.str());
}

}  // namespace corrnoise

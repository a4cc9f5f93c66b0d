#pragma once

#include <optional>
#include <string>

#include "corrnoise/strategy.hpp"

namespace corrnoise {

struct DescriptorMetadata {
  std::optional<std::string> workload;
  std::optional<std::string> schema;
  std::optional<std::string> objective;
  std::optional<std::string> tool_version;
  std::optional<double> objective_value;
  std::optional<double> sensitivity;
  std::optional<double> max_error;
  std::optional<double> rms_error;
  std::optional<double> normalized_max_loss;
  std::optional<double> normalized_rms_loss;
  std::optional<double> calibrated_nu;
  std::optional<bool> converged;
};

// Versioned JSON descriptor of a mechanism. Numeric fields survive a
// parse/serialize round trip losslessly and re-serialization is byte-stable.
struct MechanismDescriptor {
  std::string version = "1";
  Strategy strategy;
  std::optional<DescriptorMetadata> metadata;
};

std::string descriptor_to_json(const MechanismDescriptor& descriptor);
MechanismDescriptor descriptor_from_json(const std::string& text);

void save_descriptor(const MechanismDescriptor& descriptor,
                     const std::string& path);
MechanismDescriptor load_descriptor(const std::string& path);

}  // namespace corrnoise

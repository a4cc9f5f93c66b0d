#include <doctest.h>

#include <Eigen/Dense>

#include "corrnoise/descriptor.hpp"
#include "test_util.hpp"

using namespace corrnoise;

namespace {

MechanismDescriptor wrap(Strategy s) {
  return MechanismDescriptor{"1", std::move(s), std::nullopt};
}

}  // namespace

TEST_CASE("round trip is lossless and byte-stable for every kind") {
  testutil::TestRng rng(73);
  std::vector<MechanismDescriptor> descriptors;
  descriptors.push_back(wrap(Strategy::toeplitz(5, optimal_toeplitz_coeffs(5))));
  descriptors.push_back(wrap(Strategy::banded_toeplitz(9, {1.0, 1.0 / 3.0, 0.1})));
  descriptors.push_back(wrap(Strategy::blt(16, {0.25, 0.3}, {0.9, 0.17})));
  descriptors.push_back(wrap(Strategy::tree(6, TreeVariant::kBasic)));
  descriptors.push_back(
      wrap(Strategy::tree(8, TreeVariant::kFullPseudoinverse)));
  {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
      c(i, i) = rng.uniform(0.5, 1.5);
      for (int j = 0; j < i; ++j) c(i, j) = rng.uniform(-1.0, 1.0);
    }
    descriptors.push_back(wrap(Strategy::dense_strategy(c)));
  }
  {
    MechanismDescriptor with_meta =
        wrap(Strategy::toeplitz(4, {1.0, 0.5, 0.375, 0.3125}));
    DescriptorMetadata meta;
    meta.workload = "prefix";
    meta.schema = "single";
    meta.objective = "max";
    meta.objective_value = 1.3351524324261355;
    meta.sensitivity = 1.2186458392425;
    meta.converged = true;
    with_meta.metadata = meta;
    descriptors.push_back(std::move(with_meta));
  }

  for (const MechanismDescriptor& d : descriptors) {
    const std::string once = descriptor_to_json(d);
    const MechanismDescriptor parsed = descriptor_from_json(once);
    const std::string twice = descriptor_to_json(parsed);
    CHECK(once == twice);
    CHECK(parsed.strategy.kind == d.strategy.kind);
    CHECK(parsed.strategy.n == d.strategy.n);
    if (d.strategy.kind == StrategyKind::kDense) {
      CHECK((parsed.strategy.dense - d.strategy.dense).cwiseAbs().maxCoeff() ==
            0.0);
    }
    if (!d.strategy.coeffs.empty()) {
      CHECK(parsed.strategy.coeffs == d.strategy.coeffs);
    }
    CHECK(parsed.strategy.alpha == d.strategy.alpha);
    CHECK(parsed.strategy.lambda == d.strategy.lambda);
  }
}

TEST_CASE("file round trip") {
  const std::string path = "descriptor_test_roundtrip.json";
  const MechanismDescriptor d = wrap(Strategy::blt(32, {0.5}, {0.123456789012345}));
  save_descriptor(d, path);
  const MechanismDescriptor loaded = load_descriptor(path);
  CHECK(loaded.strategy.lambda[0] == d.strategy.lambda[0]);
  std::remove(path.c_str());
}

TEST_CASE("invalid descriptors are rejected") {
  CHECK_THROWS_AS(descriptor_from_json("not json"), Error);
  CHECK_THROWS_AS(descriptor_from_json("{}"), Error);
  CHECK_THROWS_AS(
      descriptor_from_json(
          R"({"version":"2","kind":"toeplitz","n":2,"params":{"coeffs":[1,0]}})"),
      Error);
  CHECK_THROWS_AS(
      descriptor_from_json(
          R"({"version":"1","kind":"wavelet","n":2,"params":{}})"),
      Error);
  CHECK_THROWS_AS(load_descriptor("does_not_exist.json"), Error);
}

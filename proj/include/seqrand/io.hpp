// io.hpp - JSON configs and CSV emission
#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "seqrand/harness.hpp"

namespace seqrand {

inline constexpr const char* kArtifactVersion = "0.1.0";

std::string format_double(double v);

nlohmann::json to_json(const LossSpec& loss);
LossSpec loss_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VarianceFn& vf);
VarianceFn variance_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ExpertTable& experts);
ExpertTable experts_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LogWeights& w);
LogWeights log_weights_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiscreteDistribution& P);
DiscreteDistribution distribution_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FittedAggregate& fitted);

nlohmann::json to_json(const Hypercube& hc);
Hypercube hypercube_from_json(const nlohmann::json& j);

PresetParams preset_params_from_json(const nlohmann::json& j);

EstimatorSpec estimator_from_json(const nlohmann::json& j, int num_experts);

UpperBound upper_bound_from_name(const std::string& name);
BoundParams bound_params_from_json(const nlohmann::json& j);

// Streamed prediction rows: step, cell, prediction.
void write_predictions_csv(std::ostream& os, const ExpertTable& experts,
                           const std::vector<std::vector<double>>& per_step_cell_predictions,
                           std::uint64_t seed);

class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::uint64_t seed);
    void header(const std::vector<std::string>& columns);
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& os_;
};

}  // namespace seqrand

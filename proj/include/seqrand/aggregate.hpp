// aggregate.hpp - the sequentially randomized estimator family and its bound evaluators
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "seqrand/gibbs.hpp"
#include "seqrand/loss.hpp"
#include "seqrand/variance.hpp"

namespace seqrand {

enum class OutputMode { uniform_draw, cesaro_mean };

struct EstimatorConfig {
    LossSpec loss = LossSpec::square(1.0);
    double lambda = 1.0;
    LogWeights prior = LogWeights::uniform(1);
    VarianceFn variance = VarianceFn::zero();
    OutputMode output_mode = OutputMode::uniform_draw;

    void validate() const;  // prior normalized, lambda admissible for the variance fn
};

// Markers stored in FittedAggregate::drawn when the posterior map does not
// draw an expert index.
inline constexpr int kMixtureDraw = -1;
inline constexpr int kSubstitutionDraw = -2;

// Artifact of one sequential fit over n outcomes.
//   score_table       (n+1) x d, row i holds the compensated cumulative scores S_i
//   trajectory        Gibbs posteriors of the score rows, i = 0..n
//   drawn             drawn expert per step, or a posterior-map marker
//   log_partitions    log E_prior exp(-lambda S_i), maintained incrementally
//   substitution_values  (n+1) x K per-cell substitution predictions (that mode only)
struct FittedAggregate {
    Eigen::MatrixXd score_table;
    std::vector<LogWeights> trajectory;
    std::vector<int> drawn;
    Eigen::VectorXd log_partitions;
    Eigen::MatrixXd substitution_values;

    int steps() const { return static_cast<int>(trajectory.size()) - 1; }
};

FittedAggregate seqrand_fit(const EstimatorConfig& config, const ExpertTable& experts,
                            std::span<const Outcome> data, SplitRng& rng);

// Deterministic prediction of slot i at a cell: the drawn expert's value, the
// slot mixture, or the stored substitution value, per the posterior map.
double slot_prediction(const FittedAggregate& fitted, const EstimatorConfig& config,
                       const ExpertTable& experts, int slot, int cell);

// uniform_draw picks a slot uniformly; cesaro_mean averages the slot mixtures.
double seqrand_predict(const FittedAggregate& fitted, const EstimatorConfig& config,
                       const ExpertTable& experts, int cell, SplitRng& rng);

struct OnlineResult {
    double cumulative_loss = 0.0;    // sum of realized per-step losses
    double audit_bound = 0.0;        // best expert's compensated score + log d / lambda
    std::vector<double> predictions; // one per incoming outcome
    Eigen::VectorXd per_step_loss;
};

// Predict-then-update pass over the stream.
OnlineResult online_seqrand(const EstimatorConfig& config, const ExpertTable& experts,
                            std::span<const Outcome> stream, SplitRng& rng);

// Cesaro average of the n+1 Gibbs mixtures over cumulative losses (deterministic).
struct ProgressiveMixture {
    std::vector<LogWeights> trajectory;
    Eigen::VectorXd cell_average;  // averaged mixture prediction per cell

    double predict(int cell) const { return cell_average(cell); }
};

ProgressiveMixture progressive_mixture(const LossSpec& loss, double lambda,
                                       const LogWeights& prior, const ExpertTable& experts,
                                       std::span<const Outcome> data);

// A single prediction value that dominates the lambda-exponential mixture of
// losses pointwise over the grid (none when the grid search fails to certify
// one within tolerance).
std::optional<double> substitution_prediction(const LossSpec& loss, const LogWeights& rho,
                                              const ExpertTable& experts, double lambda, int cell,
                                              std::span<const double> y_grid,
                                              double tolerance = 1e-9);

// Single Gibbs reweighting by the full cumulative loss vector.
LogWeights gibbs_erm(const LossSpec& loss, double lambda, const LogWeights& prior,
                     const ExpertTable& experts, std::span<const Outcome> data);

// Closed-form expected-excess-risk bounds.
enum class UpperBound {
    zero_delta_oracle,   // min risk + log d / (lambda (n+1))
    square_mixable,      // 2 B^2 log d / (n+1)
    hoeffding,           // span sqrt(log d / (2(n+1)))
    absolute_moment,     // 2 b sqrt(2 log d / (n+1))
    lq_mixable,          // q (1 ^ 2^{q-2}) B^q / (q-1) * log d / n
    entropy_mixable,     // log d / n
    bernstein_low_noise, // min risk + 4 c log d / (n+1)
};

struct BoundParams {
    int cardinality = 1;
    long n = 1;
    double lambda = 1.0;
    double B = 1.0;
    double b = 1.0;
    double q = 2.0;
    double c = 1.0;
    double span = 1.0;
    double min_risk = 0.0;
};

double upper_bound_value(UpperBound bound, const BoundParams& p);

// Temperature minimizing the constant-compensation bound:
// sqrt(8 log d / (span^2 (n+1))).
double hoeffding_lambda(double span, int cardinality, long n);

}  // namespace seqrand

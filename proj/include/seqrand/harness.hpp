// harness.hpp - data generators, exact/Monte-Carlo risk evaluation, bound reports
#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "seqrand/aggregate.hpp"
#include "seqrand/minimax.hpp"

namespace seqrand {

struct MCResult {
    double mean = 0.0;
    double stderr_ = 0.0;
    int trials = 0;
    std::uint64_t master_seed = 0;
};

// Mean and standard error with order-independent (pairwise) accumulation, so
// serial and parallel schedules produce identical statistics.
MCResult summarize(std::span<const double> values, std::uint64_t master_seed);

double pairwise_sum(std::span<const double> values);

// Exact risk of a per-cell prediction vector under a finite-support law.
double exact_risk(const DiscreteDistribution& P, const LossSpec& loss, const ExpertTable& experts,
                  const Eigen::Ref<const Eigen::VectorXd>& cell_predictions);

double exact_expert_risk(const DiscreteDistribution& P, const LossSpec& loss,
                         const ExpertTable& experts, int expert);

double min_expert_risk(const DiscreteDistribution& P, const LossSpec& loss,
                       const ExpertTable& experts);

// Square-loss regression with symmetric Pareto-type noise: beyond a cutoff the
// noise density falls off as |t|^-(s+1+eps), scaled so the s-th moment budget
// holds; a fixed-seed 1e6-draw self-check enforces the budget at construction.
class HeavyTailGenerator {
public:
    HeavyTailGenerator(ExpertTable experts, int target_expert, double s, double A, double b,
                       std::uint64_t check_seed = 0x7a11ull);

    Outcome draw(SplitRng& rng) const;
    double noise(SplitRng& rng) const;

    const ExpertTable& experts() const { return experts_; }
    int target_expert() const { return target_; }
    double moment_order() const { return s_; }
    double moment_budget() const { return A_; }
    double prediction_bound() const { return b_; }
    double checked_moment() const { return checked_moment_; }

private:
    ExpertTable experts_;
    int target_;
    double s_, A_, b_;
    double tail_mass_, cutoff_, tail_index_;
    double checked_moment_;
};

// Exact-risk oracle plus sampler; hides whether the law is finite-support or
// a generator whose noise term cancels in excess risks.
class RiskModel {
public:
    virtual ~RiskModel() = default;
    virtual double prediction_risk(const Eigen::Ref<const Eigen::VectorXd>& cell_predictions)
        const = 0;
    virtual Outcome draw(SplitRng& rng) const = 0;
    virtual const ExpertTable& experts() const = 0;
    virtual const LossSpec& loss() const = 0;

    double expert_risk(int j) const;
    double min_expert_risk() const;
};

class DiscreteRiskModel final : public RiskModel {
public:
    DiscreteRiskModel(DiscreteDistribution P, LossSpec loss, ExpertTable experts);
    double prediction_risk(const Eigen::Ref<const Eigen::VectorXd>& preds) const override;
    Outcome draw(SplitRng& rng) const override;
    const ExpertTable& experts() const override { return experts_; }
    const LossSpec& loss() const override { return loss_; }

private:
    DiscreteDistribution P_;
    LossSpec loss_;
    ExpertTable experts_;
    std::vector<Outcome> atoms_;
    std::vector<double> masses_;
};

// Square-loss risks under a heavy-tail generator.  The noise second moment
// enters every risk additively, so it is estimated once by a fixed-seed
// quadrature and cancels exactly in excess-risk differences.
class HeavyTailRiskModel final : public RiskModel {
public:
    HeavyTailRiskModel(const HeavyTailGenerator& gen, LossSpec loss,
                       std::uint64_t quadrature_seed, long quadrature_draws = 1000000);
    double prediction_risk(const Eigen::Ref<const Eigen::VectorXd>& preds) const override;
    Outcome draw(SplitRng& rng) const override;
    const ExpertTable& experts() const override { return gen_.experts(); }
    const LossSpec& loss() const override { return loss_; }
    double noise_second_moment() const { return noise_sq_; }

private:
    const HeavyTailGenerator& gen_;
    LossSpec loss_;
    double noise_sq_;
};

enum class EstimatorKind { seqrand, progressive_mixture, gibbs_erm };

struct EstimatorSpec {
    EstimatorKind kind = EstimatorKind::seqrand;
    EstimatorConfig config;
    std::string name() const;
};

// Expected excess risk of one fitted run, with the output draw integrated out
// analytically (slot risks averaged) while the trajectory draws stay sampled.
double fitted_excess_risk(const RiskModel& model, const EstimatorSpec& spec,
                          std::span<const Outcome> data, double min_risk, SplitRng& rng);

MCResult excess_risk_mc(const RiskModel& model, const EstimatorSpec& spec, int n, int trials,
                        std::uint64_t master_seed, int threads = 1);

struct VertexFloor {
    std::vector<std::vector<MCResult>> per_vertex;  // [estimator][vertex]
    std::vector<int> argmax;                        // worst vertex per estimator
    // max-over-vertices excess clears the floor within Monte-Carlo error
    bool clears(int estimator, double bound) const;
    double max_mean(int estimator) const;
};

VertexFloor minimax_floor_mc(const Hypercube& hc, const ExpertTable& experts,
                             std::span<const EstimatorSpec> estimators, int n, int trials,
                             std::uint64_t master_seed, int threads = 1);

struct RateFit {
    double exponent = 0.0;
    double log_constant = 0.0;
    double residual = 0.0;
    int dropped = 0;  // nonpositive excess points skipped
};

// Least-squares slope of log(excess) against log(log_card / n).
RateFit rate_fit(std::span<const std::pair<long, double>> curve, double log_card);

struct BoundReportRow {
    std::string setting;
    long n = 0;
    double lower_exact = 0.0;
    double lower_closed = 0.0;
    double empirical = 0.0;
    double empirical_stderr = 0.0;
    double upper = 0.0;
    bool matched = true;
    bool ok = true;
};

struct BoundReportEntry {
    std::string setting;
    Hypercube hc;
    EstimatorSpec estimator;
    int n = 1;
    int trials = 100;
    UpperBound upper = UpperBound::zero_delta_oracle;
    BoundParams upper_params;
    bool matched = true;
};

// One row per entry: exact and closed lower bounds, the worst-vertex empirical
// excess of the estimator, and the closed-form upper bound.  Matched rows are
// checked for the sandwich ordering; mismatched rows carry ok = false checks
// disabled rather than silently passing.
std::vector<BoundReportRow> bound_report(std::span<const BoundReportEntry> entries,
                                         std::uint64_t master_seed, int threads = 1);

}  // namespace seqrand

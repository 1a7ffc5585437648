// gibbs.hpp - finite expert tables and log-domain Gibbs posteriors
#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

#include "seqrand/rng.hpp"

namespace seqrand {

// One observed pair: the input cell (index into ExpertTable::cells) and the output.
struct Outcome {
    int cell = 0;
    double y = 0.0;
};

// Canonical finite-domain expert set: d prediction functions tabulated over K
// input cells.  predictions(j, k) is expert j's value on cell k.
struct ExpertTable {
    std::vector<std::string> cells;
    Eigen::MatrixXd predictions;

    int num_experts() const { return static_cast<int>(predictions.rows()); }
    int num_cells() const { return static_cast<int>(predictions.cols()); }

    // Throws on unknown names or on duplicate cell identifiers.
    int cell_index(std::string_view name) const;
    void validate() const;
};

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v);

// Normalized distribution over a finite expert set, kept in log domain.
// Entries may be -inf (zero mass); log_sum_exp of the entries is 0.
class LogWeights {
public:
    static LogWeights uniform(int d);
    static LogWeights dirac(int d, int j);
    // Normalizes raw log-masses (subtraction of their log-sum-exp).
    static LogWeights normalized(Eigen::VectorXd raw);

    const Eigen::VectorXd& log_masses() const { return logw_; }
    int size() const { return static_cast<int>(logw_.size()); }
    double mass(int j) const { return std::exp(logw_(j)); }
    Eigen::VectorXd masses() const { return logw_.array().exp(); }

private:
    explicit LogWeights(Eigen::VectorXd logw) : logw_(std::move(logw)) {}
    Eigen::VectorXd logw_;
};

// Prior reweighted by exp(-lambda * h) and renormalized, computed with
// max-subtraction.  Entries of h may be +inf (annihilated mass); an h that
// annihilates all mass raises "degenerate posterior".  lambda = 0 returns
// the prior.
LogWeights gibbs_posterior(const LogWeights& prior, const Eigen::Ref<const Eigen::VectorXd>& h,
                           double lambda);

// KL(rho || pi); +inf when rho charges a pi-null atom.
double kl_divergence(const LogWeights& rho, const LogWeights& pi);

// [E_{g~pi_{-h}} h + KL(pi_{-h}, pi)] - [-log E_pi e^{-h}]; zero for the Gibbs
// minimizer, up to roundoff.
double duality_gap(const LogWeights& pi, const Eigen::Ref<const Eigen::VectorXd>& h);

// Variational objective E_{g~rho} h + KL(rho, pi) for an arbitrary rho.
double variational_objective(const LogWeights& rho, const LogWeights& pi,
                             const Eigen::Ref<const Eigen::VectorXd>& h);

int sample_index(const LogWeights& rho, SplitRng& rng);

double mixture_prediction(const LogWeights& rho, const ExpertTable& experts, int cell);

// Per-expert losses on one outcome: column `cell` of the table scored against y.
Eigen::VectorXd expert_losses(const class LossSpec& loss, const ExpertTable& experts,
                              const Outcome& z);

}  // namespace seqrand

// variance.hpp - the catalog of variance functions and the inequality verifier
#pragma once

#include <functional>
#include <span>
#include <string>

#include "seqrand/gibbs.hpp"
#include "seqrand/loss.hpp"

namespace seqrand {

enum class PiHatMode { identity, dirac_mixture, substitution };

enum class VarianceKind { zero, bernstein, hoeffding_const, heavy_tail };

// A variance function delta_lambda paired with its admissible posterior map.
// zero:          0 (mixable losses, lambda below the mixability threshold)
// bernstein:     lambda (L(z,g) - L(z,g'))^2 / 2
// hoeffding:     lambda span^2 / 8, independent of the arguments
// heavy_tail:    the truncated spread compensation, a function of y alone
class VarianceFn {
public:
    static VarianceFn zero(PiHatMode mode = PiHatMode::dirac_mixture);
    static VarianceFn bernstein();
    static VarianceFn hoeffding_const(double span);
    // b bounds the predictions, threshold is the output magnitude beyond which
    // the compensation activates; requires 0 < b <= threshold.
    static VarianceFn heavy_tail(double b, double threshold,
                                 PiHatMode mode = PiHatMode::dirac_mixture);

    VarianceKind kind() const { return kind_; }
    PiHatMode pi_hat() const { return pi_hat_; }
    double span() const { return span_; }
    double prediction_bound() const { return b_; }
    double tail_threshold() const { return threshold_; }
    std::string kind_name() const;

private:
    VarianceFn(VarianceKind kind, PiHatMode mode, double span, double b, double threshold)
        : kind_(kind), pi_hat_(mode), span_(span), b_(b), threshold_(threshold) {}

    VarianceKind kind_;
    PiHatMode pi_hat_;
    double span_ = 0.0;
    double b_ = 0.0;
    double threshold_ = 0.0;
};

// delta_lambda evaluated on one outcome.  Loss values of the two candidate
// functions are precomputed by the caller; the raw output y is needed by the
// heavy-tail kind only.
double variance_delta(const VarianceFn& vf, double lambda, const LossSpec& loss, double y,
                      double loss_g, double loss_gprime);

// Configuration-time admissibility: rejects zero-delta setups whose lambda
// exceeds the mixability threshold or whose posterior map cannot certify the
// inequality, and heavy-tail setups beyond the exp-concavity threshold.
void check_admissible(const VarianceFn& vf, const LossSpec& loss, double lambda);

struct VarianceCheck {
    double max_value = 0.0;
    Outcome witness;       // sample attaining the maximum
};

// Sample-wise evaluation of
//   E_{g'~pi_hat(rho)} log E_{g~rho} exp(lambda [L(z,g') - L(z,g) - delta(z,g,g')])
// over z_samples; returns the maximum and where it occurred.  Nonpositive
// values (up to tolerance) certify the configuration, positive values locate
// a violation.  The substitution posterior map requires a caller-supplied
// prediction hook.
VarianceCheck verify_variance_inequality(
    const LossSpec& loss, double lambda, const VarianceFn& vf, const ExpertTable& experts,
    const LogWeights& rho, std::span<const Outcome> z_samples,
    const std::function<double(const LogWeights&, int)>& substitution_hook = nullptr);

}  // namespace seqrand

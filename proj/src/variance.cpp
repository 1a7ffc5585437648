#include "seqrand/variance.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqrand {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

VarianceFn VarianceFn::zero(PiHatMode mode) {
    return VarianceFn(VarianceKind::zero, mode, 0.0, 0.0, 0.0);
}

VarianceFn VarianceFn::bernstein() {
    return VarianceFn(VarianceKind::bernstein, PiHatMode::identity, 0.0, 0.0, 0.0);
}

VarianceFn VarianceFn::hoeffding_const(double span) {
    if (!(span > 0.0)) throw std::invalid_argument("VarianceFn: span must be positive");
    return VarianceFn(VarianceKind::hoeffding_const, PiHatMode::identity, span, 0.0, 0.0);
}

VarianceFn VarianceFn::heavy_tail(double b, double threshold, PiHatMode mode) {
    if (!(b > 0.0 && b <= threshold))
        throw std::invalid_argument("VarianceFn: heavy_tail needs 0 < b <= threshold");
    return VarianceFn(VarianceKind::heavy_tail, mode, 0.0, b, threshold);
}

std::string VarianceFn::kind_name() const {
    switch (kind_) {
        case VarianceKind::zero: return "zero";
        case VarianceKind::bernstein: return "bernstein";
        case VarianceKind::hoeffding_const: return "hoeffding_const";
        case VarianceKind::heavy_tail: return "heavy_tail";
    }
    return "?";
}

double variance_delta(const VarianceFn& vf, double lambda, const LossSpec& loss, double y,
                      double loss_g, double loss_gprime) {
    if (!(lambda > 0.0)) throw std::invalid_argument("variance_delta: lambda must be positive");
    switch (vf.kind()) {
        case VarianceKind::zero:
            return 0.0;
        case VarianceKind::bernstein: {
            const double d = loss_g - loss_gprime;
            return 0.5 * lambda * d * d;
        }
        case VarianceKind::hoeffding_const:
            return lambda * vf.span() * vf.span() / 8.0;
        case VarianceKind::heavy_tail: {
            if (std::abs(y) <= vf.tail_threshold()) return 0.0;
            const double spread = loss_span(loss, y, vf.prediction_bound());
            if (lambda * spread < 1.0) return 0.5 * lambda * spread * spread;
            return spread - 1.0 / (2.0 * lambda);
        }
    }
    throw std::logic_error("variance_delta: unreachable");
}

void check_admissible(const VarianceFn& vf, const LossSpec& loss, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("check_admissible: lambda must be positive");
    switch (vf.kind()) {
        case VarianceKind::zero: {
            if (vf.pi_hat() == PiHatMode::identity)
                throw std::invalid_argument(
                    "check_admissible: zero delta needs the mixture or substitution posterior map");
            const auto eta = mixability_eta_max(loss);
            if (!eta)
                throw std::invalid_argument(
                    "check_admissible: zero delta requires a mixable loss (square/lq/entropy "
                    "with bounded outputs)");
            if (lambda > *eta + 1e-12)
                throw std::invalid_argument(
                    "check_admissible: lambda exceeds the mixability threshold");
            return;
        }
        case VarianceKind::bernstein:
        case VarianceKind::hoeffding_const:
            return;  // valid for every loss and lambda
        case VarianceKind::heavy_tail: {
            if (loss.kind() != LossKind::lq && loss.kind() != LossKind::square)
                throw std::invalid_argument("check_admissible: heavy_tail pairs with power losses");
            // exp(-lambda0 l(y, .)) concave on [-b, b] for all |y| <= threshold
            const double q = loss.kind() == LossKind::square ? 2.0 : loss.exponent();
            const double lambda0 =
                (q - 1.0) / (q * std::pow(vf.tail_threshold() + vf.prediction_bound(), q));
            if (lambda > lambda0 * (1.0 + 1e-12))
                throw std::invalid_argument(
                    "check_admissible: lambda exceeds the exp-concavity threshold");
            return;
        }
    }
}

VarianceCheck verify_variance_inequality(
    const LossSpec& loss, double lambda, const VarianceFn& vf, const ExpertTable& experts,
    const LogWeights& rho, std::span<const Outcome> z_samples,
    const std::function<double(const LogWeights&, int)>& substitution_hook) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("verify_variance_inequality: lambda must be positive");
    if (z_samples.empty())
        throw std::invalid_argument("verify_variance_inequality: empty sample list");
    if (vf.pi_hat() == PiHatMode::substitution && !substitution_hook)
        throw std::invalid_argument(
            "verify_variance_inequality: substitution mode needs a prediction hook");

    const int d = experts.num_experts();
    VarianceCheck out{-kInf, z_samples[0]};
    Eigen::VectorXd inner(d);
    for (const Outcome& z : z_samples) {
        const Eigen::VectorXd losses = expert_losses(loss, experts, z);

        // log E_{g~rho} exp(lambda [loss_gprime - L(z,g) - delta]); infinite
        // L(z,g) enters as a -inf exponent, i.e. a mass-zero contribution.
        const auto inner_value = [&](double loss_gprime) {
            for (int j = 0; j < d; ++j) {
                const double lw = rho.log_masses()(j);
                if (lw == -kInf || losses(j) == kInf) {
                    inner(j) = -kInf;
                    continue;
                }
                const double delta = variance_delta(vf, lambda, loss, z.y, losses(j), loss_gprime);
                inner(j) = lw + lambda * (loss_gprime - losses(j) - delta);
            }
            return log_sum_exp(inner);
        };

        double value;
        switch (vf.pi_hat()) {
            case PiHatMode::identity: {
                value = 0.0;
                for (int jp = 0; jp < d; ++jp) {
                    const double m = rho.mass(jp);
                    if (m > 0.0) value += m * inner_value(losses(jp));
                }
                break;
            }
            case PiHatMode::dirac_mixture: {
                const double mix = mixture_prediction(rho, experts, z.cell);
                if (!loss.prediction_range().contains(mix))
                    throw std::invalid_argument(
                        "verify_variance_inequality: mixture outside the prediction range");
                value = inner_value(eval_loss(loss, z.y, mix));
                break;
            }
            case PiHatMode::substitution: {
                const double pred = substitution_hook(rho, z.cell);
                value = inner_value(eval_loss(loss, z.y, pred));
                break;
            }
            default:
                throw std::logic_error("verify_variance_inequality: unreachable");
        }
        if (value > out.max_value) out = VarianceCheck{value, z};
    }
    return out;
}

}  // namespace seqrand

#include "seqrand/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqrand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// y log(y/z) with the 0 log 0 = 0 convention.
double xlogx_ratio(double y, double z) {
    if (y == 0.0) return 0.0;
    if (z == 0.0) return kInf;
    return y * std::log(y / z);
}

}  // namespace

bool Interval::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

LossSpec::LossSpec(LossKind kind, double q, Interval output, Interval prediction)
    : kind_(kind), q_(q), output_(output), prediction_(prediction) {
    require(!(output.lo > output.hi), "LossSpec: empty output range");
    require(!(prediction.lo > prediction.hi), "LossSpec: empty prediction range");
    if (kind == LossKind::lq) require(q > 1.0, "LossSpec: lq requires q > 1");
    if (kind == LossKind::entropy)
        require(output.lo >= 0.0 && output.hi <= 1.0, "LossSpec: entropy outputs must lie in [0,1]");
}

LossSpec LossSpec::square(double y_abs) { return square(Interval{-y_abs, y_abs}); }

LossSpec LossSpec::square(Interval output) {
    return LossSpec(LossKind::square, 2.0, output, output);
}

LossSpec LossSpec::power(double q, double y_abs) {
    return power(q, Interval{-y_abs, y_abs}, Interval{-y_abs, y_abs});
}

LossSpec LossSpec::power(double q, Interval output, Interval prediction) {
    return LossSpec(LossKind::lq, q, output, prediction);
}

LossSpec LossSpec::absolute(Interval output) { return absolute(output, output); }

LossSpec LossSpec::absolute(Interval output, Interval prediction) {
    return LossSpec(LossKind::absolute, 1.0, output, prediction);
}

LossSpec LossSpec::entropy() {
    return LossSpec(LossKind::entropy, 0.0, Interval{0.0, 1.0}, Interval{0.0, 1.0});
}

LossSpec LossSpec::zero_one() {
    return LossSpec(LossKind::zero_one, 0.0, Interval{0.0, 1.0}, Interval{0.0, 1.0});
}

double LossSpec::output_bound() const {
    return std::max(std::abs(output_.lo), std::abs(output_.hi));
}

std::string LossSpec::kind_name() const {
    switch (kind_) {
        case LossKind::square: return "square";
        case LossKind::lq: return "lq";
        case LossKind::absolute: return "absolute";
        case LossKind::entropy: return "entropy";
        case LossKind::zero_one: return "zero_one";
    }
    return "?";
}

double eval_loss(const LossSpec& loss, double y_true, double y_pred) {
    require(!std::isnan(y_true) && !std::isnan(y_pred), "eval_loss: NaN input");
    switch (loss.kind()) {
        case LossKind::square: {
            const double d = y_true - y_pred;
            return d * d;
        }
        case LossKind::lq:
            return std::pow(std::abs(y_true - y_pred), loss.exponent());
        case LossKind::absolute:
            return std::abs(y_true - y_pred);
        case LossKind::entropy:
            return xlogx_ratio(y_true, y_pred) + xlogx_ratio(1.0 - y_true, 1.0 - y_pred);
        case LossKind::zero_one:
            return y_true == y_pred ? 0.0 : 1.0;
    }
    throw std::logic_error("eval_loss: unreachable");
}

std::optional<double> mixability_eta_max(const LossSpec& loss) {
    switch (loss.kind()) {
        case LossKind::square: {
            const double B = loss.output_bound();
            if (!std::isfinite(B) || B <= 0.0) return std::nullopt;
            return 1.0 / (2.0 * B * B);
        }
        case LossKind::lq: {
            const double B = loss.output_bound();
            if (!std::isfinite(B) || B <= 0.0) return std::nullopt;
            const double q = loss.exponent();
            return (q - 1.0) / (q * std::pow(B, q)) * std::min(1.0, std::pow(2.0, 2.0 - q));
        }
        case LossKind::entropy:
            return 1.0;
        case LossKind::absolute:
        case LossKind::zero_one:
            return std::nullopt;
    }
    return std::nullopt;
}

double numeric_eta_infimum(const LossSpec& loss, double scale_b, int grid_size) {
    require(loss.kind() == LossKind::lq || loss.kind() == LossKind::square,
            "numeric_eta_infimum: power loss required");
    require(grid_size >= 2, "numeric_eta_infimum: grid_size < 2");
    require(scale_b > 0.0, "numeric_eta_infimum: scale must be positive");
    const double q = loss.exponent();
    const double front = (q - 1.0) / (q * std::pow(2.0 * scale_b, q));
    double best = kInf;
    for (int i = 1; i <= grid_size; ++i) {
        const double t = static_cast<double>(i) / (grid_size + 1);
        const double denom = t * (1.0 - t) * (std::pow(t, q - 1.0) + std::pow(1.0 - t, q - 1.0));
        best = std::min(best, front / denom);
    }
    return best;
}

double constant_prediction_risk(const LossSpec& loss, double p, double h1, double h2, double y) {
    require(p >= 0.0 && p <= 1.0, "constant_prediction_risk: p outside [0,1]");
    const double a = p == 0.0 ? 0.0 : p * eval_loss(loss, h1, y);
    const double b = p == 1.0 ? 0.0 : (1.0 - p) * eval_loss(loss, h2, y);
    return a + b;
}

double bernoulli_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

double best_constant_risk(const LossSpec& loss, double p, double h1, double h2) {
    require(p >= 0.0 && p <= 1.0, "best_constant_risk: p outside [0,1]");
    require(h1 != h2, "best_constant_risk: coincident outputs");
    switch (loss.kind()) {
        case LossKind::square:
        case LossKind::lq: {
            const double q = loss.kind() == LossKind::square ? 2.0 : loss.exponent();
            const double r = 1.0 / (q - 1.0);
            const double D = std::pow(p, r) + std::pow(1.0 - p, r);
            return p * (1.0 - p) * std::pow(std::abs(h2 - h1), q) / std::pow(D, q - 1.0);
        }
        case LossKind::absolute:
            return std::min(p, 1.0 - p) * std::abs(h2 - h1);
        case LossKind::zero_one:
            return std::min(p, 1.0 - p);
        case LossKind::entropy: {
            require(h1 >= 0.0 && h1 <= 1.0 && h2 >= 0.0 && h2 <= 1.0,
                    "best_constant_risk: entropy outputs must lie in [0,1]");
            return bernoulli_entropy(p * h1 + (1.0 - p) * h2) - p * bernoulli_entropy(h1) -
                   (1.0 - p) * bernoulli_entropy(h2);
        }
    }
    throw std::logic_error("best_constant_risk: unreachable");
}

double best_constant_risk_dd(const LossSpec& loss, double p, double h1, double h2) {
    require(loss.kind() == LossKind::lq || loss.kind() == LossKind::square,
            "best_constant_risk_dd: power loss required");
    require(p > 0.0 && p < 1.0, "best_constant_risk_dd: p must lie strictly inside (0,1)");
    require(h1 != h2, "best_constant_risk_dd: coincident outputs");
    const double q = loss.kind() == LossKind::square ? 2.0 : loss.exponent();
    const double r = 1.0 / (q - 1.0);
    const double D = std::pow(p, r) + std::pow(1.0 - p, r);
    return -(q / (q - 1.0)) * std::pow(p * (1.0 - p), (2.0 - q) / (q - 1.0)) *
           std::pow(std::abs(h2 - h1), q) / std::pow(D, q + 1.0);
}

double best_constant(const LossSpec& loss, double p, double h1, double h2) {
    require(p >= 0.0 && p <= 1.0, "best_constant: p outside [0,1]");
    require(h1 != h2, "best_constant: coincident outputs");
    switch (loss.kind()) {
        case LossKind::square:
        case LossKind::lq: {
            const double q = loss.kind() == LossKind::square ? 2.0 : loss.exponent();
            const double r = 1.0 / (q - 1.0);
            const double wp = std::pow(p, r);
            const double wm = std::pow(1.0 - p, r);
            return (wp * h1 + wm * h2) / (wp + wm);
        }
        case LossKind::absolute:
        case LossKind::zero_one:
            return p >= 0.5 ? h1 : h2;
        case LossKind::entropy:
            return p * h1 + (1.0 - p) * h2;
    }
    throw std::logic_error("best_constant: unreachable");
}

double loss_span(const LossSpec& loss, double y, double b) {
    require(b > 0.0, "loss_span: prediction bound must be positive");
    require(loss.kind() == LossKind::square || loss.kind() == LossKind::lq ||
                loss.kind() == LossKind::absolute,
            "loss_span: defined for square/lq/absolute");
    // l(y, .) decreases up to y and increases after it, so the max over [-b, b]
    // sits at the endpoint farther from y and the min at the projection of y.
    const double far = std::abs(y) + b;
    const double near = std::max(std::abs(y) - b, 0.0);
    switch (loss.kind()) {
        case LossKind::square: return far * far - near * near;
        case LossKind::lq: {
            const double q = loss.exponent();
            return std::pow(far, q) - std::pow(near, q);
        }
        default: return far - near;  // absolute
    }
}

}  // namespace seqrand

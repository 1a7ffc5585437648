// loss.hpp - loss families, mixability constants and best-constant risk curves
#pragma once

#include <limits>
#include <optional>
#include <string>

namespace seqrand {

enum class LossKind { square, lq, absolute, entropy, zero_one };

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    double width() const { return hi - lo; }
    bool bounded() const;
};

// A loss family together with its output and prediction ranges.  The power
// exponent q is meaningful for kind == lq only (absolute is a separate kind:
// its mixability and best-constant formulas differ structurally).
class LossSpec {
public:
    static LossSpec square(double y_abs);
    static LossSpec square(Interval output);
    static LossSpec power(double q, double y_abs);
    static LossSpec power(double q, Interval output, Interval prediction);
    static LossSpec absolute(Interval output);
    static LossSpec absolute(Interval output, Interval prediction);
    static LossSpec entropy();
    static LossSpec zero_one();

    LossKind kind() const { return kind_; }
    double exponent() const { return q_; }
    const Interval& output_range() const { return output_; }
    const Interval& prediction_range() const { return prediction_; }

    // Largest |y| over the output range (the B of bounded-regression bounds);
    // +inf for unbounded outputs.
    double output_bound() const;

    std::string kind_name() const;

private:
    LossSpec(LossKind kind, double q, Interval output, Interval prediction);

    LossKind kind_;
    double q_;
    Interval output_;
    Interval prediction_;
};

// Pointwise loss.  Entropy loss at a mismatched {0,1} prediction returns the
// distinguished infinite value rather than trapping; NaN inputs are rejected.
double eval_loss(const LossSpec& loss, double y_true, double y_pred);

// Largest eta with generic-algorithm constant c(eta) = 1, when one exists.
std::optional<double> mixability_eta_max(const LossSpec& loss);

// Grid infimum of the reduced one-dimensional mixability expression
//   ((q-1)/(q(2B)^q)) / (t(1-t)[t^{q-1} + (1-t)^{q-1}]),  t in (0,1),
// for the power loss on [-B, B].  Endpoints are excluded (integrand singular).
double numeric_eta_infimum(const LossSpec& loss, double scale_b, int grid_size);

// Risk of the constant prediction y against the two-point output law
// P(Y=h1) = p = 1 - P(Y=h2).
double constant_prediction_risk(const LossSpec& loss, double p, double h1, double h2, double y);

// Risk of the best constant prediction against that two-point law (closed forms).
double best_constant_risk(const LossSpec& loss, double p, double h1, double h2);

// Second derivative in p of best_constant_risk, for the power loss.
// Singular at p in {0,1}, which are rejected.
double best_constant_risk_dd(const LossSpec& loss, double p, double h1, double h2);

// Argmin over constant predictions of constant_prediction_risk.
double best_constant(const LossSpec& loss, double p, double h1, double h2);

// Largest loss spread sup_{|a|,|b'| <= b} [l(y,a) - l(y,b')] over predictions
// confined to [-b, b].  Defined for square/lq/absolute.
double loss_span(const LossSpec& loss, double y, double b);

// Shannon entropy of a Bernoulli(p), nats, with 0 log 0 = 0.
double bernoulli_entropy(double p);

}  // namespace seqrand

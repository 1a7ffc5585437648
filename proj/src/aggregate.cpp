#include "seqrand/aggregate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace seqrand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd linear_grid(const Interval& range, int points) {
    Eigen::VectorXd g(points);
    if (points == 1) {
        g(0) = 0.5 * (range.lo + range.hi);
        return g;
    }
    for (int i = 0; i < points; ++i)
        g(i) = range.lo + (range.hi - range.lo) * i / (points - 1);
    return g;
}

// Per-cell substitution row for one posterior; throws when the grid search
// fails to certify any value (the fail branch of the substitution predictor).
Eigen::VectorXd substitution_row(const EstimatorConfig& config, const ExpertTable& experts,
                                 const LogWeights& rho, const Eigen::VectorXd& grid, int step) {
    Eigen::VectorXd row(experts.num_cells());
    for (int k = 0; k < experts.num_cells(); ++k) {
        const auto value = substitution_prediction(
            config.loss, rho, experts, config.lambda, k,
            std::span<const double>(grid.data(), static_cast<std::size_t>(grid.size())));
        if (!value)
            throw std::runtime_error("seqrand: substitution failed at step " +
                                     std::to_string(step) + ", cell " + experts.cells[k]);
        row(k) = *value;
    }
    return row;
}

}  // namespace

void EstimatorConfig::validate() const {
    if (!(lambda > 0.0)) throw std::invalid_argument("EstimatorConfig: lambda must be positive");
    check_admissible(variance, loss, lambda);
}

FittedAggregate seqrand_fit(const EstimatorConfig& config, const ExpertTable& experts,
                            std::span<const Outcome> data, SplitRng& rng) {
    config.validate();
    experts.validate();
    const int d = experts.num_experts();
    if (config.prior.size() != d)
        throw std::invalid_argument("seqrand_fit: prior size does not match the expert table");
    const int n = static_cast<int>(data.size());
    const double lambda = config.lambda;
    const PiHatMode mode = config.variance.pi_hat();

    FittedAggregate out;
    out.score_table = Eigen::MatrixXd::Zero(n + 1, d);
    out.log_partitions = Eigen::VectorXd::Zero(n + 1);
    out.trajectory.reserve(n + 1);
    out.drawn.reserve(n + 1);

    Eigen::VectorXd grid;
    if (mode == PiHatMode::substitution) {
        grid = linear_grid(config.loss.prediction_range(), 201);
        out.substitution_values.resize(n + 1, experts.num_cells());
    }

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(d);
    out.trajectory.push_back(config.prior);
    switch (mode) {
        case PiHatMode::identity:
            out.drawn.push_back(sample_index(out.trajectory[0], rng));
            break;
        case PiHatMode::dirac_mixture:
            out.drawn.push_back(kMixtureDraw);
            break;
        case PiHatMode::substitution:
            out.substitution_values.row(0) =
                substitution_row(config, experts, out.trajectory[0], grid, 0);
            out.drawn.push_back(kSubstitutionDraw);
            break;
    }

    Eigen::VectorXd inner(d);
    for (int i = 1; i <= n; ++i) {
        const Outcome& z = data[i - 1];
        const Eigen::VectorXd losses = expert_losses(config.loss, experts, z);
        const double prev_loss =
            eval_loss(config.loss, z.y, slot_prediction(out, config, experts, i - 1, z.cell));

        const LogWeights& gibbs = out.trajectory[i - 1];
        for (int j = 0; j < d; ++j) {
            double inc = losses(j);
            if (inc != kInf)
                inc += variance_delta(config.variance, lambda, config.loss, z.y, losses(j),
                                      prev_loss);
            scores(j) += inc;
            out.score_table(i, j) = scores(j);
            inner(j) = gibbs.log_masses()(j) == -kInf || inc == kInf
                           ? -kInf
                           : gibbs.log_masses()(j) - lambda * inc;
        }
        const double step_log = log_sum_exp(inner);
        if (step_log == -kInf)
            throw std::runtime_error("seqrand_fit: degenerate posterior at step " +
                                     std::to_string(i));
        out.log_partitions(i) = out.log_partitions(i - 1) + step_log;
        out.trajectory.push_back(gibbs_posterior(config.prior, scores, lambda));
        switch (mode) {
            case PiHatMode::identity:
                out.drawn.push_back(sample_index(out.trajectory[i], rng));
                break;
            case PiHatMode::dirac_mixture:
                out.drawn.push_back(kMixtureDraw);
                break;
            case PiHatMode::substitution:
                out.substitution_values.row(i) =
                    substitution_row(config, experts, out.trajectory[i], grid, i);
                out.drawn.push_back(kSubstitutionDraw);
                break;
        }
    }
    return out;
}

double slot_prediction(const FittedAggregate& fitted, const EstimatorConfig& config,
                       const ExpertTable& experts, int slot, int cell) {
    if (slot < 0 || slot > fitted.steps())
        throw std::invalid_argument("slot_prediction: slot out of range");
    const int mark = fitted.drawn[static_cast<std::size_t>(slot)];
    if (mark == kMixtureDraw)
        return mixture_prediction(fitted.trajectory[static_cast<std::size_t>(slot)], experts, cell);
    if (mark == kSubstitutionDraw) return fitted.substitution_values(slot, cell);
    (void)config;
    return experts.predictions(mark, cell);
}

// Expectation of the slot's randomizing distribution at a cell (integrates the
// expert draw out; coincides with slot_prediction for the deterministic maps).
static double slot_mean_prediction(const FittedAggregate& fitted, const ExpertTable& experts,
                                   const VarianceFn& vf, int slot, int cell) {
    if (vf.pi_hat() == PiHatMode::substitution) return fitted.substitution_values(slot, cell);
    return mixture_prediction(fitted.trajectory[static_cast<std::size_t>(slot)], experts, cell);
}

double seqrand_predict(const FittedAggregate& fitted, const EstimatorConfig& config,
                       const ExpertTable& experts, int cell, SplitRng& rng) {
    const int slots = fitted.steps() + 1;
    if (config.output_mode == OutputMode::uniform_draw) {
        int slot = static_cast<int>(rng.uniform() * slots);
        if (slot >= slots) slot = slots - 1;
        return slot_prediction(fitted, config, experts, slot, cell);
    }
    double acc = 0.0;
    for (int i = 0; i < slots; ++i)
        acc += slot_mean_prediction(fitted, experts, config.variance, i, cell);
    return acc / slots;
}

OnlineResult online_seqrand(const EstimatorConfig& config, const ExpertTable& experts,
                            std::span<const Outcome> stream, SplitRng& rng) {
    config.validate();
    experts.validate();
    const int d = experts.num_experts();
    if (config.prior.size() != d)
        throw std::invalid_argument("online_seqrand: prior size does not match the expert table");
    const double lambda = config.lambda;
    const PiHatMode mode = config.variance.pi_hat();
    const int m = static_cast<int>(stream.size());

    Eigen::VectorXd grid;
    if (mode == PiHatMode::substitution)
        grid = linear_grid(config.loss.prediction_range(), 201);

    OnlineResult out;
    out.predictions.reserve(stream.size());
    out.per_step_loss.resize(m);

    Eigen::VectorXd scores = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd cum_loss = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd cum_delta = Eigen::VectorXd::Zero(d);
    LogWeights posterior = config.prior;
    int drawn = mode == PiHatMode::identity ? sample_index(posterior, rng)
                : mode == PiHatMode::dirac_mixture ? kMixtureDraw
                                                   : kSubstitutionDraw;
    Eigen::VectorXd subst;
    if (mode == PiHatMode::substitution)
        subst = substitution_row(config, experts, posterior, grid, 0);

    for (int i = 1; i <= m; ++i) {
        const Outcome& z = stream[i - 1];
        double pred;
        if (drawn == kMixtureDraw)
            pred = mixture_prediction(posterior, experts, z.cell);
        else if (drawn == kSubstitutionDraw)
            pred = subst(z.cell);
        else
            pred = experts.predictions(drawn, z.cell);
        const double realized = eval_loss(config.loss, z.y, pred);
        out.predictions.push_back(pred);
        out.per_step_loss(i - 1) = realized;
        out.cumulative_loss += realized;

        const Eigen::VectorXd losses = expert_losses(config.loss, experts, z);
        bool alive = false;
        for (int j = 0; j < d; ++j) {
            cum_loss(j) += losses(j);
            double delta = 0.0;
            if (losses(j) != kInf)
                delta = variance_delta(config.variance, lambda, config.loss, z.y, losses(j),
                                       realized);
            cum_delta(j) += delta;
            scores(j) = losses(j) == kInf ? kInf : scores(j) + losses(j) + delta;
            alive = alive || scores(j) != kInf;
        }
        if (!alive)
            throw std::runtime_error("online_seqrand: degenerate posterior at step " +
                                     std::to_string(i));
        posterior = gibbs_posterior(config.prior, scores, lambda);
        if (mode == PiHatMode::identity)
            drawn = sample_index(posterior, rng);
        else if (mode == PiHatMode::substitution)
            subst = substitution_row(config, experts, posterior, grid, i);
    }

    double best = kInf;
    for (int j = 0; j < d; ++j) {
        const double at = cum_loss(j) + cum_delta(j) - config.prior.log_masses()(j) / lambda;
        best = std::min(best, at);
    }
    out.audit_bound = best;
    return out;
}

ProgressiveMixture progressive_mixture(const LossSpec& loss, double lambda,
                                       const LogWeights& prior, const ExpertTable& experts,
                                       std::span<const Outcome> data) {
    experts.validate();
    if (prior.size() != experts.num_experts())
        throw std::invalid_argument("progressive_mixture: prior size mismatch");
    const int n = static_cast<int>(data.size());
    ProgressiveMixture out;
    out.trajectory.reserve(n + 1);
    out.trajectory.push_back(prior);
    Eigen::VectorXd cum = Eigen::VectorXd::Zero(experts.num_experts());
    for (int i = 1; i <= n; ++i) {
        const Eigen::VectorXd losses = expert_losses(loss, experts, data[i - 1]);
        for (int j = 0; j < cum.size(); ++j)
            cum(j) = losses(j) == kInf ? kInf : cum(j) + losses(j);
        out.trajectory.push_back(gibbs_posterior(prior, cum, lambda));
    }
    out.cell_average = Eigen::VectorXd::Zero(experts.num_cells());
    for (const LogWeights& w : out.trajectory)
        for (int k = 0; k < experts.num_cells(); ++k)
            out.cell_average(k) += mixture_prediction(w, experts, k);
    out.cell_average /= (n + 1);
    return out;
}

std::optional<double> substitution_prediction(const LossSpec& loss, const LogWeights& rho,
                                              const ExpertTable& experts, double lambda, int cell,
                                              std::span<const double> y_grid, double tolerance) {
    if (y_grid.empty()) throw std::invalid_argument("substitution_prediction: empty grid");
    if (!(lambda > 0.0))
        throw std::invalid_argument("substitution_prediction: lambda must be positive");
    const int d = experts.num_experts();
    const int ny = static_cast<int>(y_grid.size());

    // (1/lambda) log E_{g~rho} exp(-lambda l(y, g(cell))) per grid output
    Eigen::VectorXd mix_term(ny);
    Eigen::VectorXd inner(d);
    for (int a = 0; a < ny; ++a) {
        for (int j = 0; j < d; ++j) {
            const double lw = rho.log_masses()(j);
            const double lj = eval_loss(loss, y_grid[a], experts.predictions(j, cell));
            inner(j) = lw == -kInf || lj == kInf ? -kInf : lw - lambda * lj;
        }
        mix_term(a) = log_sum_exp(inner) / lambda;
    }

    double best_margin = kInf;
    double best_value = 0.0;
    for (int c = 0; c < ny; ++c) {
        double worst = -kInf;
        for (int a = 0; a < ny; ++a) {
            const double margin = eval_loss(loss, y_grid[a], y_grid[c]) + mix_term(a);
            worst = std::max(worst, margin);
            if (worst > best_margin) break;
        }
        if (worst < best_margin) {
            best_margin = worst;
            best_value = y_grid[c];
        }
    }
    if (best_margin <= tolerance) return best_value;
    return std::nullopt;
}

LogWeights gibbs_erm(const LossSpec& loss, double lambda, const LogWeights& prior,
                     const ExpertTable& experts, std::span<const Outcome> data) {
    if (prior.size() != experts.num_experts())
        throw std::invalid_argument("gibbs_erm: prior size mismatch");
    Eigen::VectorXd cum = Eigen::VectorXd::Zero(experts.num_experts());
    for (const Outcome& z : data) {
        const Eigen::VectorXd losses = expert_losses(loss, experts, z);
        for (int j = 0; j < cum.size(); ++j)
            cum(j) = losses(j) == kInf ? kInf : cum(j) + losses(j);
    }
    return gibbs_posterior(prior, cum, lambda);
}

double upper_bound_value(UpperBound bound, const BoundParams& p) {
    if (p.cardinality < 1) throw std::invalid_argument("upper_bound_value: empty reference set");
    if (p.n < 0) throw std::invalid_argument("upper_bound_value: negative sample size");
    const double logd = std::log(static_cast<double>(p.cardinality));
    switch (bound) {
        case UpperBound::zero_delta_oracle:
            if (!(p.lambda > 0.0))
                throw std::invalid_argument("upper_bound_value: lambda must be positive");
            return p.min_risk + logd / (p.lambda * (p.n + 1));
        case UpperBound::square_mixable:
            return 2.0 * p.B * p.B * logd / (p.n + 1);
        case UpperBound::hoeffding:
            return p.span * std::sqrt(logd / (2.0 * (p.n + 1)));
        case UpperBound::absolute_moment:
            return 2.0 * p.b * std::sqrt(2.0 * logd / (p.n + 1));
        case UpperBound::lq_mixable:
            if (!(p.q > 1.0)) throw std::invalid_argument("upper_bound_value: q must exceed 1");
            return p.q * std::min(1.0, std::pow(2.0, p.q - 2.0)) * std::pow(p.B, p.q) /
                   (p.q - 1.0) * std::log(2.0) * std::log2(static_cast<double>(p.cardinality)) /
                   p.n;
        case UpperBound::entropy_mixable:
            return logd / p.n;
        case UpperBound::bernstein_low_noise:
            return p.min_risk + 4.0 * p.c * logd / (p.n + 1);
    }
    throw std::invalid_argument("upper_bound_value: unknown setting");
}

double hoeffding_lambda(double span, int cardinality, long n) {
    if (!(span > 0.0)) throw std::invalid_argument("hoeffding_lambda: span must be positive");
    return std::sqrt(8.0 * std::log(static_cast<double>(cardinality)) /
                     (span * span * (n + 1)));
}

}  // namespace seqrand

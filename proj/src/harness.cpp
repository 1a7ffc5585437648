#include "seqrand/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace seqrand {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs body(t) for t in [0, count) across `threads` workers with a static
// partition; results must be written to disjoint slots to stay deterministic.
template <typename Body>
void parallel_for(int count, int threads, const Body& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int t = 0; t < count; ++t) body(t);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int t = w; t < count; t += threads) body(t);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() == 1) return values[0];
    if (values.size() == 2) return values[0] + values[1];
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.subspan(0, half)) + pairwise_sum(values.subspan(half));
}

MCResult summarize(std::span<const double> values, std::uint64_t master_seed) {
    if (values.size() < 2) throw std::invalid_argument("summarize: need at least two trials");
    MCResult out;
    out.trials = static_cast<int>(values.size());
    out.master_seed = master_seed;
    for (double v : values) {
        if (v == kInf) {
            out.mean = kInf;
            out.stderr_ = kInf;
            return out;
        }
    }
    out.mean = pairwise_sum(values) / out.trials;
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - out.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / (out.trials - 1);
    out.stderr_ = std::sqrt(var / out.trials);
    return out;
}

double exact_risk(const DiscreteDistribution& P, const LossSpec& loss, const ExpertTable& experts,
                  const Eigen::Ref<const Eigen::VectorXd>& cell_predictions) {
    if (cell_predictions.size() != experts.num_cells())
        throw std::invalid_argument("exact_risk: prediction vector does not cover the cells");
    double out = 0.0;
    for (const auto& a : P.support) {
        if (a.mass == 0.0) continue;
        out += a.mass * eval_loss(loss, a.y, cell_predictions(experts.cell_index(a.cell)));
    }
    return out;
}

double exact_expert_risk(const DiscreteDistribution& P, const LossSpec& loss,
                         const ExpertTable& experts, int expert) {
    return exact_risk(P, loss, experts, experts.predictions.row(expert).transpose());
}

double min_expert_risk(const DiscreteDistribution& P, const LossSpec& loss,
                       const ExpertTable& experts) {
    double best = kInf;
    for (int j = 0; j < experts.num_experts(); ++j)
        best = std::min(best, exact_expert_risk(P, loss, experts, j));
    return best;
}

HeavyTailGenerator::HeavyTailGenerator(ExpertTable experts, int target_expert, double s, double A,
                                       double b, std::uint64_t check_seed)
    : experts_(std::move(experts)), target_(target_expert), s_(s), A_(A), b_(b) {
    experts_.validate();
    if (target_ < 0 || target_ >= experts_.num_experts())
        throw std::invalid_argument("HeavyTailGenerator: target expert out of range");
    if (!(s_ >= 1.0 && A_ > 0.0 && b_ > 0.0))
        throw std::invalid_argument("HeavyTailGenerator: needs s >= 1, A > 0, b > 0");
    if (experts_.predictions.row(target_).cwiseAbs().maxCoeff() > b_)
        throw std::invalid_argument("HeavyTailGenerator: target exceeds the prediction bound");

    const double eps = 0.1;
    tail_index_ = s_ + eps;
    // s-th moment budget left for the noise once the regression part is paid,
    // with headroom so the empirical self-check clears A.
    const int K = experts_.num_cells();
    double regression_moment = 0.0;
    for (int k = 0; k < K; ++k)
        regression_moment += std::pow(std::abs(experts_.predictions(target_, k)), s_) / K;
    double budget;
    if (s_ == 2.0) {
        budget = 0.8 * A_ - regression_moment;  // exact cross-term cancellation
    } else {
        budget = 0.8 * A_ * std::pow(2.0, 1.0 - s_) - regression_moment;
    }
    if (!(budget > 0.0))
        throw std::invalid_argument("HeavyTailGenerator: moment budget too small for the scale");
    tail_mass_ = 0.25;
    // E|N|^s = tail_mass * cutoff^s * (s+eps)/eps
    cutoff_ = std::pow(budget * eps / (tail_mass_ * tail_index_), 1.0 / s_);

    SplitRng rng(derive_seed(check_seed, 0xc0de));
    const long draws = 1000000;
    double acc = 0.0;
    for (long i = 0; i < draws; ++i) {
        const Outcome z = draw(rng);
        acc += std::pow(std::abs(z.y), s_);
    }
    checked_moment_ = acc / draws;
    if (checked_moment_ > A_ * (1.0 + 5.0 / std::sqrt(static_cast<double>(draws))))
        throw std::runtime_error("HeavyTailGenerator: empirical moment exceeds the budget");
}

double HeavyTailGenerator::noise(SplitRng& rng) const {
    const double gate = rng.uniform();
    const double u = rng.uniform();
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    if (gate >= tail_mass_) return 0.0;
    const double mag = cutoff_ * std::pow(std::max(u, 1e-300), -1.0 / tail_index_);
    return sign * mag;
}

Outcome HeavyTailGenerator::draw(SplitRng& rng) const {
    int cell = static_cast<int>(rng.uniform() * experts_.num_cells());
    if (cell >= experts_.num_cells()) cell = experts_.num_cells() - 1;
    const double y = experts_.predictions(target_, cell) + noise(rng);
    return Outcome{cell, y};
}

double RiskModel::expert_risk(int j) const {
    return prediction_risk(experts().predictions.row(j).transpose());
}

double RiskModel::min_expert_risk() const {
    double best = kInf;
    for (int j = 0; j < experts().num_experts(); ++j) best = std::min(best, expert_risk(j));
    return best;
}

DiscreteRiskModel::DiscreteRiskModel(DiscreteDistribution P, LossSpec loss, ExpertTable experts)
    : P_(std::move(P)), loss_(std::move(loss)), experts_(std::move(experts)) {
    P_.validate();
    experts_.validate();
    atoms_.reserve(P_.support.size());
    masses_.reserve(P_.support.size());
    for (const auto& a : P_.support) {
        atoms_.push_back(Outcome{experts_.cell_index(a.cell), a.y});
        masses_.push_back(a.mass);
    }
}

double DiscreteRiskModel::prediction_risk(const Eigen::Ref<const Eigen::VectorXd>& preds) const {
    double out = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (masses_[i] == 0.0) continue;
        out += masses_[i] * eval_loss(loss_, atoms_[i].y, preds(atoms_[i].cell));
    }
    return out;
}

Outcome DiscreteRiskModel::draw(SplitRng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        acc += masses_[i];
        if (u < acc) return atoms_[i];
    }
    return atoms_.back();
}

HeavyTailRiskModel::HeavyTailRiskModel(const HeavyTailGenerator& gen, LossSpec loss,
                                       std::uint64_t quadrature_seed, long quadrature_draws)
    : gen_(gen), loss_(std::move(loss)) {
    const bool square_like =
        loss_.kind() == LossKind::square ||
        (loss_.kind() == LossKind::lq && loss_.exponent() == 2.0);
    if (!square_like)
        throw std::invalid_argument(
            "HeavyTailRiskModel: exact excess decomposition needs a square-power loss");
    SplitRng rng(derive_seed(quadrature_seed, 0x9d));
    double acc = 0.0;
    for (long i = 0; i < quadrature_draws; ++i) {
        const double t = gen_.noise(rng);
        acc += t * t;
    }
    noise_sq_ = acc / quadrature_draws;
}

double HeavyTailRiskModel::prediction_risk(const Eigen::Ref<const Eigen::VectorXd>& preds) const {
    // E (target(X) + N - pred(X))^2 = mean-square gap + E N^2 (noise symmetric)
    const auto& tbl = gen_.experts();
    const int K = tbl.num_cells();
    double gap = 0.0;
    for (int k = 0; k < K; ++k) {
        const double d = tbl.predictions(gen_.target_expert(), k) - preds(k);
        gap += d * d / K;
    }
    return gap + noise_sq_;
}

Outcome HeavyTailRiskModel::draw(SplitRng& rng) const { return gen_.draw(rng); }

std::string EstimatorSpec::name() const {
    switch (kind) {
        case EstimatorKind::seqrand: return "seqrand";
        case EstimatorKind::progressive_mixture: return "progressive_mixture";
        case EstimatorKind::gibbs_erm: return "gibbs_erm";
    }
    return "?";
}

double fitted_excess_risk(const RiskModel& model, const EstimatorSpec& spec,
                          std::span<const Outcome> data, double min_risk, SplitRng& rng) {
    const ExpertTable& experts = model.experts();
    const int K = experts.num_cells();
    switch (spec.kind) {
        case EstimatorKind::seqrand: {
            const FittedAggregate fitted = seqrand_fit(spec.config, experts, data, rng);
            const int slots = fitted.steps() + 1;
            if (spec.config.output_mode == OutputMode::uniform_draw) {
                // subtract per slot so a zero-excess run stays exactly zero
                double acc = 0.0;
                for (int i = 0; i < slots; ++i) {
                    const int mark = fitted.drawn[static_cast<std::size_t>(i)];
                    if (mark >= 0) {
                        acc += model.expert_risk(mark) - min_risk;
                    } else {
                        Eigen::VectorXd preds(K);
                        for (int k = 0; k < K; ++k)
                            preds(k) = slot_prediction(fitted, spec.config, experts, i, k);
                        acc += model.prediction_risk(preds) - min_risk;
                    }
                }
                return acc / slots;
            }
            Eigen::VectorXd preds = Eigen::VectorXd::Zero(K);
            SplitRng scratch = rng.split(0x3e);
            for (int k = 0; k < K; ++k)
                preds(k) = seqrand_predict(fitted, spec.config, experts, k, scratch);
            return model.prediction_risk(preds) - min_risk;
        }
        case EstimatorKind::progressive_mixture: {
            const ProgressiveMixture pm = progressive_mixture(
                spec.config.loss, spec.config.lambda, spec.config.prior, experts, data);
            if (spec.config.output_mode == OutputMode::uniform_draw) {
                double acc = 0.0;
                Eigen::VectorXd preds(K);
                for (const LogWeights& w : pm.trajectory) {
                    for (int k = 0; k < K; ++k) preds(k) = mixture_prediction(w, experts, k);
                    acc += model.prediction_risk(preds) - min_risk;
                }
                return acc / static_cast<double>(pm.trajectory.size());
            }
            return model.prediction_risk(pm.cell_average) - min_risk;
        }
        case EstimatorKind::gibbs_erm: {
            const LogWeights w = gibbs_erm(spec.config.loss, spec.config.lambda,
                                           spec.config.prior, experts, data);
            double acc = 0.0;
            for (int j = 0; j < w.size(); ++j) {
                const double m = w.mass(j);
                if (m > 0.0) acc += m * model.expert_risk(j);
            }
            return acc - min_risk;
        }
    }
    throw std::logic_error("fitted_excess_risk: unreachable");
}

MCResult excess_risk_mc(const RiskModel& model, const EstimatorSpec& spec, int n, int trials,
                        std::uint64_t master_seed, int threads) {
    if (trials < 2) throw std::invalid_argument("excess_risk_mc: need at least two trials");
    const double min_risk = model.min_expert_risk();
    std::vector<double> values(static_cast<std::size_t>(trials));
    parallel_for(trials, threads, [&](int t) {
        SplitRng rng(derive_seed(master_seed, static_cast<std::uint64_t>(t)));
        SplitRng data_rng = rng.split(0);
        SplitRng fit_rng = rng.split(1);
        std::vector<Outcome> data(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) data[static_cast<std::size_t>(i)] = model.draw(data_rng);
        values[static_cast<std::size_t>(t)] =
            fitted_excess_risk(model, spec, data, min_risk, fit_rng);
    });
    return summarize(values, master_seed);
}

bool VertexFloor::clears(int estimator, double bound) const {
    const auto& row = per_vertex[static_cast<std::size_t>(estimator)];
    const MCResult& best = row[static_cast<std::size_t>(argmax[static_cast<std::size_t>(estimator)])];
    if (best.mean == kInf) return true;
    return best.mean >= bound - 3.0 * best.stderr_;
}

double VertexFloor::max_mean(int estimator) const {
    const auto& row = per_vertex[static_cast<std::size_t>(estimator)];
    return row[static_cast<std::size_t>(argmax[static_cast<std::size_t>(estimator)])].mean;
}

VertexFloor minimax_floor_mc(const Hypercube& hc, const ExpertTable& experts,
                             std::span<const EstimatorSpec> estimators, int n, int trials,
                             std::uint64_t master_seed, int threads) {
    hc.validate();
    if (hc.m > 8) throw std::invalid_argument("minimax_floor_mc: vertex enumeration needs m <= 8");
    const int vertices = 1 << hc.m;
    VertexFloor out;
    out.per_vertex.resize(estimators.size());
    out.argmax.assign(estimators.size(), 0);
    for (std::size_t e = 0; e < estimators.size(); ++e) {
        auto& row = out.per_vertex[e];
        row.reserve(static_cast<std::size_t>(vertices));
        for (int v = 0; v < vertices; ++v) {
            std::vector<int> signs(static_cast<std::size_t>(hc.m));
            for (int j = 0; j < hc.m; ++j) signs[static_cast<std::size_t>(j)] = (v >> j) & 1 ? 1 : -1;
            const DiscreteDistribution P = hypercube_vertex_distribution(hc, signs);
            const DiscreteRiskModel model(P, hc.loss, experts);
            const std::uint64_t seed =
                derive_seed(master_seed, e * static_cast<std::size_t>(vertices) + v);
            row.push_back(excess_risk_mc(model, estimators[e], n, trials, seed, threads));
            const MCResult& cur = row.back();
            const MCResult& best = row[static_cast<std::size_t>(out.argmax[e])];
            if (cur.mean > best.mean) out.argmax[e] = v;
        }
    }
    return out;
}

RateFit rate_fit(std::span<const std::pair<long, double>> curve, double log_card) {
    if (!(log_card > 0.0)) throw std::invalid_argument("rate_fit: log cardinality must be positive");
    RateFit out;
    std::vector<double> xs, ys;
    for (const auto& [n, excess] : curve) {
        if (!(excess > 0.0)) {
            ++out.dropped;
            continue;
        }
        xs.push_back(std::log(log_card) - std::log(static_cast<double>(n)));
        ys.push_back(std::log(excess));
    }
    if (xs.size() < 4) throw std::invalid_argument("rate_fit: need at least four usable points");
    const double xm = pairwise_sum(xs) / xs.size();
    const double ym = pairwise_sum(ys) / ys.size();
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - xm) * (xs[i] - xm);
        sxy += (xs[i] - xm) * (ys[i] - ym);
    }
    out.exponent = sxy / sxx;
    out.log_constant = ym - out.exponent * xm;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - out.log_constant - out.exponent * xs[i];
        rss += r * r;
    }
    out.residual = std::sqrt(rss / xs.size());
    return out;
}

std::vector<BoundReportRow> bound_report(std::span<const BoundReportEntry> entries,
                                         std::uint64_t master_seed, int threads) {
    std::vector<BoundReportRow> rows;
    rows.reserve(entries.size());
    std::uint64_t idx = 0;
    for (const auto& entry : entries) {
        BoundReportRow row;
        row.setting = entry.setting;
        row.n = entry.n;
        row.matched = entry.matched;
        const CharacteristicSimilarity sim(entry.hc);
        row.lower_exact = product_similarity(sim, entry.hc, entry.n);
        row.lower_closed = assouad_bound_closed(entry.hc, entry.n, AssouadVariant::tight);
        if (entry.hc.p_plus == 1.0 && entry.hc.p_minus == 0.0)
            row.lower_closed = std::max(
                row.lower_closed,
                assouad_bound_closed(entry.hc, entry.n, AssouadVariant::deterministic));
        row.upper = upper_bound_value(entry.upper, entry.upper_params);

        ExpertTable experts;
        if (entry.upper_params.cardinality == 1) {
            // a one-function reference set admits no two-point separation and
            // its excess is identically zero
            const Hypercube& hc = entry.hc;
            experts.cells.reserve(static_cast<std::size_t>(hc.m) + 1);
            for (int k = 0; k <= hc.m; ++k) experts.cells.push_back("X" + std::to_string(k));
            experts.predictions = Eigen::MatrixXd::Constant(
                1, hc.m + 1, best_constant(hc.loss, hc.p_minus, hc.h1, hc.h2));
            row.lower_exact = 0.0;
            row.lower_closed = 0.0;
        } else {
            experts = pattern_expert_set(entry.hc, entry.upper_params.cardinality);
        }
        const std::vector<EstimatorSpec> specs{entry.estimator};
        const VertexFloor floor = minimax_floor_mc(entry.hc, experts, specs, entry.n,
                                                   entry.trials, derive_seed(master_seed, idx++),
                                                   threads);
        const MCResult& worst =
            floor.per_vertex[0][static_cast<std::size_t>(floor.argmax[0])];
        row.empirical = worst.mean;
        row.empirical_stderr = worst.stderr_;
        if (entry.matched) {
            const double tol = 1e-9;
            row.ok = row.lower_closed <= row.lower_exact + tol &&
                     row.lower_exact <= row.empirical + 3.0 * row.empirical_stderr &&
                     row.empirical <= row.upper + 3.0 * row.empirical_stderr;
        } else {
            row.ok = false;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace seqrand

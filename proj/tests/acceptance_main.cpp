// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "seqrand/harness.hpp"
#include "seqrand/io.hpp"

using namespace seqrand;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Check {
    bool ok = true;
    std::ostringstream note;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            note << (note.str().empty() ? "" : "; ") << what;
        }
    }
};

Eigen::VectorXd random_vector(SplitRng& rng, int d, double scale) {
    Eigen::VectorXd v(d);
    for (int j = 0; j < d; ++j) v(j) = scale * (2.0 * rng.uniform() - 1.0);
    return v;
}

// ---- criterion 1: duality identity ------------------------------------------------

bool duality_identity(Check& c) {
    SplitRng rng(1001);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int d = 2 + static_cast<int>(rng.uniform() * 63);
        const LogWeights pi = LogWeights::normalized(random_vector(rng, d, 2.0));
        const Eigen::VectorXd h = random_vector(rng, d, 50.0);
        worst = std::max(worst, std::abs(duality_gap(pi, h)));
    }
    c.expect(worst <= 1e-9, "max duality gap " + format_double(worst));
    return c.ok;
}

// ---- criterion 2: mixability -------------------------------------------------------

bool mixability_constants(Check& c) {
    const double two = numeric_eta_infimum(LossSpec::power(2.0, 1.0), 1.0, 10000);
    c.expect(std::abs(two - 0.5) <= 1e-3, "numeric infimum at q=2: " + format_double(two));
    for (double q : {1.5, 2.0}) {
        const double closed = *mixability_eta_max(LossSpec::power(q, 1.0));
        const double numeric = numeric_eta_infimum(LossSpec::power(q, 1.0), 1.0, 10000);
        c.expect(std::abs(numeric - closed) / closed <= 1e-3,
                 "closed/numeric mismatch at q=" + format_double(q));
    }
    const double three = numeric_eta_infimum(LossSpec::power(3.0, 1.0), 1.0, 10000);
    c.expect(three >= 1.0 / 3.0 - 1e-12, "q=3 infimum below the closed lower choice");
    return c.ok;
}

// ---- criterion 3: variance-inequality certificates ---------------------------------

bool variance_certificates(Check& c) {
    const LossSpec sq = LossSpec::square(1.0);
    ExpertTable experts;
    experts.cells = {"X0"};
    experts.predictions.resize(2, 1);
    experts.predictions << -1.0, 1.0;

    std::vector<Outcome> zs;
    for (int a = 0; a < 100; ++a) zs.push_back({0, -1.0 + 2.0 * a / 99.0});
    double worst = -kInf;
    for (int i = 1; i <= 100; ++i) {
        Eigen::VectorXd raw(2);
        raw << std::log(i / 101.0), std::log1p(-i / 101.0);
        worst = std::max(worst, verify_variance_inequality(sq, 1.0 / 8.0, VarianceFn::zero(),
                                                           experts, LogWeights::normalized(raw),
                                                           zs)
                                    .max_value);
    }
    c.expect(worst <= 1e-12, "mixture certificate leaked " + format_double(worst));

    const std::vector<LossSpec> specs{LossSpec::square(2.0), LossSpec::power(1.5, 2.0),
                                      LossSpec::absolute(Interval{-2.0, 2.0})};
    SplitRng rng(3003);
    double worst_bern = -kInf;
    for (int rep = 0; rep < 10000; ++rep) {
        const LossSpec& loss = specs[static_cast<std::size_t>(rep % 3)];
        const int d = 2 + static_cast<int>(rng.uniform() * 6);
        ExpertTable t;
        t.cells = {"X0"};
        t.predictions.resize(d, 1);
        for (int j = 0; j < d; ++j) t.predictions(j, 0) = 2.0 * (2.0 * rng.uniform() - 1.0);
        const std::vector<Outcome> z{{0, 2.0 * (2.0 * rng.uniform() - 1.0)}};
        const double lambda = 0.05 + 2.0 * rng.uniform();
        const LogWeights rho = LogWeights::normalized(random_vector(rng, d, 3.0));
        worst_bern = std::max(
            worst_bern,
            verify_variance_inequality(loss, lambda, VarianceFn::bernstein(), t, rho, z)
                .max_value);
    }
    c.expect(worst_bern <= 1e-10,
             "squared-difference certificate leaked " + format_double(worst_bern));

    std::vector<Outcome> fine;
    for (int a = 0; a < 201; ++a) fine.push_back({0, -1.0 + 2.0 * a / 200.0});
    const VarianceCheck hot = verify_variance_inequality(sq, 1.0, VarianceFn::zero(), experts,
                                                         LogWeights::uniform(2), fine);
    c.expect(hot.max_value > 1e-6, "expected a violation at the hot temperature");
    // the witness sits where the mixture is weakest, near the output extremes
    c.expect(std::abs(hot.witness.y) > 0.5,
             "violation witness not located at an extreme output");
    c.note << "violation " << format_double(hot.max_value) << " at y="
           << format_double(hot.witness.y);
    return c.ok;
}

// ---- criterion 4: telescoping ------------------------------------------------------

bool telescoping(Check& c) {
    SplitRng mk(4004);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + static_cast<int>(mk.uniform() * 31);
        const int n = 1 + static_cast<int>(mk.uniform() * 200);
        ExpertTable t;
        t.cells = {"X0", "X1"};
        t.predictions.resize(d, 2);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < 2; ++k) t.predictions(j, k) = 2.0 * mk.uniform() - 1.0;
        std::vector<Outcome> data;
        for (int i = 0; i < n; ++i)
            data.push_back({static_cast<int>(mk.uniform() * 2) % 2, 2.0 * mk.uniform() - 1.0});
        EstimatorConfig cfg;
        cfg.loss = LossSpec::square(1.0);
        cfg.prior = LogWeights::uniform(d);
        switch (rep % 3) {
            case 0:
                cfg.variance = VarianceFn::bernstein();
                cfg.lambda = 0.05 + mk.uniform();
                break;
            case 1:
                cfg.variance = VarianceFn::hoeffding_const(4.0);
                cfg.lambda = 0.05 + mk.uniform();
                break;
            default:
                cfg.variance = VarianceFn::zero();
                cfg.lambda = 0.5 * (0.1 + 0.9 * mk.uniform());
                break;
        }
        SplitRng rng(mk.next_u64());
        const FittedAggregate fit = seqrand_fit(cfg, t, data, rng);
        for (int i = 0; i <= n; ++i) {
            Eigen::VectorXd v =
                cfg.prior.log_masses() - cfg.lambda * fit.score_table.row(i).transpose();
            worst = std::max(worst, std::abs(fit.log_partitions(i) - log_sum_exp(v)));
        }
    }
    c.expect(worst <= 1e-9, "worst partition drift " + format_double(worst));
    return c.ok;
}

// ---- shared hypercube fixtures ------------------------------------------------------

Hypercube square_cube() {
    Hypercube hc;
    hc.m = 3;
    hc.w = 1.0 / 3.0;
    hc.p_plus = 0.9;
    hc.p_minus = 0.1;
    hc.h1 = -1.0;
    hc.h2 = 1.0;
    hc.loss = LossSpec::square(1.0);
    return hc;
}

// ---- criterion 5: square-loss oracle bound -----------------------------------------

bool square_upper_bound(Check& c) {
    const Hypercube hc = square_cube();
    const ExpertTable experts = pattern_expert_set(hc, 10);
    const std::vector<int> signs{1, -1, 1};
    const DiscreteRiskModel model(hypercube_vertex_distribution(hc, signs), hc.loss, experts);

    EstimatorSpec spec;
    spec.kind = EstimatorKind::progressive_mixture;
    spec.config.loss = hc.loss;
    spec.config.lambda = 0.5;
    spec.config.prior = LogWeights::uniform(10);
    spec.config.output_mode = OutputMode::uniform_draw;

    const MCResult res = excess_risk_mc(model, spec, 100, 2000, 5005);
    BoundParams p;
    p.cardinality = 10;
    p.n = 100;
    p.B = 1.0;
    const double bound = upper_bound_value(UpperBound::square_mixable, p);
    c.note << "excess " << format_double(res.mean) << " +- " << format_double(res.stderr_)
           << " vs bound " << format_double(bound);
    c.expect(res.mean <= bound + 3.0 * res.stderr_, "excess exceeds the oracle bound");
    return c.ok;
}

// ---- criterion 6: constant-compensation bound --------------------------------------

bool hoeffding_upper_bound(Check& c) {
    Hypercube hc;
    hc.m = 4;
    hc.w = 0.25;
    hc.p_plus = 0.75;
    hc.p_minus = 0.25;
    hc.h1 = 0.0;
    hc.h2 = 1.0;
    hc.loss = LossSpec::zero_one();
    const ExpertTable experts = pattern_expert_set(hc, 16);
    const std::vector<int> signs{1, -1, -1, 1};
    const DiscreteRiskModel model(hypercube_vertex_distribution(hc, signs), hc.loss, experts);

    EstimatorSpec spec;
    spec.kind = EstimatorKind::seqrand;
    spec.config.loss = hc.loss;
    spec.config.lambda = hoeffding_lambda(1.0, 16, 31);
    spec.config.prior = LogWeights::uniform(16);
    spec.config.variance = VarianceFn::hoeffding_const(1.0);
    spec.config.output_mode = OutputMode::uniform_draw;

    const MCResult res = excess_risk_mc(model, spec, 31, 2000, 6006);
    BoundParams p;
    p.cardinality = 16;
    p.n = 31;
    p.span = 1.0;
    const double bound = upper_bound_value(UpperBound::hoeffding, p);
    c.note << "excess " << format_double(res.mean) << " +- " << format_double(res.stderr_)
           << " vs bound " << format_double(bound);
    c.expect(res.mean <= bound + 3.0 * res.stderr_, "excess exceeds the bounded-loss bound");
    return c.ok;
}

// ---- criterion 7: online-to-batch identity -----------------------------------------

// Exhaustive expectation over all data words (and draw paths where the
// compensation depends on the drawn candidate).
bool online_to_batch_identity(Check& c) {
    const LossSpec sq = LossSpec::square(1.0);
    ExpertTable experts;
    experts.cells = {"X0"};
    experts.predictions.resize(2, 1);
    experts.predictions << -0.4, 0.7;
    DiscreteDistribution P;
    P.support = {{"X0", -1.0, 0.6}, {"X0", 1.0, 0.4}};
    const double lambda = 0.5;
    const LogWeights prior = LogWeights::uniform(2);

    const auto risks = [&] {
        Eigen::VectorXd r(2);
        for (int j = 0; j < 2; ++j) r(j) = exact_expert_risk(P, sq, experts, j);
        return r;
    }();

    // mixture posterior map, no compensation: draws never feed back, so the
    // shipped batch and online passes can be driven word by word
    const DiscreteRiskModel model(P, sq, experts);
    EstimatorConfig cfg;
    cfg.loss = sq;
    cfg.lambda = lambda;
    cfg.prior = prior;
    cfg.variance = VarianceFn::zero();
    EstimatorSpec batch_spec{EstimatorKind::progressive_mixture, cfg};
    batch_spec.config.output_mode = OutputMode::uniform_draw;
    for (int n = 0; n <= 6; ++n) {
        double batch = 0.0, online = 0.0;
        std::vector<int> word(static_cast<std::size_t>(n + 1), 0);
        while (true) {
            double prob = 1.0;
            std::vector<Outcome> data;
            for (int i = 0; i <= n; ++i) {
                const auto& a = P.support[static_cast<std::size_t>(word[static_cast<std::size_t>(i)])];
                prob *= a.mass;
                data.push_back({0, a.y});
            }
            SplitRng rng(1);  // mixture map consumes no randomness
            batch += prob * fitted_excess_risk(
                                model, batch_spec,
                                std::span<const Outcome>(data.data(), static_cast<std::size_t>(n)),
                                0.0, rng);
            online += prob * online_seqrand(cfg, experts, data, rng).cumulative_loss;
            int pos = 0;
            while (pos <= n && ++word[static_cast<std::size_t>(pos)] ==
                                   static_cast<int>(P.support.size())) {
                word[static_cast<std::size_t>(pos)] = 0;
                ++pos;
            }
            if (pos == n + 1) break;
        }
        c.expect(std::abs(batch - online / (n + 1)) <= 1e-10,
                 "mixture-map identity drift at n=" + std::to_string(n));
    }

    // drawn-candidate compensation: enumerate draw paths too
    {
        const int n = 4;
        struct Node {
            Eigen::VectorXd scores;
            int drawn;
            double prob;
        };
        const VarianceFn bern = VarianceFn::bernstein();
        double batch = 0.0, online = 0.0;
        std::vector<Node> frontier;
        for (int g0 = 0; g0 < 2; ++g0)
            frontier.push_back({Eigen::VectorXd::Zero(2), g0, 0.5});
        for (const auto& node : frontier) {
            batch += node.prob * risks(node.drawn) / (n + 1);
            online += node.prob * risks(node.drawn);
        }
        for (int step = 1; step <= n; ++step) {
            std::vector<Node> next;
            for (const auto& node : frontier) {
                for (const auto& a : P.support) {
                    const Outcome z{0, a.y};
                    const Eigen::VectorXd losses = expert_losses(sq, experts, z);
                    Eigen::VectorXd scores = node.scores;
                    for (int j = 0; j < 2; ++j)
                        scores(j) += losses(j) + variance_delta(bern, lambda, sq, z.y, losses(j),
                                                                losses(node.drawn));
                    const LogWeights post = gibbs_posterior(prior, scores, lambda);
                    for (int g = 0; g < 2; ++g) {
                        const double prob = node.prob * a.mass * post.mass(g);
                        if (prob == 0.0) continue;
                        next.push_back({scores, g, prob});
                        batch += prob * risks(g) / (n + 1);
                    }
                }
            }
            frontier = std::move(next);
            for (const auto& node : frontier) online += node.prob * risks(node.drawn);
        }
        c.expect(std::abs(batch - online / (n + 1)) <= 1e-10,
                 "drawn-candidate identity drift");
    }
    return c.ok;
}

// ---- criterion 8: similarity oracles -----------------------------------------------

bool similarity_oracles(Check& c) {
    const HellingerSimilarity hell;
    const MinSimilarity tv;
    double worst = 0.0;
    for (auto [pp, pm] :
         std::vector<std::pair<double, double>>{{0.75, 0.25}, {0.9, 0.4}, {0.55, 0.1}}) {
        const double base = two_point_similarity(hell, pp, pm, 1);
        double power = 1.0;
        for (int k = 1; k <= 20; ++k) {
            power *= base;
            worst = std::max(worst, std::abs(two_point_similarity(hell, pp, pm, k) - power));
        }
    }
    c.expect(worst <= 1e-12, "tensorization drift " + format_double(worst));

    int grid_points = 0;
    for (double pp : {0.55, 0.65, 0.75, 0.85, 0.95, 1.0})
        for (double pm : {0.0, 0.05, 0.15, 0.25, 0.35, 0.45})
            for (int k = 0; k <= 20; ++k) {
                if (pm >= pp) continue;
                ++grid_points;
                const double dii =
                    std::pow(std::sqrt(pp * (1 - pm)) - std::sqrt((1 - pp) * pm), 2.0);
                const double floor = 1.0 - std::sqrt(1.0 - std::pow(1.0 - dii, k));
                if (two_point_similarity(tv, pp, pm, k) < floor - 1e-12)
                    c.expect(false, "two-point floor violated");
            }
    c.expect(grid_points >= 600, "grid too small");

    for (double pp : {0.65, 0.8, 0.95})
        for (double pm : {0.05, 0.2, 0.35})
            for (double w : {0.25, 0.6, 1.0})
                for (int n : {1, 3, 9, 27}) {
                    Hypercube hc;
                    hc.m = 1;
                    hc.w = w;
                    hc.p_plus = pp;
                    hc.p_minus = pm;
                    hc.h1 = 0.0;
                    hc.h2 = 1.0;
                    hc.loss = LossSpec::zero_one();
                    const double dii = edge_discrepancy_ii(hc);
                    const double sim = product_similarity(tv, hc, n);
                    const double floor = 1.0 - std::sqrt(1.0 - std::pow(1.0 - dii, n * w));
                    if (sim < floor - 1e-12) c.expect(false, "product floor violated");
                }

    Hypercube pivot;
    pivot.m = 1;
    pivot.w = 1.0;
    pivot.p_plus = 0.75;
    pivot.p_minus = 0.25;
    pivot.h1 = 0.0;
    pivot.h2 = 1.0;
    pivot.loss = LossSpec::zero_one();
    const double sim = product_similarity(tv, pivot, 1);
    const double floor =
        1.0 - std::sqrt(1.0 - std::pow(1.0 - edge_discrepancy_ii(pivot), 1.0));
    c.expect(std::abs(sim - 0.5) <= 1e-15, "pivot similarity is not one half");
    c.expect(std::abs(floor - 0.5) <= 1e-15, "pivot floor is not one half");
    return c.ok;
}

// ---- criterion 9: closed-form floors match the exact similarity ---------------------

bool assouad_exactness(Check& c) {
    Hypercube hc;
    hc.m = 1;
    hc.w = 1.0;
    hc.p_plus = 0.75;
    hc.p_minus = 0.25;
    hc.h1 = 0.0;
    hc.h2 = 1.0;
    hc.loss = LossSpec::zero_one();
    const CharacteristicSimilarity psi(hc);
    const double exact = product_similarity(psi, hc, 1);
    const double closed = assouad_bound_closed(hc, 1, AssouadVariant::tight);
    c.expect(std::abs(exact - 0.125) <= 1e-15, "exact similarity is not 1/8");
    c.expect(std::abs(closed - 0.125) <= 1e-15, "closed floor is not 1/8");

    for (int m : {1, 2, 4})
        for (double w : {0.1, 0.2})
            for (int n : {0, 1, 5, 12}) {
                Hypercube det;
                det.m = m;
                det.w = w;
                det.p_plus = 1.0;
                det.p_minus = 0.0;
                det.h1 = 0.0;
                det.h2 = 1.0;
                det.loss = LossSpec::entropy();
                const CharacteristicSimilarity f(det);
                const double lhs = product_similarity(f, det, n);
                const double rhs = assouad_bound_closed(det, n, AssouadVariant::deterministic);
                if (std::abs(lhs - rhs) > 1e-12)
                    c.expect(false, "deterministic similarity mismatch at m=" +
                                        std::to_string(m));
            }
    return c.ok;
}

// ---- criterion 10: minimax floor ----------------------------------------------------

bool minimax_floor(Check& c) {
    const HypercubePreset preset = [&] {
        PresetParams p;
        p.cardinality = 4;
        p.n = 7;
        return preset_hypercube("entropy_deterministic", p);
    }();
    const ExpertTable experts = pattern_expert_set(preset.hc, 4);

    EstimatorSpec seq;
    seq.kind = EstimatorKind::seqrand;
    seq.config.loss = preset.hc.loss;
    seq.config.lambda = 1.0;
    seq.config.prior = LogWeights::uniform(4);
    seq.config.variance = VarianceFn::zero();
    seq.config.output_mode = OutputMode::uniform_draw;

    EstimatorSpec erm;
    erm.kind = EstimatorKind::gibbs_erm;
    erm.config.loss = preset.hc.loss;
    erm.config.lambda = 1.0;
    erm.config.prior = LogWeights::uniform(4);

    const std::vector<EstimatorSpec> specs{seq, erm};
    const VertexFloor floor = minimax_floor_mc(preset.hc, experts, specs, 7, 5000, 1010);
    for (int e = 0; e < 2; ++e) {
        c.note << (e ? "; " : "") << specs[static_cast<std::size_t>(e)].name() << " max "
               << format_double(floor.max_mean(e));
        c.expect(floor.clears(e, preset.bound),
                 specs[static_cast<std::size_t>(e)].name() + " fell below the floor " +
                     format_double(preset.bound));
    }
    c.note << " vs floor " << format_double(preset.bound);
    return c.ok;
}

// ---- criterion 11: heavy-tail rate band ---------------------------------------------

bool heavy_tail_rate(Check& c) {
    ExpertTable experts;
    experts.cells = {"X0", "X1", "X2"};
    experts.predictions.resize(8, 3);
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 3; ++k)
            experts.predictions(j, k) = (j >> k) & 1 ? 0.5 : -0.5;
    const HeavyTailGenerator gen(experts, 7, 2.0, 4.0, 1.0, 1111);
    const LossSpec loss =
        LossSpec::power(2.0, Interval{-kInf, kInf}, Interval{-1.0, 1.0});
    const HeavyTailRiskModel model(gen, loss, 1112);

    const double logd = std::log(8.0);
    std::vector<std::pair<long, double>> curve;
    std::vector<double> errs;
    for (int e = 7; e <= 13; ++e) {
        const long n = 1L << e;
        EstimatorSpec spec;
        spec.kind = EstimatorKind::progressive_mixture;
        spec.config.loss = loss;
        spec.config.lambda = 0.5 * std::sqrt(logd / static_cast<double>(n));
        spec.config.prior = LogWeights::uniform(8);
        spec.config.output_mode = OutputMode::uniform_draw;
        const MCResult res =
            excess_risk_mc(model, spec, static_cast<int>(n), 500,
                           derive_seed(1113, static_cast<std::uint64_t>(e)));
        curve.emplace_back(n, res.mean);
        errs.push_back(res.stderr_);
        c.note << (curve.size() > 1 ? " " : "") << "n=" << n << ":"
               << format_double(res.mean);
    }
    const RateFit fit = rate_fit(curve, logd);
    c.note << " slope " << format_double(fit.exponent);
    c.expect(fit.exponent >= 0.25 && fit.exponent <= 1.0,
             "slope " + format_double(fit.exponent) + " outside [0.25, 1]");
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double slack = 2.0 * (errs[i] + errs[i - 1]);
        c.expect(curve[i].second <= curve[i - 1].second + slack,
                 "excess not monotone at n=" + std::to_string(curve[i].first));
    }
    return c.ok;
}

// ---- criterion 12: risk-curve oracle equivalence ------------------------------------

bool risk_curve_oracles(Check& c) {
    const std::vector<LossSpec> specs{LossSpec::power(1.5, 1.0), LossSpec::square(1.0),
                                      LossSpec::power(3.0, 1.0), LossSpec::entropy(),
                                      LossSpec::zero_one()};
    for (const auto& loss : specs) {
        const bool unit = loss.kind() == LossKind::entropy || loss.kind() == LossKind::zero_one;
        const double h1 = unit ? 0.0 : -1.0;
        for (int pi = 1; pi <= 33; ++pi) {
            const double p = pi / 34.0;
            const double closed = best_constant_risk(loss, p, h1, 1.0);
            double grid = kInf;
            const double lo = h1;
            for (int i = 0; i <= 100000; ++i) {
                double y = lo + (1.0 - lo) * i / 100000.0;
                if (loss.kind() == LossKind::entropy)
                    y = std::min(std::max(y, 1e-12), 1.0 - 1e-12);
                grid = std::min(grid, constant_prediction_risk(loss, p, h1, 1.0, y));
            }
            if (std::abs(closed - grid) > 1e-6) {
                c.expect(false, loss.kind_name() + " drift at p=" + format_double(p));
                break;
            }
        }
    }

    for (double q : {1.5, 2.0, 3.0}) {
        Hypercube hc;
        hc.m = 1;
        hc.w = 1.0;
        hc.p_plus = 0.75;
        hc.p_minus = 0.25;
        hc.h1 = -1.0;
        hc.h2 = 1.0;
        hc.loss = LossSpec::power(q, 1.0);
        const int steps = 40000;
        double integral = 0.0;
        for (int i = 0; i < steps; ++i) {
            const double t = (i + 0.5) / steps;
            const double p = t * hc.p_plus + (1.0 - t) * hc.p_minus;
            integral += std::min(t, 1.0 - t) *
                        std::abs(best_constant_risk_dd(hc.loss, p, hc.h1, hc.h2)) / steps;
        }
        const double quadrature = 0.5 * std::pow(hc.p_plus - hc.p_minus, 2.0) * integral;
        c.expect(std::abs(edge_discrepancy_i(hc) - quadrature) <= 1e-4,
                 "integral form drift at q=" + format_double(q));
    }
    return c.ok;
}

// ---- criterion 13: CLI determinism ---------------------------------------------------

struct CliFixture {
    std::filesystem::path dir;
    std::string binary;
};

std::string run_cli(const CliFixture& fx, const std::string& args,
                    const std::string& out_name) {
    const std::string out = (fx.dir / out_name).string();
    const std::string cmd = fx.binary + " " + args + " --out " + out + " >" +
                            (fx.dir / "stdout.log").string() + " 2>" +
                            (fx.dir / "stderr.log").string();
    const int rc = std::system(cmd.c_str());
    if (rc != 0) return "";
    std::ifstream in(out, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

bool cli_determinism(Check& c) {
    const char* cli = std::getenv("SEQRAND_CLI");
    if (!cli) {
        c.expect(false, "SEQRAND_CLI not set");
        return false;
    }
    CliFixture fx;
    fx.binary = cli;
    fx.dir = std::filesystem::temp_directory_path() / "seqrand_acceptance";
    std::filesystem::create_directories(fx.dir);

    {
        std::ofstream f(fx.dir / "mix.json");
        f << R"({"losses":[{"kind":"square","y_lo":-1,"y_hi":1},)"
          << R"({"kind":"lq","q":2,"y_lo":-1,"y_hi":1,"grid_size":10000},)"
          << R"({"kind":"absolute","y_lo":-1,"y_hi":1}]})";
    }
    {
        std::ofstream f(fx.dir / "var.json");
        f << R"({"loss":{"kind":"square","y_lo":-1,"y_hi":1},"lambda":0.125,)"
          << R"("variance":{"kind":"zero","pi_hat":"dirac_mixture"},)"
          << R"("experts":{"cells":["X0"],"predictions":[[-1.0],[1.0]]},)"
          << R"("rho_grid_size":25,"y_grid_size":40,"tolerance":1e-12})";
    }
    {
        std::ofstream f(fx.dir / "run.json");
        f << R"({"mode":"excess","setting":"square_demo",)"
          << R"("data":{"hypercube":{"m":2,"w":0.5,"p_plus":0.9,"p_minus":0.1,)"
          << R"("h1":-1.0,"h2":1.0,"loss":{"kind":"square","y_lo":-1,"y_hi":1}},)"
          << R"("vertex":[1,-1]},"pattern_experts":{"cardinality":4},)"
          << R"("estimator":{"kind":"progressive_mixture","lambda":0.5,)"
          << R"("loss":{"kind":"square","y_lo":-1,"y_hi":1},"output_mode":"uniform_draw"},)"
          << R"("n":15,"trials":48})";
    }
    {
        std::ofstream f(fx.dir / "low.json");
        f << R"({"settings":[{"name":"entropy_deterministic","cardinality":4,"n":7},)"
          << R"({"name":"vc_sqrt","vc_dim":4,"n":64},)"
          << R"({"setting":"pivot","n":1,"hypercube":{"m":1,"w":1.0,"p_plus":0.75,)"
          << R"("p_minus":0.25,"h1":0.0,"h2":1.0,"loss":{"kind":"zero_one"}}}]})";
    }

    const std::string mix_args =
        "mixability --config " + (fx.dir / "mix.json").string() + " --seed 7 --format csv";
    const std::string var_args =
        "variance-check --config " + (fx.dir / "var.json").string() + " --seed 7 --format csv";
    const std::string low_args =
        "lower-bound --config " + (fx.dir / "low.json").string() + " --seed 7 --format json";
    const std::string run1 =
        "run --config " + (fx.dir / "run.json").string() + " --seed 19 --threads 1";
    const std::string run4 =
        "run --config " + (fx.dir / "run.json").string() + " --seed 19 --threads 4";

    const auto twice_equal = [&](const std::string& args, const std::string& name) {
        const std::string a = run_cli(fx, args, name + "_a.out");
        const std::string b = run_cli(fx, args, name + "_b.out");
        c.expect(!a.empty(), name + " run failed");
        c.expect(a == b, name + " output differs across runs");
        return a;
    };
    twice_equal(mix_args, "mix");
    twice_equal(var_args, "var");
    twice_equal(low_args, "low");
    const std::string serial = twice_equal(run1, "run1");
    const std::string threaded = twice_equal(run4, "run4");
    c.expect(!serial.empty() && serial == threaded, "run output differs across thread counts");
    return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int id;
        std::string label;
        std::function<bool(Check&)> run;
    };
    const std::vector<Criterion> criteria{
        {1, "duality identity", duality_identity},
        {2, "mixability constants", mixability_constants},
        {3, "variance-inequality certificates", variance_certificates},
        {4, "telescoping partitions", telescoping},
        {5, "square-loss oracle bound", square_upper_bound},
        {6, "bounded-loss constant-compensation bound", hoeffding_upper_bound},
        {7, "online-to-batch identity", online_to_batch_identity},
        {8, "similarity oracles", similarity_oracles},
        {9, "closed-floor exactness", assouad_exactness},
        {10, "minimax floor", minimax_floor},
        {11, "heavy-tail rate band", heavy_tail_rate},
        {12, "risk-curve oracle equivalence", risk_curve_oracles},
        {13, "CLI determinism", cli_determinism},
    };

    int only = 0;
    if (argc > 1) only = std::atoi(argv[1]);

    int failures = 0;
    for (const auto& crit : criteria) {
        if (only != 0 && crit.id != only) continue;
        Check check;
        const auto start = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = crit.run(check);
        } catch (const std::exception& e) {
            check.note << "exception: " << e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << crit.id << ": " << crit.label
                  << " [" << format_double(secs) << "s]";
        if (!check.note.str().empty()) std::cout << " (" << check.note.str() << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}

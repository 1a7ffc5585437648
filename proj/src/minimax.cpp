#include "seqrand/minimax.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqrand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

int floor_log2(long x) {
    int m = 0;
    while (x >= 2) {
        x /= 2;
        ++m;
    }
    return m;
}

}  // namespace

void DiscreteDistribution::validate() const {
    double total = 0.0;
    for (const Atom& a : support) {
        if (a.mass < 0.0) throw std::invalid_argument("DiscreteDistribution: negative mass");
        total += a.mass;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteDistribution: masses do not sum to one");
}

Outcome DiscreteDistribution::draw(const ExpertTable& experts, SplitRng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const Atom& a : support) {
        acc += a.mass;
        if (u < acc) return Outcome{experts.cell_index(a.cell), a.y};
    }
    const Atom& last = support.back();
    return Outcome{experts.cell_index(last.cell), last.y};
}

void Hypercube::validate() const {
    require(m >= 1, "Hypercube: dimension must be positive");
    require(w > 0.0 && m * w <= 1.0 + 1e-12, "Hypercube: cell masses exceed one");
    require(p_minus >= 0.0 && p_minus < p_plus && p_plus <= 1.0,
            "Hypercube: edge probabilities need 0 <= p_minus < p_plus <= 1");
    require(h1 != h2, "Hypercube: coincident edge outputs");
    require(loss.output_range().contains(h1) && loss.output_range().contains(h2),
            "Hypercube: edge outputs leave the loss output range");
}

double edge_discrepancy_ii(const Hypercube& hc) {
    const double a = std::sqrt(hc.p_plus * (1.0 - hc.p_minus));
    const double b = std::sqrt((1.0 - hc.p_plus) * hc.p_minus);
    return (a - b) * (a - b);
}

double concavity_gap(const LossSpec& loss, double h1, double h2, double q_plus, double q_minus,
                     double alpha) {
    const double mid = alpha * q_plus + (1.0 - alpha) * q_minus;
    return best_constant_risk(loss, mid, h1, h2) - alpha * best_constant_risk(loss, q_plus, h1, h2) -
           (1.0 - alpha) * best_constant_risk(loss, q_minus, h1, h2);
}

double edge_discrepancy_i(const Hypercube& hc) {
    return concavity_gap(hc.loss, hc.h1, hc.h2, hc.p_plus, hc.p_minus, 0.5);
}

double characteristic_fn(const Hypercube& hc, double u) {
    require(u >= 0.0 && std::isfinite(u), "characteristic_fn: u must be finite and nonnegative");
    const double alpha = u / (u + 1.0);
    const double gap = concavity_gap(hc.loss, hc.h1, hc.h2, hc.p_plus, hc.p_minus, alpha);
    return std::max(0.0, 0.5 * hc.m * hc.w * (u + 1.0) * gap);
}

double SimilarityFn::term(double log_w_minus, double log_w_plus) const {
    const double w = std::exp(log_w_minus);
    if (w == 0.0) return 0.0;
    return w * value(std::exp(log_w_plus - log_w_minus));
}

double MinSimilarity::value(double u) const { return std::min(u, 1.0); }

double MinSimilarity::term(double log_w_minus, double log_w_plus) const {
    return std::exp(std::min(log_w_minus, log_w_plus));
}

double HellingerSimilarity::value(double u) const { return std::sqrt(u); }

double HellingerSimilarity::term(double log_w_minus, double log_w_plus) const {
    return std::exp(0.5 * (log_w_minus + log_w_plus));
}

double CharacteristicSimilarity::value(double u) const { return characteristic_fn(hc_, u); }

double CharacteristicSimilarity::term(double log_w_minus, double log_w_plus) const {
    const double wm = std::exp(log_w_minus);
    const double wp = std::exp(log_w_plus);
    if (wm + wp == 0.0) return 0.0;
    // (w- + w+) psi(w+/(w- + w+)) equals w- * psi_tilde(w+/w-) without the ratio
    const double alpha = wp / (wm + wp);
    const double gap = concavity_gap(hc_.loss, hc_.h1, hc_.h2, hc_.p_plus, hc_.p_minus, alpha);
    return std::max(0.0, 0.5 * hc_.m * hc_.w * (wm + wp) * gap);
}

double log_binomial(int n, int k) {
    require(n >= 0 && k >= 0 && k <= n, "log_binomial: invalid arguments");
    if (k == 0 || k == n) return 0.0;
    if (n <= 60) {
        std::uint64_t c = 1;
        const int kk = std::min(k, n - k);
        for (int i = 1; i <= kk; ++i) c = c * static_cast<std::uint64_t>(n - kk + i) / i;
        return std::log(static_cast<double>(c));
    }
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double two_point_similarity(const SimilarityFn& f, double p_plus, double p_minus, int k) {
    require(k >= 0 && k <= 1000, "two_point_similarity: k out of range");
    require(p_minus >= 0.0 && p_minus < p_plus && p_plus <= 1.0,
            "two_point_similarity: invalid edge probabilities");
    if (k == 0) return f.term(0.0, 0.0);
    // Degenerate reference edge: restrict to the single word of positive mass.
    if (p_minus == 0.0) {
        const double lwp = p_plus == 1.0 ? -kInf : k * std::log1p(-p_plus);
        return f.term(0.0, lwp);
    }
    if (p_minus == 1.0) return f.term(0.0, k * std::log(p_plus));

    double total = 0.0;
    for (int j = 0; j <= k; ++j) {
        const double lc = log_binomial(k, j);
        const double lwm = lc + j * std::log(p_minus) + (k - j) * std::log1p(-p_minus);
        double lwp;
        if (p_plus == 1.0)
            lwp = j == k ? lc : -kInf;
        else
            lwp = lc + j * std::log(p_plus) + (k - j) * std::log1p(-p_plus);
        total += f.term(lwm, lwp);
    }
    return total;
}

double product_similarity(const SimilarityFn& f, const Hypercube& hc, int n) {
    require(n >= 0 && n <= 1000, "product_similarity: n out of range");
    hc.validate();
    if (n == 0) return f.term(0.0, 0.0);
    double total = 0.0;
    for (int k = 0; k <= n; ++k) {
        double lw = log_binomial(n, k);
        if (k > 0) lw += k * std::log(hc.w);
        if (k < n) lw += (n - k) * std::log1p(-hc.w);
        if (lw == -kInf) continue;
        total += std::exp(lw) * two_point_similarity(f, hc.p_plus, hc.p_minus, k);
    }
    return total;
}

double assouad_bound_closed(const Hypercube& hc, int n, AssouadVariant variant) {
    hc.validate();
    require(n >= 0, "assouad_bound_closed: negative sample size");
    const double front = hc.m * hc.w * edge_discrepancy_i(hc);
    const double dii = edge_discrepancy_ii(hc);
    double v = 0.0;
    switch (variant) {
        case AssouadVariant::tight:
            v = front * (1.0 - std::sqrt(1.0 - std::pow(1.0 - dii, n * hc.w)));
            break;
        case AssouadVariant::weak:
            v = front * (1.0 - std::sqrt(n * hc.w * dii));
            break;
        case AssouadVariant::deterministic:
            require(hc.p_plus == 1.0 && hc.p_minus == 0.0,
                    "assouad_bound_closed: deterministic variant requires degenerate edges");
            v = front * std::pow(1.0 - hc.w, n);
            break;
    }
    return std::max(0.0, v);
}

DiscreteDistribution hypercube_vertex_distribution(const Hypercube& hc, std::span<const int> signs,
                                                   std::span<const std::string> cell_names) {
    hc.validate();
    require(static_cast<int>(signs.size()) == hc.m,
            "hypercube_vertex_distribution: sign pattern size mismatch");
    std::vector<std::string> names;
    if (cell_names.empty()) {
        names.reserve(hc.m + 1);
        for (int k = 0; k <= hc.m; ++k) names.push_back("X" + std::to_string(k));
    } else {
        require(static_cast<int>(cell_names.size()) == hc.m + 1,
                "hypercube_vertex_distribution: need one name per cell plus the residual");
        names.assign(cell_names.begin(), cell_names.end());
    }
    DiscreteDistribution out;
    const auto push = [&out](const std::string& cell, double y, double mass) {
        if (mass > 0.0) out.support.push_back({cell, y, mass});
    };
    const double x0 = hc.x0_mass();
    push(names[0], hc.h1, x0 * hc.p_minus);
    push(names[0], hc.h2, x0 * (1.0 - hc.p_minus));
    for (int j = 1; j <= hc.m; ++j) {
        const double p = signs[j - 1] > 0 ? hc.p_plus : hc.p_minus;
        push(names[static_cast<std::size_t>(j)], hc.h1, hc.w * p);
        push(names[static_cast<std::size_t>(j)], hc.h2, hc.w * (1.0 - p));
    }
    out.validate();
    return out;
}

ExpertTable pattern_expert_set(const Hypercube& hc, int d) {
    hc.validate();
    require(d >= 2, "pattern_expert_set: need at least two experts");
    require(hc.m <= 20, "pattern_expert_set: dimension too large to enumerate");
    const int patterns = 1 << hc.m;
    require(d >= patterns, "pattern_expert_set: table too small for all sign patterns");
    ExpertTable table;
    table.cells.reserve(hc.m + 1);
    for (int k = 0; k <= hc.m; ++k) table.cells.push_back("X" + std::to_string(k));
    table.predictions.resize(d, hc.m + 1);
    const double on_plus = best_constant(hc.loss, hc.p_plus, hc.h1, hc.h2);
    const double on_minus = best_constant(hc.loss, hc.p_minus, hc.h1, hc.h2);
    for (int j = 0; j < patterns; ++j) {
        table.predictions(j, 0) = on_minus;  // residual cell keeps the sign-free conditional
        for (int k = 1; k <= hc.m; ++k)
            table.predictions(j, k) = (j >> (k - 1)) & 1 ? on_plus : on_minus;
    }
    for (int j = patterns; j < d; ++j) table.predictions.row(j) = table.predictions.row(patterns - 1);
    table.validate();
    return table;
}

double no_consistency_bound(const LossSpec& loss, std::span<const double> h_grid) {
    double best = 0.0;
    for (std::size_t a = 0; a < h_grid.size(); ++a)
        for (std::size_t b = 0; b < h_grid.size(); ++b) {
            if (h_grid[a] == h_grid[b]) continue;
            best = std::max(best, best_constant_risk(loss, 0.5, h_grid[a], h_grid[b]));
        }
    return best;
}

namespace {

Hypercube symmetric_cube(int m, double w, double dii, double h1, double h2, LossSpec loss) {
    const double xi = std::sqrt(dii);
    Hypercube hc;
    hc.m = m;
    hc.w = w;
    hc.p_plus = 0.5 * (1.0 + xi);
    hc.p_minus = 0.5 * (1.0 - xi);
    hc.h1 = h1;
    hc.h2 = h2;
    hc.loss = std::move(loss);
    hc.validate();
    return hc;
}

}  // namespace

HypercubePreset preset_hypercube(const std::string& setting, const PresetParams& p) {
    require(p.n >= 1, "preset_hypercube: sample size must be positive");
    const int mt = floor_log2(p.cardinality);
    HypercubePreset out;
    out.setting = setting;

    if (setting == "lq_sqrt_rate") {
        require(p.cardinality >= 2, "lq_sqrt_rate: cardinality must be at least 2");
        require(p.B > 0.0, "lq_sqrt_rate: B must be positive");
        const double dii = std::min(mt / (4.0 * p.n), 1.0);
        double cq;
        if (p.q == 1.0) {
            cq = 0.25;
        } else {
            require(p.q > 1.0, "lq_sqrt_rate: q must be at least 1");
            require(p.q <= 1.0 + std::min(std::sqrt(mt / (4.0 * p.n)), 1.0),
                    "lq_sqrt_rate: q exceeds the slow-rate window, use lq_fast_rate");
            cq = p.q / 40.0;
        }
        LossSpec loss = p.q == 1.0 ? LossSpec::absolute(Interval{-p.B, p.B})
                                   : LossSpec::power(p.q, p.B);
        out.hc = symmetric_cube(mt, 1.0 / mt, dii, -p.B, p.B, std::move(loss));
        out.bound = mt <= 4 * p.n ? cq * std::pow(p.B, p.q) * std::sqrt(double(mt) / p.n)
                                  : 2.0 * cq * std::pow(p.B, p.q);
        return out;
    }

    if (setting == "lq_fast_rate") {
        require(p.cardinality >= 2, "lq_fast_rate: cardinality must be at least 2");
        require(p.q > 1.0, "lq_fast_rate: q must exceed 1");
        require(p.B > 0.0, "lq_fast_rate: B must be positive");
        const double w = std::min(1.0 / (p.n + 1), 1.0 / mt);
        out.hc = symmetric_cube(mt, w, 1.0, -p.B, p.B, LossSpec::power(p.q, p.B));
        out.bound = std::max(p.q / (90.0 * (p.q - 1.0)), std::exp(-1.0)) * std::pow(p.B, p.q) *
                    std::min(double(mt) / (p.n + 1), 1.0);
        return out;
    }

    if (setting == "absolute_unbounded") {
        require(p.cardinality >= 2, "absolute_unbounded: cardinality must be at least 2");
        require(p.b > 0.0, "absolute_unbounded: b must be positive");
        const double dii = std::min(mt / (4.0 * p.n), 1.0);
        LossSpec loss = LossSpec::absolute(Interval{-kInf, kInf}, Interval{-p.b, p.b});
        out.hc = symmetric_cube(mt, 1.0 / mt, dii, -p.b, p.b, std::move(loss));
        out.bound = std::min(0.25 * p.b * std::sqrt(double(mt) / p.n), 0.25);
        return out;
    }

    if (setting == "heavy_tail_asymmetric") {
        require(p.cardinality >= 2, "heavy_tail_asymmetric: cardinality must be at least 2");
        require(p.q > 1.0 && p.s >= p.q, "heavy_tail_asymmetric: needs s >= q > 1");
        require(p.A > 0.0 && p.b > 0.0 && p.C > 0.0,
                "heavy_tail_asymmetric: A, b, C must be positive");
        const double B = std::pow(4.0 * p.A * p.n / mt, 1.0 / p.s);
        const double prob = std::pow(p.C / B, p.q - 1.0);
        require(prob > 0.0 && prob <= 1.0,
                "heavy_tail_asymmetric: edge probability out of range, reduce C");
        const double w = 1.0 / (4.0 * p.n * prob);
        require(mt * w <= 1.0, "heavy_tail_asymmetric: cell masses exceed one, increase C");
        const double r = 1.0 / (p.q - 1.0);
        const double cap =
            p.b * (std::pow(prob, r) + std::pow(1.0 - prob, r)) / std::pow(prob, r);
        require(B <= cap,
                "heavy_tail_asymmetric: best predictor exceeds the prediction bound, reduce C");
        Hypercube hc;
        hc.m = mt;
        hc.w = w;
        hc.p_plus = prob;
        hc.p_minus = 0.0;
        hc.h1 = B;
        hc.h2 = 0.0;
        hc.loss = LossSpec::power(p.q, Interval{-kInf, kInf}, Interval{-p.b, p.b});
        hc.validate();
        out.hc = hc;
        out.bound = assouad_bound_closed(hc, static_cast<int>(p.n), AssouadVariant::tight);
        return out;
    }

    if (setting == "heavy_tail_symmetric") {
        require(p.cardinality >= 2, "heavy_tail_symmetric: cardinality must be at least 2");
        require(p.q > 1.0 && p.s >= p.q, "heavy_tail_symmetric: needs s >= q > 1");
        require(p.A > 0.0 && p.b > 0.0 && p.C > 0.0,
                "heavy_tail_symmetric: A, b, C must be positive");
        const double B = std::pow(4.0 * p.A * p.n * p.C * p.C / mt, 1.0 / (p.s + 2.0));
        const double dii = p.C * p.C / (B * B);
        require(dii <= 1.0, "heavy_tail_symmetric: edge discrepancy exceeds one, reduce C");
        const double w = 1.0 / (4.0 * p.n * dii);
        require(mt * w <= 1.0, "heavy_tail_symmetric: cell masses exceed one, increase C");
        const double r = 1.0 / (p.q - 1.0);
        const double xi = std::sqrt(dii);
        const double cap = p.b * (std::pow(1.0 + xi, r) + std::pow(1.0 - xi, r)) /
                           (std::pow(1.0 + xi, r) - std::pow(1.0 - xi, r));
        require(B <= cap,
                "heavy_tail_symmetric: best predictor exceeds the prediction bound, reduce C");
        out.hc = symmetric_cube(mt, w, dii, -B, B,
                                LossSpec::power(p.q, Interval{-kInf, kInf}, Interval{-p.b, p.b}));
        out.bound = assouad_bound_closed(out.hc, static_cast<int>(p.n), AssouadVariant::tight);
        return out;
    }

    if (setting == "entropy_deterministic") {
        require(p.cardinality >= 2, "entropy_deterministic: cardinality must be at least 2");
        Hypercube hc;
        hc.m = mt;
        hc.w = std::min(1.0 / (p.n + 1), 1.0 / mt);
        hc.p_plus = 1.0;
        hc.p_minus = 0.0;
        hc.h1 = 0.0;
        hc.h2 = 1.0;
        hc.loss = LossSpec::entropy();
        hc.validate();
        out.hc = hc;
        out.bound = std::exp(-1.0) * std::log(2.0) * std::min(1.0, double(mt) / (p.n + 1));
        return out;
    }

    if (setting == "vc_zero_error") {
        require(p.vc_dim >= 2, "vc_zero_error: VC dimension must be at least 2");
        Hypercube hc;
        hc.p_plus = 1.0;
        hc.p_minus = 0.0;
        hc.h1 = 0.0;
        hc.h2 = 1.0;
        hc.loss = LossSpec::zero_one();
        if (p.n >= p.vc_dim - 2) {
            hc.m = p.vc_dim - 1;
            hc.w = 1.0 / (p.n + 1);
            out.bound = (p.vc_dim - 1) / (2.0 * std::exp(1.0) * (p.n + 1));
        } else {
            hc.m = p.vc_dim;
            hc.w = 1.0 / p.vc_dim;
            out.bound = 0.5 * std::pow(1.0 - 1.0 / p.vc_dim, static_cast<double>(p.n));
        }
        hc.validate();
        out.hc = hc;
        return out;
    }

    if (setting == "vc_noisy") {
        require(p.vc_dim >= 2, "vc_noisy: VC dimension must be at least 2");
        require(p.L > 0.0 && p.L <= 0.5, "vc_noisy: L must lie in (0, 1/2]");
        const double gap = 1.0 - 2.0 * p.L;
        out.hc = symmetric_cube(p.vc_dim, 1.0 / p.vc_dim, gap * gap, 0.0, 1.0,
                                LossSpec::zero_one());
        if (gap * gap * p.n / p.vc_dim >= 4.0 / 9.0)
            out.bound = std::max(std::sqrt(p.L * (p.vc_dim - 1) / (32.0 * p.n)),
                                 2.0 * (p.vc_dim - 1) / (27.0 * p.n));
        else
            out.bound = gap / 6.0;
        return out;
    }

    if (setting == "vc_sqrt") {
        require(p.vc_dim >= 2, "vc_sqrt: VC dimension must be at least 2");
        require(p.vc_dim <= 4 * p.n, "vc_sqrt: needs vc_dim <= 4n");
        const double gap = 0.5 * std::sqrt(double(p.vc_dim) / p.n);
        out.hc = symmetric_cube(p.vc_dim, 1.0 / p.vc_dim, gap * gap, 0.0, 1.0,
                                LossSpec::zero_one());
        out.bound = 0.125 * std::sqrt(double(p.vc_dim) / p.n);
        return out;
    }

    if (setting == "no_consistency") {
        require(p.alpha > 0.0 && p.n * p.alpha >= 1.0, "no_consistency: needs n * alpha >= 1");
        const int m = static_cast<int>(p.n * p.alpha);
        Hypercube hc;
        hc.m = m;
        hc.w = 1.0 / m;
        hc.p_plus = 1.0;
        hc.p_minus = 0.0;
        if (p.loss_kind == "zero_one") {
            hc.loss = LossSpec::zero_one();
            hc.h1 = 0.0;
            hc.h2 = 1.0;
        } else if (p.loss_kind == "entropy") {
            hc.loss = LossSpec::entropy();
            hc.h1 = 0.0;
            hc.h2 = 1.0;
        } else if (p.loss_kind == "absolute") {
            hc.loss = LossSpec::absolute(Interval{-p.B, p.B});
            hc.h1 = -p.B;
            hc.h2 = p.B;
        } else if (p.loss_kind == "square" || p.loss_kind == "lq") {
            hc.loss = p.loss_kind == "square" ? LossSpec::square(p.B) : LossSpec::power(p.q, p.B);
            hc.h1 = -p.B;
            hc.h2 = p.B;
        } else {
            throw std::invalid_argument("no_consistency: unknown loss kind '" + p.loss_kind + "'");
        }
        hc.validate();
        out.hc = hc;
        out.bound = best_constant_risk(hc.loss, 0.5, hc.h1, hc.h2);
        return out;
    }

    throw std::invalid_argument("preset_hypercube: unknown setting '" + setting + "'");
}

}  // namespace seqrand

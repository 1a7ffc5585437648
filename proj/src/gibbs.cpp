#include "seqrand/gibbs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "seqrand/loss.hpp"

namespace seqrand {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int ExpertTable::cell_index(std::string_view name) const {
    for (int k = 0; k < num_cells(); ++k)
        if (cells[static_cast<std::size_t>(k)] == name) return k;
    throw std::invalid_argument("ExpertTable: unknown cell '" + std::string(name) + "'");
}

void ExpertTable::validate() const {
    if (num_experts() < 1 || num_cells() < 1)
        throw std::invalid_argument("ExpertTable: needs at least one expert and one cell");
    if (static_cast<int>(cells.size()) != num_cells())
        throw std::invalid_argument("ExpertTable: cell list does not match prediction columns");
    std::unordered_set<std::string> seen;
    for (const auto& c : cells)
        if (!seen.insert(c).second)
            throw std::invalid_argument("ExpertTable: duplicate cell '" + c + "'");
    if (!predictions.allFinite())
        throw std::invalid_argument("ExpertTable: predictions must be finite");
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf, or a +inf entry
    return m + std::log((v.array() - m).exp().sum());
}

LogWeights LogWeights::uniform(int d) {
    if (d < 1) throw std::invalid_argument("LogWeights: empty support");
    return LogWeights(Eigen::VectorXd::Constant(d, -std::log(static_cast<double>(d))));
}

LogWeights LogWeights::dirac(int d, int j) {
    if (j < 0 || j >= d) throw std::invalid_argument("LogWeights: atom out of range");
    Eigen::VectorXd v = Eigen::VectorXd::Constant(d, -kInf);
    v(j) = 0.0;
    return LogWeights(std::move(v));
}

LogWeights LogWeights::normalized(Eigen::VectorXd raw) {
    if (raw.size() == 0) throw std::invalid_argument("LogWeights: empty support");
    if (raw.hasNaN()) throw std::invalid_argument("LogWeights: NaN log-mass");
    const double lse = log_sum_exp(raw);
    if (!std::isfinite(lse)) throw std::invalid_argument("LogWeights: degenerate posterior");
    raw.array() -= lse;
    return LogWeights(std::move(raw));
}

LogWeights gibbs_posterior(const LogWeights& prior, const Eigen::Ref<const Eigen::VectorXd>& h,
                           double lambda) {
    if (h.size() != prior.size())
        throw std::invalid_argument("gibbs_posterior: dimension mismatch");
    if (h.hasNaN()) throw std::invalid_argument("gibbs_posterior: NaN in h");
    if (std::isnan(lambda) || lambda < 0.0)
        throw std::invalid_argument("gibbs_posterior: lambda must be nonnegative");
    if (lambda == 0.0) return prior;
    Eigen::VectorXd raw(prior.size());
    for (int j = 0; j < prior.size(); ++j) {
        // -inf prior mass stays annihilated even against an infinite loss
        raw(j) = prior.log_masses()(j) == -kInf ? -kInf : prior.log_masses()(j) - lambda * h(j);
    }
    if (raw.maxCoeff() == -kInf) throw std::runtime_error("gibbs_posterior: degenerate posterior");
    return LogWeights::normalized(std::move(raw));
}

double kl_divergence(const LogWeights& rho, const LogWeights& pi) {
    if (rho.size() != pi.size()) throw std::invalid_argument("kl_divergence: dimension mismatch");
    double out = 0.0;
    for (int j = 0; j < rho.size(); ++j) {
        const double lr = rho.log_masses()(j);
        if (lr == -kInf) continue;  // zero mass contributes nothing
        const double lp = pi.log_masses()(j);
        if (lp == -kInf) return kInf;
        out += std::exp(lr) * (lr - lp);
    }
    return std::max(out, 0.0);
}

double variational_objective(const LogWeights& rho, const LogWeights& pi,
                             const Eigen::Ref<const Eigen::VectorXd>& h) {
    double expect = 0.0;
    for (int j = 0; j < rho.size(); ++j) {
        const double lr = rho.log_masses()(j);
        if (lr == -kInf) continue;
        expect += std::exp(lr) * h(j);
    }
    return expect + kl_divergence(rho, pi);
}

double duality_gap(const LogWeights& pi, const Eigen::Ref<const Eigen::VectorXd>& h) {
    const LogWeights post = gibbs_posterior(pi, h, 1.0);
    const double lhs = variational_objective(post, pi, h);
    Eigen::VectorXd neg = pi.log_masses() - h;
    const double rhs = -log_sum_exp(neg);
    return lhs - rhs;
}

int sample_index(const LogWeights& rho, SplitRng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    const int d = rho.size();
    for (int j = 0; j < d; ++j) {
        acc += rho.mass(j);
        if (u < acc) return j;
    }
    // roundoff in the cumulative sum: fall back to the last charged atom
    for (int j = d - 1; j >= 0; --j)
        if (rho.log_masses()(j) > -kInf) return j;
    return d - 1;
}

double mixture_prediction(const LogWeights& rho, const ExpertTable& experts, int cell) {
    if (cell < 0 || cell >= experts.num_cells())
        throw std::invalid_argument("mixture_prediction: unknown cell");
    if (rho.size() != experts.num_experts())
        throw std::invalid_argument("mixture_prediction: weight/table mismatch");
    double out = 0.0;
    for (int j = 0; j < rho.size(); ++j) {
        const double m = rho.mass(j);
        if (m > 0.0) out += m * experts.predictions(j, cell);
    }
    return out;
}

Eigen::VectorXd expert_losses(const LossSpec& loss, const ExpertTable& experts, const Outcome& z) {
    if (z.cell < 0 || z.cell >= experts.num_cells())
        throw std::invalid_argument("expert_losses: unknown cell");
    Eigen::VectorXd out(experts.num_experts());
    for (int j = 0; j < experts.num_experts(); ++j)
        out(j) = eval_loss(loss, z.y, experts.predictions(j, z.cell));
    return out;
}

}  // namespace seqrand

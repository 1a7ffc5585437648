// minimax.hpp - distribution hypercubes, f-similarities and Assouad floors
#pragma once

#include <span>
#include <string>
#include <vector>

#include "seqrand/gibbs.hpp"
#include "seqrand/loss.hpp"

namespace seqrand {

// Finite-support joint distribution over (cell, output) pairs.
struct DiscreteDistribution {
    struct Atom {
        std::string cell;
        double y = 0.0;
        double mass = 0.0;
    };
    std::vector<Atom> support;

    void validate() const;  // masses nonnegative, total 1 within 1e-12
    Outcome draw(const ExpertTable& experts, SplitRng& rng) const;
};

// The 2^m-vertex family: input cells X_1..X_m of mass w each (X_0 takes the
// remainder), outputs concentrated on {h1, h2} with the per-cell sign flipping
// the conditional between p_plus and p_minus.
struct Hypercube {
    int m = 1;
    double w = 1.0;
    double p_plus = 1.0;
    double p_minus = 0.0;
    double h1 = 0.0;
    double h2 = 1.0;
    LossSpec loss = LossSpec::zero_one();

    double x0_mass() const { return 1.0 - m * w; }
    bool symmetric() const { return p_plus == 1.0 - p_minus; }
    void validate() const;
};

double edge_discrepancy_ii(const Hypercube& hc);

// Concavity gap of the best-constant risk curve between two edge parameters.
double concavity_gap(const LossSpec& loss, double h1, double h2, double q_plus, double q_minus,
                     double alpha);

double edge_discrepancy_i(const Hypercube& hc);

// Characteristic function of the hypercube: nonnegative, concave, nondecreasing,
// zero at zero, and equal to m w (edge discrepancy I) at one.
double characteristic_fn(const Hypercube& hc, double u);

// Concave function on likelihood ratios, evaluated atom-wise.  term() receives
// the log-masses of one atom under both edge laws so that implementations can
// avoid forming overflowing ratios; the default forms w_minus * f(ratio).
class SimilarityFn {
public:
    virtual ~SimilarityFn() = default;
    virtual double value(double u) const = 0;
    virtual double term(double log_w_minus, double log_w_plus) const;
};

// min(u, 1): one minus the total variation distance.
struct MinSimilarity final : SimilarityFn {
    double value(double u) const override;
    double term(double log_w_minus, double log_w_plus) const override;
};

// sqrt(u): the Hellinger affinity, which tensorizes over products.
struct HellingerSimilarity final : SimilarityFn {
    double value(double u) const override;
    double term(double log_w_minus, double log_w_plus) const override;
};

// The hypercube's characteristic function as a similarity integrand.
class CharacteristicSimilarity final : public SimilarityFn {
public:
    explicit CharacteristicSimilarity(const Hypercube& hc) : hc_(hc) {}
    double value(double u) const override;
    double term(double log_w_minus, double log_w_plus) const override;

private:
    Hypercube hc_;
};

// Exact similarity between the k-fold products of the two edge conditionals
// (Bernoulli laws with success probabilities p_plus, p_minus on {h1, h2}).
// Degenerate edges restrict the sum to atoms carrying positive Q- mass.
double two_point_similarity(const SimilarityFn& f, double p_plus, double p_minus, int k);

// Exact similarity between the n-fold products of the hypercube representatives:
// binomial mixture over how many samples land in the flipped cell.
double product_similarity(const SimilarityFn& f, const Hypercube& hc, int n);

enum class AssouadVariant { tight, weak, deterministic };

// Closed-form excess-risk floors; `deterministic` requires p_plus=1, p_minus=0.
double assouad_bound_closed(const Hypercube& hc, int n, AssouadVariant variant);

// log C(n, k); exact integer path for n <= 60, log-gamma beyond.
double log_binomial(int n, int k);

// Joint law of one vertex: signs[j] = +1/-1 selects p_plus/p_minus on cell j;
// the residual cell keeps the sign-independent conditional p_minus.
DiscreteDistribution hypercube_vertex_distribution(const Hypercube& hc, std::span<const int> signs,
                                                   std::span<const std::string> cell_names = {});

// The 2^m sign-pattern experts (per-cell best constants), padded to d entries
// with copies of the all-plus expert.  Contains the Bayes predictor of every
// vertex.
ExpertTable pattern_expert_set(const Hypercube& hc, int d);

// Grid supremum of the best-constant risk at the balanced mixture over
// distinct output pairs; the floor against uniform universal consistency.
double no_consistency_bound(const LossSpec& loss, std::span<const double> h_grid);

// Named hypercube presets reproducing the matched lower-bound constructions.
struct PresetParams {
    long n = 1;
    int cardinality = 2;  // reference-set size; presets derive the dimension from it
    int vc_dim = 2;
    double q = 2.0;
    double B = 1.0;
    double b = 1.0;
    double A = 1.0;
    double s = 2.0;
    double L = 0.25;
    double alpha = 1.0;
    double C = 0.25;  // scale constant of the heavy-tail presets
    std::string loss_kind = "zero_one";  // no_consistency only
};

struct HypercubePreset {
    std::string setting;
    Hypercube hc;
    double bound = 0.0;  // the preset's closed-form excess-risk floor
};

// Settings: lq_sqrt_rate, lq_fast_rate, absolute_unbounded, heavy_tail_asymmetric,
// heavy_tail_symmetric, entropy_deterministic, vc_zero_error, vc_noisy, vc_sqrt,
// no_consistency.  Parameter combinations violating a preset's constraints are
// rejected with the constraint named.
HypercubePreset preset_hypercube(const std::string& setting, const PresetParams& p);

}  // namespace seqrand

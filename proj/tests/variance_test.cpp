#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "seqrand/variance.hpp"

using namespace seqrand;

namespace {

ExpertTable two_experts(double a, double b) {
    ExpertTable t;
    t.cells = {"X0"};
    t.predictions.resize(2, 1);
    t.predictions << a, b;
    return t;
}

std::vector<Outcome> y_grid(double lo, double hi, int count) {
    std::vector<Outcome> zs;
    for (int i = 0; i < count; ++i)
        zs.push_back({0, lo + (hi - lo) * i / (count - 1)});
    return zs;
}

LogWeights weights2(double p) {
    Eigen::VectorXd raw(2);
    raw << std::log(p), std::log1p(-p);
    return LogWeights::normalized(raw);
}

}  // namespace

TEST_CASE("variance function values") {
    const LossSpec sq = LossSpec::square(4.0);
    const VarianceFn bern = VarianceFn::bernstein();
    CHECK(variance_delta(bern, 0.3, sq, 0.0, 2.0, 2.0) == doctest::Approx(0.0));
    CHECK(variance_delta(bern, 0.3, sq, 0.0, 2.0, 5.0) ==
          doctest::Approx(variance_delta(bern, 0.3, sq, 0.0, 5.0, 2.0)));
    CHECK(variance_delta(bern, 2.0, sq, 0.0, 1.0, 4.0) == doctest::Approx(9.0));

    const VarianceFn hoef = VarianceFn::hoeffding_const(2.0);
    CHECK(variance_delta(hoef, 0.5, sq, 7.0, 1.0, 2.0) == doctest::Approx(0.25));

    const VarianceFn heavy = VarianceFn::heavy_tail(1.0, 2.0);
    CHECK(variance_delta(heavy, 0.1, sq, 1.5, 0.0, 0.0) == doctest::Approx(0.0));
    CHECK(variance_delta(heavy, 0.1, sq, 3.0, 0.0, 0.0) == doctest::Approx(7.0));
    CHECK_THROWS_AS(variance_delta(heavy, -1.0, sq, 3.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("heavy-tail compensation is continuous at the branch point") {
    const LossSpec sq = LossSpec::square(8.0);
    const VarianceFn heavy = VarianceFn::heavy_tail(1.0, 2.0);
    // find a y with lambda * spread(y) crossing 1 and compare both branches
    for (double y : {2.5, 3.0, 4.0}) {
        const double spread = loss_span(sq, y, 1.0);
        const double lambda = 1.0 / spread;
        const double below = variance_delta(heavy, lambda * (1.0 - 1e-9), sq, y, 0.0, 0.0);
        const double above = variance_delta(heavy, lambda * (1.0 + 1e-9), sq, y, 0.0, 0.0);
        CHECK(below == doctest::Approx(above).epsilon(1e-6));
        CHECK(below == doctest::Approx(0.5 * spread).epsilon(1e-6));
    }
}

TEST_CASE("admissibility checks") {
    const LossSpec sq = LossSpec::square(1.0);
    CHECK_NOTHROW(check_admissible(VarianceFn::zero(), sq, 0.5));
    CHECK_THROWS_AS(check_admissible(VarianceFn::zero(), sq, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(check_admissible(VarianceFn::zero(PiHatMode::identity), sq, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_admissible(VarianceFn::zero(), LossSpec::zero_one(), 0.1),
                    std::invalid_argument);
    CHECK_NOTHROW(check_admissible(VarianceFn::bernstein(), LossSpec::zero_one(), 10.0));
    // exp-concavity threshold for the truncated compensation: 1/(2 (B+b)^2)
    CHECK_NOTHROW(check_admissible(VarianceFn::heavy_tail(1.0, 3.0),
                                   LossSpec::power(2.0, Interval{-1e308, 1e308},
                                                   Interval{-1.0, 1.0}),
                                   1.0 / 32.0));
    CHECK_THROWS_AS(check_admissible(VarianceFn::heavy_tail(1.0, 3.0),
                                     LossSpec::power(2.0, Interval{-1e308, 1e308},
                                                     Interval{-1.0, 1.0}),
                                     1.0 / 30.0),
                    std::invalid_argument);
}

TEST_CASE("mixture certificate for the square loss at the safe temperature") {
    const LossSpec sq = LossSpec::square(1.0);
    const ExpertTable experts = two_experts(-1.0, 1.0);
    const auto zs = y_grid(-1.0, 1.0, 100);
    for (int i = 1; i <= 100; ++i) {
        const VarianceCheck check = verify_variance_inequality(
            sq, 1.0 / 8.0, VarianceFn::zero(), experts, weights2(i / 101.0), zs);
        CHECK(check.max_value <= 1e-12);
    }
}

TEST_CASE("mixture violation for the square loss at a hot temperature") {
    const LossSpec sq = LossSpec::square(1.0);
    const ExpertTable experts = two_experts(-1.0, 1.0);
    const VarianceCheck check = verify_variance_inequality(
        sq, 1.0, VarianceFn::zero(), experts, LogWeights::uniform(2), y_grid(-1.0, 1.0, 201));
    CHECK(check.max_value > 1e-6);
}

TEST_CASE("squared-difference compensation certifies every loss") {
    SplitRng rng(41);
    const std::vector<LossSpec> specs{LossSpec::square(2.0), LossSpec::power(1.5, 2.0),
                                      LossSpec::absolute(Interval{-2.0, 2.0})};
    double worst = -1e300;
    for (int rep = 0; rep < 400; ++rep) {
        const LossSpec& loss = specs[rep % specs.size()];
        const int d = 2 + static_cast<int>(rng.uniform() * 6);
        ExpertTable t;
        t.cells = {"X0"};
        t.predictions.resize(d, 1);
        for (int j = 0; j < d; ++j) t.predictions(j, 0) = 2.0 * (2.0 * rng.uniform() - 1.0);
        Eigen::VectorXd raw(d);
        for (int j = 0; j < d; ++j) raw(j) = 3.0 * (2.0 * rng.uniform() - 1.0);
        const std::vector<Outcome> zs{{0, 2.0 * (2.0 * rng.uniform() - 1.0)}};
        const double lambda = 0.05 + 2.0 * rng.uniform();
        const VarianceCheck check = verify_variance_inequality(
            loss, lambda, VarianceFn::bernstein(), t, LogWeights::normalized(raw), zs);
        worst = std::max(worst, check.max_value);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("constant compensation certifies bounded losses") {
    const LossSpec zo = LossSpec::zero_one();
    ExpertTable t;
    t.cells = {"X0"};
    t.predictions.resize(3, 1);
    t.predictions << 0.0, 1.0, 1.0;
    const std::vector<Outcome> zs{{0, 0.0}, {0, 1.0}};
    for (double lambda : {0.1, 0.5, 1.0, 3.0}) {
        for (int i = 1; i <= 30; ++i) {
            Eigen::VectorXd raw(3);
            raw << std::log(i / 31.0), std::log1p(-i / 31.0) - std::log(2.0),
                std::log1p(-i / 31.0) - std::log(2.0);
            const VarianceCheck check =
                verify_variance_inequality(zo, lambda, VarianceFn::hoeffding_const(1.0), t,
                                           LogWeights::normalized(raw), zs);
            CHECK(check.max_value <= 1e-10);
        }
    }
}

TEST_CASE("larger compensation never raises the verifier maximum") {
    const LossSpec sq = LossSpec::square(1.0);
    const ExpertTable experts = two_experts(-1.0, 1.0);
    const auto zs = y_grid(-1.0, 1.0, 60);
    for (int i = 1; i <= 20; ++i) {
        const LogWeights rho = weights2(i / 21.0);
        const double bare =
            verify_variance_inequality(sq, 0.7, VarianceFn::zero(PiHatMode::identity), experts,
                                       rho, zs)
                .max_value;
        const double padded =
            verify_variance_inequality(sq, 0.7, VarianceFn::bernstein(), experts, rho, zs)
                .max_value;
        CHECK(padded <= bare + 1e-12);
    }
}

TEST_CASE("verifier rejects misuse") {
    const LossSpec sq = LossSpec::square(1.0);
    const ExpertTable experts = two_experts(-1.0, 1.0);
    CHECK_THROWS_AS(verify_variance_inequality(sq, 0.5, VarianceFn::zero(), experts,
                                               LogWeights::uniform(2), {}),
                    std::invalid_argument);
    const std::vector<Outcome> zs{{0, 0.5}};
    CHECK_THROWS_AS(
        verify_variance_inequality(sq, 0.5, VarianceFn::zero(PiHatMode::substitution), experts,
                                   LogWeights::uniform(2), zs),
        std::invalid_argument);
}

TEST_CASE("entropy mixture certificate with boundary experts") {
    // infinite losses enter the verifier as mass-zero contributions
    const LossSpec ent = LossSpec::entropy();
    ExpertTable t;
    t.cells = {"X0"};
    t.predictions.resize(2, 1);
    t.predictions << 0.0, 1.0;
    double worst = -1e300;
    std::vector<Outcome> zs;
    for (int a = 0; a <= 50; ++a) zs.push_back({0, a / 50.0});
    for (int i = 1; i <= 30; ++i) {
        const VarianceCheck check = verify_variance_inequality(
            ent, 1.0, VarianceFn::zero(), t, weights2(i / 31.0), zs);
        worst = std::max(worst, check.max_value);
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("truncated compensation certifies unbounded outputs") {
    // predictions live in [-b, b]; outputs range far beyond the threshold
    const double b = 1.0;
    const double lambda = 0.018;
    const double threshold = std::sqrt(1.0 / (2.0 * lambda)) - b;
    const LossSpec loss = LossSpec::power(2.0, Interval{-1e308, 1e308}, Interval{-b, b});
    const VarianceFn heavy = VarianceFn::heavy_tail(b, threshold);
    CHECK_NOTHROW(check_admissible(heavy, loss, lambda));

    ExpertTable t;
    t.cells = {"X0"};
    t.predictions.resize(4, 1);
    t.predictions << -1.0, -0.4, 0.4, 1.0;
    std::vector<Outcome> zs;
    for (int a = -40; a <= 40; ++a) zs.push_back({0, a / 4.0});  // |y| up to 10 > threshold

    SplitRng rng(77);
    double worst = -1e300;
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd raw(4);
        for (int j = 0; j < 4; ++j) raw(j) = 3.0 * (2.0 * rng.uniform() - 1.0);
        const VarianceCheck check = verify_variance_inequality(
            loss, lambda, heavy, t, LogWeights::normalized(raw), zs);
        worst = std::max(worst, check.max_value);
    }
    CHECK(worst <= 1e-10);
}

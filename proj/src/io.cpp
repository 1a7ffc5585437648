#include "seqrand/io.hpp"

#include <cstdio>
#include <limits>
#include <stdexcept>

namespace seqrand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using nlohmann::json;

double get_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<double>();
}

[[noreturn]] void bad_config(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

}  // namespace

std::string format_double(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const LossSpec& loss) {
    json j;
    j["kind"] = loss.kind_name();
    if (loss.kind() == LossKind::lq) j["q"] = loss.exponent();
    if (std::isfinite(loss.output_range().lo)) j["y_lo"] = loss.output_range().lo;
    if (std::isfinite(loss.output_range().hi)) j["y_hi"] = loss.output_range().hi;
    const auto& pred = loss.prediction_range();
    if (pred.bounded() && pred.lo == -pred.hi && pred.hi != loss.output_range().hi)
        j["b"] = pred.hi;
    return j;
}

LossSpec loss_from_json(const json& j) {
    if (!j.contains("kind")) bad_config("loss needs a kind");
    const std::string kind = j.at("kind").get<std::string>();
    const Interval output{get_or(j, "y_lo", -kInf), get_or(j, "y_hi", kInf)};
    if (kind == "entropy") return LossSpec::entropy();
    if (kind == "zero_one") return LossSpec::zero_one();
    const bool has_b = j.contains("b");
    const Interval pred = has_b ? Interval{-j.at("b").get<double>(), j.at("b").get<double>()}
                                : output;
    if (kind == "square") {
        if (!output.bounded()) {
            if (!has_b) bad_config("square loss with unbounded outputs needs b");
            return LossSpec::power(2.0, output, pred);
        }
        return has_b ? LossSpec::power(2.0, output, pred) : LossSpec::square(output);
    }
    if (kind == "lq") {
        if (!j.contains("q")) bad_config("lq loss needs q");
        if (!output.bounded() && !has_b) bad_config("lq loss with unbounded outputs needs b");
        return LossSpec::power(j.at("q").get<double>(), output, pred);
    }
    if (kind == "absolute") return LossSpec::absolute(output, pred);
    bad_config("unknown loss kind '" + kind + "'");
}

namespace {

PiHatMode pi_hat_from_name(const std::string& name) {
    if (name == "identity") return PiHatMode::identity;
    if (name == "dirac_mixture") return PiHatMode::dirac_mixture;
    if (name == "substitution") return PiHatMode::substitution;
    bad_config("unknown pi_hat mode '" + name + "'");
}

std::string pi_hat_name(PiHatMode mode) {
    switch (mode) {
        case PiHatMode::identity: return "identity";
        case PiHatMode::dirac_mixture: return "dirac_mixture";
        case PiHatMode::substitution: return "substitution";
    }
    return "?";
}

}  // namespace

json to_json(const VarianceFn& vf) {
    json j;
    j["kind"] = vf.kind_name();
    j["pi_hat"] = pi_hat_name(vf.pi_hat());
    if (vf.kind() == VarianceKind::hoeffding_const) j["span"] = vf.span();
    if (vf.kind() == VarianceKind::heavy_tail) {
        j["b"] = vf.prediction_bound();
        j["B"] = vf.tail_threshold();
    }
    return j;
}

VarianceFn variance_from_json(const json& j) {
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") return VarianceFn::zero(pi_hat_from_name(j.value("pi_hat", "dirac_mixture")));
    if (kind == "bernstein") return VarianceFn::bernstein();
    if (kind == "hoeffding_const") {
        if (!j.contains("span")) bad_config("hoeffding_const needs a span");
        return VarianceFn::hoeffding_const(j.at("span").get<double>());
    }
    if (kind == "heavy_tail") {
        if (!j.contains("b") || !j.contains("B")) bad_config("heavy_tail needs b and B");
        return VarianceFn::heavy_tail(j.at("b").get<double>(), j.at("B").get<double>(),
                                      pi_hat_from_name(j.value("pi_hat", "dirac_mixture")));
    }
    bad_config("unknown variance kind '" + kind + "'");
}

json to_json(const ExpertTable& experts) {
    json preds = json::array();
    for (int r = 0; r < experts.num_experts(); ++r) {
        json row = json::array();
        for (int c = 0; c < experts.num_cells(); ++c) row.push_back(experts.predictions(r, c));
        preds.push_back(std::move(row));
    }
    return json{{"cells", experts.cells}, {"predictions", std::move(preds)}};
}

ExpertTable experts_from_json(const json& j) {
    ExpertTable out;
    if (!j.contains("cells") || !j.contains("predictions"))
        bad_config("expert table needs cells and predictions");
    out.cells = j.at("cells").get<std::vector<std::string>>();
    const auto& rows = j.at("predictions");
    if (!rows.is_array() || rows.empty()) bad_config("expert table predictions must be rows");
    out.predictions.resize(static_cast<long>(rows.size()), static_cast<long>(out.cells.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != out.cells.size()) bad_config("ragged prediction rows");
        for (std::size_t c = 0; c < out.cells.size(); ++c)
            out.predictions(static_cast<long>(r), static_cast<long>(c)) = rows[r][c].get<double>();
    }
    out.validate();
    return out;
}

json to_json(const LogWeights& w) {
    json arr = json::array();
    for (int j = 0; j < w.size(); ++j) {
        const double v = w.log_masses()(j);
        if (v == -kInf)
            arr.push_back(nullptr);  // JSON has no -inf literal
        else
            arr.push_back(v);
    }
    return arr;
}

LogWeights log_weights_from_json(const json& j) {
    if (!j.is_array() || j.empty()) bad_config("log weights must be a nonempty array");
    Eigen::VectorXd raw(static_cast<long>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        raw(static_cast<long>(i)) = j[i].is_null() ? -kInf : j[i].get<double>();
    return LogWeights::normalized(std::move(raw));
}

json to_json(const DiscreteDistribution& P) {
    json arr = json::array();
    for (const auto& a : P.support)
        arr.push_back(json{{"cell", a.cell}, {"y", a.y}, {"mass", a.mass}});
    return json{{"support", std::move(arr)}};
}

DiscreteDistribution distribution_from_json(const json& j) {
    DiscreteDistribution out;
    if (!j.contains("support")) bad_config("distribution needs a support array");
    for (const auto& a : j.at("support"))
        out.support.push_back({a.at("cell").get<std::string>(), a.at("y").get<double>(),
                               a.at("mass").get<double>()});
    out.validate();
    return out;
}

json to_json(const FittedAggregate& fitted) {
    json score = json::array();
    for (long r = 0; r < fitted.score_table.rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < fitted.score_table.cols(); ++c) {
            const double v = fitted.score_table(r, c);
            row.push_back(v == kInf ? json(nullptr) : json(v));
        }
        score.push_back(std::move(row));
    }
    json traj = json::array();
    for (const auto& w : fitted.trajectory) traj.push_back(to_json(w));
    json parts = json::array();
    for (long i = 0; i < fitted.log_partitions.size(); ++i)
        parts.push_back(fitted.log_partitions(i));
    json out{{"s_table", std::move(score)},
             {"trajectory", std::move(traj)},
             {"drawn", fitted.drawn},
             {"log_partitions", std::move(parts)}};
    if (fitted.substitution_values.size() > 0) {
        json sub = json::array();
        for (long r = 0; r < fitted.substitution_values.rows(); ++r) {
            json row = json::array();
            for (long c = 0; c < fitted.substitution_values.cols(); ++c)
                row.push_back(fitted.substitution_values(r, c));
            sub.push_back(std::move(row));
        }
        out["substitution_values"] = std::move(sub);
    }
    return out;
}

json to_json(const Hypercube& hc) {
    return json{{"m", hc.m},           {"w", hc.w},   {"p_plus", hc.p_plus},
                {"p_minus", hc.p_minus}, {"h1", hc.h1}, {"h2", hc.h2},
                {"loss", to_json(hc.loss)}};
}

Hypercube hypercube_from_json(const json& j) {
    Hypercube hc;
    hc.m = j.at("m").get<int>();
    hc.w = j.at("w").get<double>();
    hc.p_plus = j.at("p_plus").get<double>();
    hc.p_minus = j.at("p_minus").get<double>();
    hc.h1 = j.at("h1").get<double>();
    hc.h2 = j.at("h2").get<double>();
    hc.loss = loss_from_json(j.at("loss"));
    hc.validate();
    return hc;
}

PresetParams preset_params_from_json(const json& j) {
    PresetParams p;
    p.n = static_cast<long>(get_or(j, "n", 1));
    p.cardinality = static_cast<int>(get_or(j, "cardinality", 2));
    p.vc_dim = static_cast<int>(get_or(j, "vc_dim", 2));
    p.q = get_or(j, "q", 2.0);
    p.B = get_or(j, "B", 1.0);
    p.b = get_or(j, "b", 1.0);
    p.A = get_or(j, "A", 1.0);
    p.s = get_or(j, "s", 2.0);
    p.L = get_or(j, "L", 0.25);
    p.alpha = get_or(j, "alpha", 1.0);
    p.C = get_or(j, "C", 0.25);
    p.loss_kind = j.value("loss_kind", "zero_one");
    return p;
}

EstimatorSpec estimator_from_json(const json& j, int num_experts) {
    EstimatorSpec spec;
    const std::string kind = j.value("kind", "seqrand");
    if (kind == "seqrand")
        spec.kind = EstimatorKind::seqrand;
    else if (kind == "progressive_mixture")
        spec.kind = EstimatorKind::progressive_mixture;
    else if (kind == "gibbs_erm")
        spec.kind = EstimatorKind::gibbs_erm;
    else
        bad_config("unknown estimator '" + kind + "'");
    if (!j.contains("loss")) bad_config("estimator needs a loss");
    spec.config.loss = loss_from_json(j.at("loss"));
    if (!j.contains("lambda")) bad_config("estimator needs lambda");
    spec.config.lambda = j.at("lambda").get<double>();
    spec.config.prior = j.contains("prior") ? log_weights_from_json(j.at("prior"))
                                            : LogWeights::uniform(num_experts);
    if (j.contains("variance")) spec.config.variance = variance_from_json(j.at("variance"));
    const std::string mode = j.value("output_mode", "uniform_draw");
    if (mode == "uniform_draw")
        spec.config.output_mode = OutputMode::uniform_draw;
    else if (mode == "cesaro_mean")
        spec.config.output_mode = OutputMode::cesaro_mean;
    else
        bad_config("unknown output mode '" + mode + "'");
    return spec;
}

UpperBound upper_bound_from_name(const std::string& name) {
    if (name == "zero_delta_oracle") return UpperBound::zero_delta_oracle;
    if (name == "square_mixable") return UpperBound::square_mixable;
    if (name == "hoeffding") return UpperBound::hoeffding;
    if (name == "absolute_moment") return UpperBound::absolute_moment;
    if (name == "lq_mixable") return UpperBound::lq_mixable;
    if (name == "entropy_mixable") return UpperBound::entropy_mixable;
    if (name == "bernstein_low_noise") return UpperBound::bernstein_low_noise;
    bad_config("unknown upper bound '" + name + "'");
}

BoundParams bound_params_from_json(const json& j) {
    BoundParams p;
    p.cardinality = static_cast<int>(get_or(j, "cardinality", 1));
    p.n = static_cast<long>(get_or(j, "n", 1));
    p.lambda = get_or(j, "lambda", 1.0);
    p.B = get_or(j, "B", 1.0);
    p.b = get_or(j, "b", 1.0);
    p.q = get_or(j, "q", 2.0);
    p.c = get_or(j, "c", 1.0);
    p.span = get_or(j, "span", 1.0);
    p.min_risk = get_or(j, "min_risk", 0.0);
    return p;
}

CsvWriter::CsvWriter(std::ostream& os, std::uint64_t seed) : os_(os) {
    os_ << "# seqrand " << kArtifactVersion << " seed=" << seed << "\n";
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        os_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i)
        os_ << fields[i] << (i + 1 < fields.size() ? "," : "\n");
}

void write_predictions_csv(std::ostream& os, const ExpertTable& experts,
                           const std::vector<std::vector<double>>& per_step_cell_predictions,
                           std::uint64_t seed) {
    CsvWriter csv(os, seed);
    csv.header({"step", "cell", "prediction"});
    for (std::size_t i = 0; i < per_step_cell_predictions.size(); ++i) {
        const auto& row = per_step_cell_predictions[i];
        for (std::size_t k = 0; k < row.size(); ++k)
            csv.row({std::to_string(i), experts.cells[k], format_double(row[k])});
    }
}

}  // namespace seqrand

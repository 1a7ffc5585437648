// seqrand CLI: mixability tables, variance-inequality checks, Monte-Carlo
// experiment runs and lower-bound reports, all driven by JSON configs.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "seqrand/io.hpp"

using nlohmann::json;
using namespace seqrand;

namespace {

struct CliOptions {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_path;
    std::string format = "csv";
    int threads = 1;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    json j;
    in >> j;
    return j;
}

void write_output(const CliOptions& opt, const std::vector<std::string>& columns,
                  const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream body;
    if (opt.format == "csv") {
        CsvWriter csv(body, opt.seed);
        csv.header(columns);
        for (const auto& r : rows) csv.row(r);
    } else {
        json out;
        out["version"] = kArtifactVersion;
        out["seed"] = opt.seed;
        json jrows = json::array();
        for (const auto& r : rows) {
            json obj;
            for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = r[i];
            jrows.push_back(std::move(obj));
        }
        out["rows"] = std::move(jrows);
        body << out.dump(2) << "\n";
    }
    if (opt.out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(opt.out_path, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot open output '" + opt.out_path + "'");
        f << body.str();
    }
}

std::string loss_label(const LossSpec& loss) {
    if (loss.kind() != LossKind::lq) return loss.kind_name();
    return "lq" + format_double(loss.exponent());
}

int cmd_mixability(const CliOptions& opt, const json& cfg) {
    if (!cfg.contains("losses") || !cfg.at("losses").is_array() || cfg.at("losses").empty())
        throw std::invalid_argument("config: mixability needs a nonempty losses array");
    std::vector<std::vector<std::string>> rows;
    for (const auto& entry : cfg.at("losses")) {
        const LossSpec loss = loss_from_json(entry);
        const auto eta = mixability_eta_max(loss);
        std::string numeric = "n/a";
        if (loss.kind() == LossKind::lq && loss.output_range().bounded()) {
            const int grid = entry.value("grid_size", 10000);
            numeric = format_double(numeric_eta_infimum(loss, loss.output_bound(), grid));
        }
        rows.push_back({loss_label(loss), eta ? format_double(*eta) : "none", numeric});
    }
    write_output(opt, {"loss", "eta_max", "eta_numeric"}, rows);
    std::cout << "mixability: " << rows.size() << " losses\n";
    return 0;
}

std::vector<Outcome> sample_list(const json& cfg, const LossSpec& loss,
                                 const ExpertTable& experts) {
    std::vector<Outcome> zs;
    if (cfg.contains("samples")) {
        for (const auto& s : cfg.at("samples"))
            zs.push_back({experts.cell_index(s.at("cell").get<std::string>()),
                          s.at("y").get<double>()});
    } else if (cfg.contains("y_grid_size")) {
        const int ny = cfg.at("y_grid_size").get<int>();
        if (ny < 1) throw std::invalid_argument("config: y_grid_size must be positive");
        const auto& range = loss.output_range();
        if (!range.bounded())
            throw std::invalid_argument("config: y_grid_size needs a bounded output range");
        for (int k = 0; k < experts.num_cells(); ++k)
            for (int a = 0; a < ny; ++a) {
                const double y =
                    ny == 1 ? 0.5 * (range.lo + range.hi)
                            : range.lo + (range.hi - range.lo) * a / (ny - 1);
                zs.push_back({k, y});
            }
    }
    if (zs.empty()) throw std::invalid_argument("config: empty sample list");
    return zs;
}

int cmd_variance_check(const CliOptions& opt, const json& cfg) {
    const LossSpec loss = loss_from_json(cfg.at("loss"));
    if (!cfg.contains("lambda")) throw std::invalid_argument("config: needs lambda");
    const double lambda = cfg.at("lambda").get<double>();
    const VarianceFn vf = variance_from_json(cfg.at("variance"));
    const ExpertTable experts = experts_from_json(cfg.at("experts"));
    const double tolerance = cfg.value("tolerance", 1e-10);
    const std::vector<Outcome> zs = sample_list(cfg, loss, experts);

    std::vector<LogWeights> rhos;
    if (cfg.contains("rho")) {
        rhos.push_back(log_weights_from_json(cfg.at("rho")));
    } else if (cfg.contains("rho_grid_size")) {
        if (experts.num_experts() != 2)
            throw std::invalid_argument("config: rho_grid_size applies to two-expert tables");
        const int m = cfg.at("rho_grid_size").get<int>();
        for (int i = 1; i <= m; ++i) {
            const double p = static_cast<double>(i) / (m + 1);
            Eigen::VectorXd raw(2);
            raw << std::log(p), std::log1p(-p);
            rhos.push_back(LogWeights::normalized(raw));
        }
    } else if (cfg.contains("rho_random")) {
        const int m = cfg.at("rho_random").get<int>();
        SplitRng rng(derive_seed(opt.seed, 0x5a));
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd raw(experts.num_experts());
            for (int j = 0; j < raw.size(); ++j) raw(j) = 4.0 * rng.uniform() - 2.0;
            rhos.push_back(LogWeights::normalized(raw));
        }
    } else {
        throw std::invalid_argument("config: needs rho, rho_grid_size or rho_random");
    }

    double global_max = -std::numeric_limits<double>::infinity();
    Outcome witness{0, 0.0};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const VarianceCheck check =
            verify_variance_inequality(loss, lambda, vf, experts, rhos[i], zs);
        rows.push_back({std::to_string(i), format_double(check.max_value),
                        experts.cells[check.witness.cell], format_double(check.witness.y)});
        if (check.max_value > global_max) {
            global_max = check.max_value;
            witness = check.witness;
        }
    }
    write_output(opt, {"rho_index", "max_value", "witness_cell", "witness_y"}, rows);
    const bool pass = global_max <= tolerance;
    std::cout << "variance-check: max " << format_double(global_max) << " tolerance "
              << format_double(tolerance) << (pass ? " pass" : " fail") << "\n";
    if (!pass)
        std::cerr << "violation witness: cell " << experts.cells[witness.cell] << " y "
                  << format_double(witness.y) << "\n";
    return pass ? 0 : 1;
}

ExpertTable experts_from_run_config(const json& cfg, const Hypercube* hc) {
    if (cfg.contains("experts")) return experts_from_json(cfg.at("experts"));
    if (cfg.contains("pattern_experts")) {
        if (!hc)
            throw std::invalid_argument("config: pattern_experts needs hypercube data");
        return pattern_expert_set(*hc, cfg.at("pattern_experts").at("cardinality").get<int>());
    }
    throw std::invalid_argument("config: needs experts or pattern_experts");
}

Hypercube hypercube_from_run_config(const json& data) {
    if (data.contains("hypercube")) return hypercube_from_json(data.at("hypercube"));
    if (data.contains("preset"))
        return preset_hypercube(data.at("preset").at("name").get<std::string>(),
                                preset_params_from_json(data.at("preset")))
            .hc;
    throw std::invalid_argument("config: data needs a hypercube or preset");
}

int cmd_run(const CliOptions& opt, const json& cfg) {
    const std::string mode = cfg.value("mode", "excess");
    if (mode == "report") {
        std::vector<BoundReportEntry> entries;
        for (const auto& e : cfg.at("entries")) {
            BoundReportEntry entry;
            entry.setting = e.value("setting", "entry");
            entry.hc = hypercube_from_run_config(e);
            entry.n = e.at("n").get<int>();
            entry.trials = e.at("trials").get<int>();
            entry.upper = upper_bound_from_name(e.at("upper").at("name").get<std::string>());
            entry.upper_params = bound_params_from_json(e.at("upper"));
            entry.matched = e.value("matched", true);
            entry.estimator =
                estimator_from_json(e.at("estimator"), entry.upper_params.cardinality);
            entries.push_back(std::move(entry));
        }
        const auto rows = bound_report(entries, opt.seed, opt.threads);
        std::vector<std::vector<std::string>> cells;
        bool all_ok = true;
        for (const auto& r : rows) {
            cells.push_back({r.setting, std::to_string(r.n), format_double(r.lower_exact),
                             format_double(r.lower_closed), format_double(r.empirical),
                             format_double(r.empirical_stderr), format_double(r.upper)});
            if (r.matched && !r.ok) all_ok = false;
            if (!r.matched)
                std::cerr << "row '" << r.setting << "': estimator/bound pairing not matched, "
                          << "sandwich not enforced\n";
        }
        write_output(opt,
                     {"setting", "n", "lower_exact", "lower_closed", "empirical",
                      "empirical_stderr", "upper"},
                     cells);
        std::cout << "report: " << rows.size() << " rows" << (all_ok ? "" : " (violations)")
                  << "\n";
        return all_ok ? 0 : 1;
    }
    if (mode != "excess") throw std::invalid_argument("config: unknown run mode '" + mode + "'");

    const json& data = cfg.at("data");
    const int n = cfg.at("n").get<int>();
    const int trials = cfg.at("trials").get<int>();
    const std::string setting = cfg.value("setting", "excess");

    std::unique_ptr<RiskModel> model;
    ExpertTable experts;
    std::unique_ptr<HeavyTailGenerator> gen;
    if (data.contains("heavy_tail")) {
        const auto& h = data.at("heavy_tail");
        experts = experts_from_run_config(cfg, nullptr);
        gen = std::make_unique<HeavyTailGenerator>(
            experts, h.at("target").get<int>(), h.at("s").get<double>(),
            h.at("A").get<double>(), h.at("b").get<double>(),
            derive_seed(opt.seed, 0xbead));
        const LossSpec loss = loss_from_json(cfg.at("estimator").at("loss"));
        model = std::make_unique<HeavyTailRiskModel>(*gen, loss, derive_seed(opt.seed, 0xabc));
    } else if (data.contains("distribution")) {
        experts = experts_from_run_config(cfg, nullptr);
        const LossSpec loss = loss_from_json(cfg.at("estimator").at("loss"));
        model = std::make_unique<DiscreteRiskModel>(distribution_from_json(data.at("distribution")),
                                                    loss, experts);
    } else {
        const Hypercube hc = hypercube_from_run_config(data);
        experts = experts_from_run_config(cfg, &hc);
        std::vector<int> signs(static_cast<std::size_t>(hc.m), 1);
        if (data.contains("vertex")) {
            const auto v = data.at("vertex").get<std::vector<int>>();
            if (static_cast<int>(v.size()) != hc.m)
                throw std::invalid_argument("config: vertex length must match the dimension");
            signs = v;
        }
        model = std::make_unique<DiscreteRiskModel>(hypercube_vertex_distribution(hc, signs),
                                                    hc.loss, experts);
    }

    const EstimatorSpec spec = estimator_from_json(cfg.at("estimator"), experts.num_experts());
    const MCResult res = excess_risk_mc(*model, spec, n, trials, opt.seed, opt.threads);
    write_output(opt, {"setting", "estimator", "n", "trials", "mean", "stderr"},
                 {{setting, spec.name(), std::to_string(n), std::to_string(trials),
                   format_double(res.mean), format_double(res.stderr_)}});
    std::cout << "excess: mean " << format_double(res.mean) << " stderr "
              << format_double(res.stderr_) << "\n";
    return 0;
}

int cmd_lower_bound(const CliOptions& opt, const json& cfg) {
    if (!cfg.contains("settings") || !cfg.at("settings").is_array() || cfg.at("settings").empty())
        throw std::invalid_argument("config: lower-bound needs a nonempty settings array");
    std::vector<std::vector<std::string>> rows;
    for (const auto& entry : cfg.at("settings")) {
        Hypercube hc;
        std::string name;
        long n;
        if (entry.contains("name")) {
            name = entry.at("name").get<std::string>();
            const HypercubePreset preset =
                preset_hypercube(name, preset_params_from_json(entry));
            hc = preset.hc;
            n = preset_params_from_json(entry).n;
        } else {
            hc = hypercube_from_json(entry.at("hypercube"));
            n = entry.at("n").get<long>();
            name = entry.value("setting", "hypercube");
        }
        const CharacteristicSimilarity sim(hc);
        const double exact = product_similarity(sim, hc, static_cast<int>(n));
        const double closed = assouad_bound_closed(hc, static_cast<int>(n), AssouadVariant::tight);
        const double weak = assouad_bound_closed(hc, static_cast<int>(n), AssouadVariant::weak);
        const std::string det =
            hc.p_plus == 1.0 && hc.p_minus == 0.0
                ? format_double(assouad_bound_closed(hc, static_cast<int>(n),
                                                     AssouadVariant::deterministic))
                : "n/a";
        rows.push_back({name, std::to_string(hc.m), format_double(hc.w),
                        format_double(hc.p_plus), format_double(hc.p_minus),
                        format_double(edge_discrepancy_i(hc)),
                        format_double(edge_discrepancy_ii(hc)), std::to_string(n),
                        format_double(exact), format_double(closed), format_double(weak), det});
    }
    write_output(opt,
                 {"setting", "m", "w", "p_plus", "p_minus", "d_I", "d_II", "n",
                  "exact_similarity", "closed_814", "weak_814", "det_815"},
                 rows);
    std::cout << "lower-bound: " << rows.size() << " rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seqrand: sequential aggregation estimators and minimax floors"};
    app.require_subcommand(1);

    CliOptions opt;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "JSON config path")->required();
        sub->add_option("--seed", opt.seed, "master seed")->required();
        sub->add_option("--out", opt.out_path, "output path (stdout when omitted)");
        sub->add_option("--format", opt.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
    };
    CLI::App* mix = app.add_subcommand("mixability", "mixability constants per loss");
    CLI::App* var = app.add_subcommand("variance-check", "verify the variance inequality");
    CLI::App* run = app.add_subcommand("run", "Monte-Carlo excess risk / bound report");
    CLI::App* low = app.add_subcommand("lower-bound", "similarity and Assouad floors");
    for (CLI::App* sub : {mix, var, run, low}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const json cfg = load_config(opt.config_path);
        if (mix->parsed()) return cmd_mixability(opt, cfg);
        if (var->parsed()) return cmd_variance_check(opt, cfg);
        if (run->parsed()) return cmd_run(opt, cfg);
        if (low->parsed()) return cmd_lower_bound(opt, cfg);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

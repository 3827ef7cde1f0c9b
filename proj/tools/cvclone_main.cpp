#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "cvclone/mqc.hpp"
#include "cvclone/optimizer.hpp"
#include "cvclone/protocol.hpp"
#include "cvclone/serialize.hpp"
#include "cvclone/verify.hpp"
#include "cvclone/version.hpp"

namespace {

using namespace cvclone;

std::uint64_t parse_seed(const std::string& text) {
    if (text == "random") {
        std::random_device dev;
        return (static_cast<std::uint64_t>(dev()) << 32) ^ dev();
    }
    std::size_t used = 0;
    const unsigned long long value = std::stoull(text, &used);
    if (used != text.size()) throw std::invalid_argument("--seed must be an integer or 'random'");
    return static_cast<std::uint64_t>(value);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        values.push_back(std::stoi(item, &used));
        if (used != item.size()) {
            throw std::invalid_argument("expected an integer, got '" + item + "'");
        }
    }
    if (values.empty()) throw std::invalid_argument("expected a comma-separated integer list");
    return values;
}

double db_magnitude(double r) { return kDbPerXi * std::abs(r); }

struct MqcArgs {
    int M = 2;
    double theta0 = M_PI / 4.0;
    double s = 0.0;
    std::string out = "mqc_state.json";
};

int cmd_mqc(const MqcArgs& args) {
    const MqcSpec spec = make_mqc_spec(args.M, args.theta0, args.s);
    const GaussianState state = build_mqc(spec);
    std::printf("M = %d, theta0 = %.6f, s = %.6f\n", spec.M, spec.theta0, spec.s);
    std::printf("r1 = %.6f (%.2f dB), r2 = %.6f (%.2f dB)\n", spec.r1, db_magnitude(spec.r1),
                spec.r2, db_magnitude(spec.r2));
    std::printf("equal-squeezing budget at the symmetric point: %.2f dB per mode\n",
                std::abs(equal_squeezing_db(spec.M)));
    const nlohmann::json params{
        {"M", args.M}, {"theta0", args.theta0}, {"s", args.s}, {"out", args.out}};
    write_with_manifest(args.out, state_to_json(state).dump(2) + "\n",
                        make_manifest("mqc", params, 0));
    std::printf("wrote %s\n", args.out.c_str());
    return 0;
}

struct TelecloneArgs {
    int M = 2;
    double theta0 = M_PI / 4.0;
    double s = 0.0;
    bool s_given = false;
    std::string state_path;
    int port = 0;
    std::string clones_text;
    double x0 = 0.0;
    double p0 = 0.0;
    double s_in = 0.0;
    std::string method = "analytic";
    long long trials = 100000;
    std::string seed_text = "0";
    std::string out = "teleclone_report.json";
};

int cmd_teleclone(const TelecloneArgs& args) {
    GaussianState state;
    if (!args.state_path.empty()) {
        state = state_from_json(nlohmann::json::parse(read_text_file(args.state_path)));
        if (!is_physical(state)) {
            throw NumericalDegeneracyError("teleclone: state file violates physicality");
        }
    } else {
        // Matched resource by default: the channel's s follows the input class.
        const double s = args.s_given ? args.s : args.s_in;
        state = build_mqc(make_mqc_spec(args.M, args.theta0, s));
    }
    InputSpec input;
    input.kind = args.s_in == 0.0 ? InputSpec::Kind::Coherent : InputSpec::Kind::Squeezed;
    input.x0 = args.x0;
    input.p0 = args.p0;
    input.s_in = args.s_in;
    std::vector<int> clones;
    if (!args.clones_text.empty()) clones = parse_int_list(args.clones_text);

    TelecloneReport report;
    std::uint64_t seed = 0;
    if (args.method == "analytic") {
        report = run_teleclone_analytic(state, args.port, input, clones);
    } else if (args.method == "mc") {
        seed = parse_seed(args.seed_text);
        report = run_teleclone_mc(state, args.port, input, args.trials, seed, clones);
    } else {
        throw std::invalid_argument("--method must be 'analytic' or 'mc'");
    }
    std::printf("M = %d, method = %s\n", report.M, report.method.c_str());
    std::printf("fidelity per clone = %.12f (optimum %.12f)\n", report.fidelity_per_clone,
                report.optimal_fidelity);
    std::printf("excess noise lambda_x = %.12f, lambda_p = %.12f\n", report.lambda_x,
                report.lambda_p);
    nlohmann::json params{{"port", args.port},   {"x0", args.x0},
                          {"p0", args.p0},       {"s_in", args.s_in},
                          {"method", args.method}, {"out", args.out}};
    if (!args.state_path.empty()) {
        params["state"] = args.state_path;
    } else {
        params["M"] = args.M;
        params["theta0"] = args.theta0;
        params["s"] = args.s_given ? args.s : args.s_in;
    }
    if (args.method == "mc") params["trials"] = args.trials;
    write_with_manifest(args.out, report_to_json(report).dump(2) + "\n",
                        make_manifest("teleclone", params, seed));
    std::printf("wrote %s\n", args.out.c_str());
    return 0;
}

struct SweepArgs {
    std::string var = "M";
    double from = 2;
    double to = 10;
    int points = 0;  // 0: integer stepping for M, 9 for continuous vars
    int M = 2;
    double theta0 = M_PI / 4.0;
    double s = 0.0;
    std::string out = "sweep.csv";
};

int cmd_sweep(const SweepArgs& args) {
    const bool symmetric = args.var == "r";
    std::vector<std::string> header{"M",      "theta0",          "s",
                                    "lambda_x", "lambda_p",      "fidelity",
                                    "optimal_fidelity", "method", "squeezing_db"};
    if (symmetric) header.push_back("r");
    std::string csv = csv_row(header);

    std::vector<double> values;
    if (args.var == "M") {
        const int lo = static_cast<int>(args.from), hi = static_cast<int>(args.to);
        for (int m = lo; m <= hi; ++m) values.push_back(m);
    } else {
        const int points = args.points > 0 ? args.points : 9;
        if (points == 1 && args.to != args.from) {
            throw std::invalid_argument("sweep: one point but a nonempty range");
        }
        for (int i = 0; i < points; ++i) {
            values.push_back(points == 1 ? args.from
                                         : args.from + (args.to - args.from) * i / (points - 1));
        }
    }
    if (values.empty() || args.to < args.from) {
        throw std::invalid_argument("sweep: empty range");
    }

    for (double v : values) {
        int m = args.M;
        double theta0 = args.theta0, s = args.s, squeezing_db = 0.0;
        TelecloneReport report;
        if (symmetric) {
            const SymmetricMqcSpec spec{args.M, v, args.s};
            const GaussianState state = build_symmetric_mqc(spec);
            std::vector<int> clones(args.M);
            for (int j = 0; j < args.M; ++j) clones[j] = args.M + j;
            report = run_teleclone_analytic(state, 0, InputSpec{}, clones);
            squeezing_db = -db_magnitude(v);
            theta0 = M_PI / 4.0;
        } else {
            if (args.var == "M") m = static_cast<int>(v);
            if (args.var == "theta0") theta0 = v;
            if (args.var == "s") s = v;
            const MqcSpec spec = make_mqc_spec(m, theta0, s);
            InputSpec input;
            input.kind = s == 0.0 ? InputSpec::Kind::Coherent : InputSpec::Kind::Squeezed;
            input.s_in = s;  // matched input class
            report = run_teleclone_analytic(build_mqc(spec), 0, input);
            squeezing_db = -db_magnitude(spec.r1);
        }
        std::vector<std::string> row{std::to_string(m),
                                     format_full(theta0),
                                     format_full(s),
                                     format_full(report.lambda_x),
                                     format_full(report.lambda_p),
                                     format_full(report.fidelity_per_clone),
                                     format_full(report.optimal_fidelity),
                                     report.method,
                                     format_full(squeezing_db)};
        if (symmetric) row.push_back(format_full(v));
        csv += csv_row(row);
    }
    const nlohmann::json params{{"var", args.var}, {"from", args.from}, {"to", args.to},
                                {"points", args.points}, {"M", args.M},
                                {"theta0", args.theta0}, {"s", args.s}, {"out", args.out}};
    write_with_manifest(args.out, csv, make_manifest("sweep", params, 0));
    std::printf("wrote %s (%zu rows)\n", args.out.c_str(), values.size());
    return 0;
}

struct OptimizeArgs {
    int M = 2;
    SearchConfig config;
    std::string seed_text = "0";
    std::string target = "symmetric_noise";
    std::string config_path;
    std::string out = "optimize_result.json";
    std::string history = "optimize_history.csv";
};

int cmd_optimize(OptimizeArgs args, const CLI::App* sub) {
    if (!args.config_path.empty()) {
        const nlohmann::json j = nlohmann::json::parse(read_text_file(args.config_path));
        // Flags explicitly given on the command line still win below.
        auto load = [&](const char* key, auto& field) {
            if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
        };
        if (sub->count("--population") == 0) load("population", args.config.population);
        if (sub->count("--generations") == 0) load("generations", args.config.generations);
        if (sub->count("--sigma") == 0) load("mutation_sigma", args.config.mutation_sigma);
        if (sub->count("--mutation-rate") == 0) load("mutation_rate", args.config.mutation_rate);
        if (sub->count("--crossover-rate") == 0) load("crossover_rate", args.config.crossover_rate);
        if (sub->count("--penalty-weight") == 0) load("penalty_weight", args.config.penalty_weight);
        if (sub->count("--tolerance") == 0) load("tolerance", args.config.tolerance);
        if (sub->count("--s") == 0) load("s", args.config.s);
        if (sub->count("--target") == 0 && j.contains("target")) {
            args.target = j.at("target").get<std::string>();
        }
        if (sub->count("--seed") == 0 && j.contains("seed")) {
            args.seed_text = std::to_string(j.at("seed").get<std::uint64_t>());
        }
    }
    if (args.target == "symmetric_noise") {
        args.config.target = SearchConfig::Target::SymmetricNoise;
    } else if (args.target == "fidelity") {
        args.config.target = SearchConfig::Target::Fidelity;
    } else {
        throw std::invalid_argument("--target must be 'symmetric_noise' or 'fidelity'");
    }
    args.config.seed = parse_seed(args.seed_text);

    const SearchResult result = genetic_search(args.M, args.config);
    const SolutionAnalysis analysis = analyze_solution(result, args.M);

    std::printf("best total squeezing = %.4f dB, residual = %.3g\n", result.total_squeezing_db,
                result.constraint_residual);
    std::printf("per-mode dB (sorted):");
    for (double db : analysis.per_mode_db) std::printf(" %.4f", db);
    std::printf("\nnear-vacuum modes (< %.1f dB): %d of %d\n", kVacuumThresholdDb,
                analysis.near_vacuum_modes, args.M + 1);
    std::printf("pair structure (%d near-vacuum + squeezed pair): %s, split %.4f / %.4f dB\n",
                args.M - 1, analysis.pair_structure ? "yes" : "no", analysis.pair_db_high,
                analysis.pair_db_low);
    std::printf("converged (residual < %g): %s\n", args.config.tolerance,
                result.constraint_residual < args.config.tolerance ? "yes" : "no");

    const nlohmann::json params{{"M", args.M},
                                {"population", args.config.population},
                                {"generations", args.config.generations},
                                {"mutation_sigma", args.config.mutation_sigma},
                                {"mutation_rate", args.config.mutation_rate},
                                {"crossover_rate", args.config.crossover_rate},
                                {"penalty_weight", args.config.penalty_weight},
                                {"tolerance", args.config.tolerance},
                                {"target", args.target},
                                {"s", args.config.s},
                                {"out", args.out},
                                {"history", args.history}};
    const nlohmann::json manifest = make_manifest("optimize", params, args.config.seed);
    write_with_manifest(args.out, search_result_to_json(result, analysis).dump(2) + "\n",
                        manifest);
    std::string csv = csv_row({"generation", "best_objective", "best_total_db", "residual"});
    for (const HistoryEntry& h : result.history) {
        csv += csv_row({std::to_string(h.generation), format_full(h.best_objective),
                        format_full(h.best_total_db), format_full(h.residual)});
    }
    write_with_manifest(args.history, csv, manifest);
    std::printf("wrote %s and %s\n", args.out.c_str(), args.history.c_str());
    return 0;
}

int cmd_verify(const std::string& m_list) {
    VerifyOptions options;
    options.clone_counts = parse_int_list(m_list);
    for (int m : options.clone_counts) {
        if (m < 2) throw std::invalid_argument("verify: every M must be >= 2");
    }
    if (const char* env = std::getenv("TELECLONE_TOL")) {
        options.tolerance_override = std::stod(env);
        std::printf("tolerance override from TELECLONE_TOL: %g\n", *options.tolerance_override);
    }
    const std::vector<CheckResult> checks = run_verification(options);
    bool all_pass = true;
    for (const CheckResult& check : checks) {
        std::printf("%s %-28s %s\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str());
        all_pass = all_pass && check.pass;
    }
    std::printf("%zu checks, %s\n", checks.size(), all_pass ? "all passed" : "FAILURES present");
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"continuous-variable telecloning: channels, protocols, sweeps, optimization"};
    app.set_version_flag("--version", CVCLONE_VERSION);
    app.require_subcommand(1);

    MqcArgs mqc_args;
    CLI::App* mqc_cmd = app.add_subcommand("mqc", "build a multiuser channel state");
    mqc_cmd->add_option("--M", mqc_args.M, "receiver count (>= 2)");
    mqc_cmd->add_option("--theta0", mqc_args.theta0, "first beam-splitter angle");
    mqc_cmd->add_option("--s", mqc_args.s, "input-class squeezing parameter");
    mqc_cmd->add_option("--out", mqc_args.out, "state JSON path");

    TelecloneArgs tc_args;
    CLI::App* tc_cmd = app.add_subcommand("teleclone", "run the cloning protocol");
    tc_cmd->add_option("--M", tc_args.M, "receiver count (builds the standard resource)");
    tc_cmd->add_option("--theta0", tc_args.theta0, "resource beam-splitter angle");
    CLI::Option* s_opt = tc_cmd->add_option("--s", tc_args.s, "resource squeezing parameter");
    tc_cmd->add_option("--state", tc_args.state_path, "state JSON file (overrides --M)");
    tc_cmd->add_option("--port", tc_args.port, "port mode index");
    tc_cmd->add_option("--clones", tc_args.clones_text, "comma-separated clone mode indices");
    tc_cmd->add_option("--x0", tc_args.x0, "input mean x");
    tc_cmd->add_option("--p0", tc_args.p0, "input mean p");
    tc_cmd->add_option("--s-in", tc_args.s_in, "input squeezing parameter");
    tc_cmd->add_option("--method", tc_args.method, "analytic|mc");
    tc_cmd->add_option("--trials", tc_args.trials, "sample count for mc");
    tc_cmd->add_option("--seed", tc_args.seed_text, "integer or 'random'");
    tc_cmd->add_option("--out", tc_args.out, "report JSON path");

    SweepArgs sweep_args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "parameter sweep to CSV");
    sweep_cmd->add_option("--var", sweep_args.var, "M | theta0 | s | r");
    sweep_cmd->add_option("--from", sweep_args.from, "range start");
    sweep_cmd->add_option("--to", sweep_args.to, "range end");
    sweep_cmd->add_option("--points", sweep_args.points, "sample count for continuous sweeps");
    sweep_cmd->add_option("--M", sweep_args.M, "receiver count for non-M sweeps");
    sweep_cmd->add_option("--theta0", sweep_args.theta0, "angle for non-theta0 sweeps");
    sweep_cmd->add_option("--s", sweep_args.s, "squeezing parameter for non-s sweeps");
    sweep_cmd->add_option("--out", sweep_args.out, "CSV path");

    OptimizeArgs opt_args;
    CLI::App* opt_cmd = app.add_subcommand("optimize", "search the general circuit ansatz");
    opt_cmd->add_option("--M", opt_args.M, "receiver count");
    opt_cmd->add_option("--population", opt_args.config.population, "population size");
    opt_cmd->add_option("--generations", opt_args.config.generations, "generation count");
    opt_cmd->add_option("--sigma", opt_args.config.mutation_sigma, "mutation scale");
    opt_cmd->add_option("--mutation-rate", opt_args.config.mutation_rate, "per-gene mutation probability");
    opt_cmd->add_option("--crossover-rate", opt_args.config.crossover_rate, "crossover probability");
    opt_cmd->add_option("--penalty-weight", opt_args.config.penalty_weight, "constraint penalty weight");
    opt_cmd->add_option("--tolerance", opt_args.config.tolerance, "convergence residual");
    opt_cmd->add_option("--target", opt_args.target, "symmetric_noise | fidelity");
    opt_cmd->add_option("--s", opt_args.config.s, "target asymmetry parameter");
    opt_cmd->add_option("--seed", opt_args.seed_text, "integer or 'random'");
    opt_cmd->add_option("--config", opt_args.config_path, "JSON config file");
    opt_cmd->add_option("--out", opt_args.out, "result JSON path");
    opt_cmd->add_option("--history", opt_args.history, "history CSV path");

    std::string verify_ms = "2,3,4,5";
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the invariant suite");
    verify_cmd->add_option("--M", verify_ms, "comma-separated receiver counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (mqc_cmd->parsed()) return cmd_mqc(mqc_args);
        if (tc_cmd->parsed()) {
            tc_args.s_given = s_opt->count() > 0;
            return cmd_teleclone(tc_args);
        }
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (opt_cmd->parsed()) return cmd_optimize(opt_args, opt_cmd);
        if (verify_cmd->parsed()) return cmd_verify(verify_ms);
    } catch (const NumericalDegeneracyError& e) {
        std::cerr << "error (numeric): " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error (usage): " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error (usage): " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error (usage): " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "error (usage): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

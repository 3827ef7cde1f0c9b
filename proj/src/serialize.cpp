#include "cvclone/serialize.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "cvclone/version.hpp"

namespace cvclone {

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw std::invalid_argument("expected a matrix as nested arrays");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j.at(0).size());
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j.at(i).size()) != cols) {
            throw std::invalid_argument("ragged matrix rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace

nlohmann::json state_to_json(const GaussianState& state) {
    return {{"modes", state.num_modes},
            {"mean", vector_to_json(state.mean)},
            {"cov", matrix_to_json(state.cov)}};
}

GaussianState state_from_json(const nlohmann::json& j) {
    GaussianState state;
    state.num_modes = j.at("modes").get<int>();
    if (state.num_modes < 1) throw std::invalid_argument("state JSON: modes must be >= 1");
    const auto& mean = j.at("mean");
    const int dim = 2 * state.num_modes;
    if (static_cast<int>(mean.size()) != dim) {
        throw std::invalid_argument("state JSON: mean length mismatch");
    }
    state.mean = Eigen::VectorXd(dim);
    for (int i = 0; i < dim; ++i) state.mean(i) = mean.at(i).get<double>();
    state.cov = matrix_from_json(j.at("cov"));
    if (state.cov.rows() != dim || state.cov.cols() != dim) {
        throw std::invalid_argument("state JSON: cov shape mismatch");
    }
    return state;
}

nlohmann::json channel_to_json(const GaussianChannel& channel) {
    nlohmann::json j{{"gain", matrix_to_json(channel.gain)},
                     {"noise", matrix_to_json(channel.noise)},
                     {"clone_count", channel.clone_count}};
    if (channel.joint_noise.size() > 0) {
        j["joint_gain"] = matrix_to_json(channel.joint_gain);
        j["joint_noise"] = matrix_to_json(channel.joint_noise);
    }
    return j;
}

nlohmann::json input_to_json(const InputSpec& input) {
    return {{"kind", input.kind == InputSpec::Kind::Coherent ? "coherent" : "squeezed"},
            {"x0", input.x0},
            {"p0", input.p0},
            {"s_in", input.s_in}};
}

nlohmann::json report_to_json(const TelecloneReport& report) {
    nlohmann::json j{{"version", CVCLONE_VERSION},
                     {"M", report.M},
                     {"method", report.method},
                     {"input", input_to_json(report.input)},
                     {"channel", channel_to_json(report.channel)},
                     {"fidelity_per_clone", report.fidelity_per_clone},
                     {"optimal_fidelity", report.optimal_fidelity},
                     {"excess_noise", {report.lambda_x, report.lambda_p}},
                     {"feedforward_gain_x", report.feedforward_gain_x},
                     {"feedforward_gain_p", report.feedforward_gain_p},
                     {"clone_mean", {report.clone_mean(0), report.clone_mean(1)}}};
    if (report.method == "monte_carlo") {
        j["trials"] = report.trials;
        j["seed"] = report.seed;
        j["fidelity_std_error"] = report.fidelity_std_error;
    }
    return j;
}

nlohmann::json genome_to_json(const CircuitGenome& genome) {
    return {{"M", genome.M},
            {"xi", genome.xi},
            {"thetas", genome.thetas},
            {"phis", genome.phis},
            {"betas", genome.betas},
            {"u2", genome.u2}};
}

CircuitGenome genome_from_json(const nlohmann::json& j) {
    CircuitGenome genome = CircuitGenome::zeros(j.at("M").get<int>());
    genome.xi = j.at("xi").get<std::vector<double>>();
    genome.thetas = j.at("thetas").get<std::vector<double>>();
    genome.phis = j.at("phis").get<std::vector<double>>();
    genome.betas = j.at("betas").get<std::vector<double>>();
    const auto u2 = j.at("u2").get<std::vector<double>>();
    if (u2.size() != 4) throw std::invalid_argument("genome JSON: u2 must have 4 entries");
    std::copy(u2.begin(), u2.end(), genome.u2.begin());
    if (static_cast<int>(genome.flatten().size()) != CircuitGenome::parameter_count(genome.M)) {
        throw std::invalid_argument("genome JSON: field lengths inconsistent with M");
    }
    return genome;
}

nlohmann::json search_result_to_json(const SearchResult& result,
                                     const SolutionAnalysis& analysis) {
    return {{"version", CVCLONE_VERSION},
            {"best_genome", genome_to_json(result.best_genome)},
            {"total_squeezing_db", result.total_squeezing_db},
            {"per_mode_db", result.per_mode_db},
            {"constraint_residual", result.constraint_residual},
            {"channel", channel_to_json(result.channel)},
            {"generations", result.history.empty() ? 0 : result.history.back().generation},
            {"analysis",
             {{"per_mode_db_sorted", analysis.per_mode_db},
              {"near_vacuum_modes", analysis.near_vacuum_modes},
              {"pair_structure", analysis.pair_structure},
              {"pair_db_high", analysis.pair_db_high},
              {"pair_db_low", analysis.pair_db_low}}}};
}

std::string format_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& parameters,
                             std::uint64_t seed) {
    return {{"command", command},
            {"parameters", parameters},
            {"seed", seed},
            {"artifact_version", CVCLONE_VERSION},
            {"timestamp", iso8601_utc_now()}};
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open: " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_with_manifest(const std::string& path, const std::string& content,
                         const nlohmann::json& manifest) {
    write_text_file(path, content);
    write_text_file(path + ".manifest.json", manifest.dump(2) + "\n");
}

}  // namespace cvclone

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cvclone/mqc.hpp"
#include "cvclone/optimizer.hpp"

using namespace cvclone;

namespace {

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("genome layout and flat encoding") {
    CHECK(CircuitGenome::parameter_count(2) == 16);
    CHECK(CircuitGenome::parameter_count(3) == 24);
    const CircuitGenome z = CircuitGenome::zeros(3);
    CHECK(z.xi.size() == 4);
    CHECK(z.thetas.size() == 6);
    CHECK(z.phis.size() == 6);
    CHECK(z.betas.size() == 4);
    CHECK_THROWS_AS(CircuitGenome::zeros(1), std::invalid_argument);

    // flatten / from_flat round trip.
    std::vector<double> flat(CircuitGenome::parameter_count(2));
    for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = 0.01 * static_cast<double>(i) - 0.05;
    const CircuitGenome g = CircuitGenome::from_flat(2, flat);
    CHECK(g.flatten() == flat);
    CHECK(g.xi[0] == flat[0]);
    CHECK(g.u2[3] == flat.back());
    CHECK_THROWS_AS(CircuitGenome::from_flat(2, std::vector<double>(5, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("normalization wraps angles and caps squeezing") {
    CircuitGenome g = CircuitGenome::zeros(2);
    g.xi[0] = 5.0;
    g.xi[1] = -4.2;
    g.thetas[0] = 3.0 * M_PI / 2.0;
    g.thetas[1] = -M_PI;
    g.phis[2] = 7.0;
    g.normalize();
    CHECK(g.xi[0] == kXiBound);
    CHECK(g.xi[1] == -kXiBound);
    CHECK(std::abs(g.thetas[0] + M_PI / 2.0) < 1e-12);
    CHECK(std::abs(g.thetas[1] - M_PI) < 1e-12);  // (-pi, pi] keeps the + end
    CHECK(std::abs(g.phis[2] - (7.0 - 2.0 * M_PI)) < 1e-12);
}

TEST_CASE("all-zero genome is vacuum through a plain bell mixer") {
    for (int M : {2, 3}) {
        const CircuitGenome g = CircuitGenome::zeros(M);
        const auto [state, pre_bell] = genome_to_scheme(g);
        CHECK(max_diff(state.cov, vacuum(M + 1).cov) < 1e-12);
        CHECK(max_diff(pre_bell.matrix, bell_mixer().matrix) < 1e-12);

        // Unentangled port: unit gain works but leaves classical noise, so the
        // residual is exactly the gap 1/2 - (M-1)/(2M).
        SearchConfig config;
        const GenomeEvaluation eval = evaluate_genome(g, config);
        CHECK(eval.total_db == 0.0);
        CHECK(std::abs(eval.residual - 1.0 / (2.0 * M)) < 1e-12);
        CHECK(std::abs(eval.objective - config.penalty_weight / (2.0 * M)) < 1e-8);
    }
}

TEST_CASE("generic genomes stay physical") {
    std::vector<double> flat(CircuitGenome::parameter_count(3));
    for (std::size_t i = 0; i < flat.size(); ++i) {
        flat[i] = std::sin(17.0 * static_cast<double>(i + 1));
    }
    CircuitGenome g = CircuitGenome::from_flat(3, flat);
    g.normalize();
    const auto [state, pre_bell] = genome_to_scheme(g);
    CHECK(state.num_modes == 4);
    CHECK(is_physical(state));
    for (double nu : symplectic_eigenvalues(state)) CHECK(std::abs(nu - 0.25) < 1e-9);
    CHECK(symplectic_defect(pre_bell) < 1e-9);
}

TEST_CASE("degenerate pre-measurement transforms are penalized, not fatal") {
    CircuitGenome g = CircuitGenome::zeros(2);
    // This angle turns the pre-bell transform into a quadrature swap that
    // erases the input component from both measured quadratures.
    g.u2 = {3.0 * M_PI / 4.0, 0.0, 0.0, 0.0};
    const GenomeEvaluation eval = evaluate_genome(g, SearchConfig{});
    CHECK(eval.residual == 10.0);
    CHECK(std::abs(eval.objective - SearchConfig{}.penalty_weight * 10.0) < 1e-6);
}

TEST_CASE("hand-encoded recipe genome reproduces the known optimum") {
    for (int M = 2; M <= 5; ++M) {
        const CircuitGenome g = minimal_circuit_genome(M, M_PI / 4.0);
        const GenomeEvaluation eval = evaluate_genome(g, SearchConfig{});
        CHECK(eval.residual < 1e-9);
        CHECK(std::abs(eval.total_db - 2.0 * std::abs(equal_squeezing_db(M))) < 1e-6);
    }
    // Frozen totals for the two smallest fan-outs.
    CHECK(std::abs(evaluate_genome(minimal_circuit_genome(2, M_PI / 4.0), SearchConfig{}).total_db -
                   15.31102741351452) < 1e-9);
    CHECK(std::abs(evaluate_genome(minimal_circuit_genome(3, M_PI / 4.0), SearchConfig{}).total_db -
                   11.438950950667188) < 1e-9);

    // The genome encodes the same state the direct builder produces, also away
    // from the symmetric angle.
    for (double theta0 : {M_PI / 4.0, 0.7}) {
        const auto [state, pre_bell] = genome_to_scheme(minimal_circuit_genome(2, theta0));
        const GaussianState direct = build_mqc(make_mqc_spec(2, theta0, 0.0));
        CHECK(max_diff(state.cov, direct.cov) < 1e-9);
        CHECK(max_diff(pre_bell.matrix, bell_mixer().matrix) < 1e-12);
    }
}

TEST_CASE("search is deterministic and never regresses") {
    SearchConfig config;
    config.population = 16;
    config.generations = 25;
    config.seed = 5;
    const SearchResult a = genetic_search(2, config);
    CHECK(a.history.size() == 26);
    for (std::size_t i = 1; i < a.history.size(); ++i) {
        CHECK(a.history[i].best_objective <= a.history[i - 1].best_objective);
        CHECK(a.history[i].generation == static_cast<int>(i));
    }
    const SearchResult b = genetic_search(2, config);
    CHECK(a.best_genome.flatten() == b.best_genome.flatten());
    CHECK(a.total_squeezing_db == b.total_squeezing_db);
    CHECK(a.constraint_residual == b.constraint_residual);

    CHECK_THROWS_AS(genetic_search(1, config), std::invalid_argument);
    config.population = 2;
    CHECK_THROWS_AS(genetic_search(2, config), std::invalid_argument);
}

TEST_CASE("seeding the population with the recipe genome is never degraded") {
    SearchConfig config;
    config.population = 16;
    config.generations = 10;
    config.seed = 1;
    config.initial = {minimal_circuit_genome(2, M_PI / 4.0)};
    const SearchResult result = genetic_search(2, config);
    const double seeded_objective =
        evaluate_genome(config.initial[0], config).objective;
    CHECK(result.history.front().best_objective <= seeded_objective + 1e-9);
    for (const HistoryEntry& h : result.history) {
        CHECK(h.best_objective <= seeded_objective + 1e-9);
    }
    CHECK(result.constraint_residual < 1e-6);
    CHECK(result.total_squeezing_db <= 15.31102741351452 + 1e-6);

    CircuitGenome wrong = minimal_circuit_genome(3, M_PI / 4.0);
    config.initial = {wrong};
    CHECK_THROWS_AS(genetic_search(2, config), std::invalid_argument);
}

TEST_CASE("solution analysis recognizes the two-squeezer structure") {
    for (int M : {2, 3}) {
        const CircuitGenome g = minimal_circuit_genome(M, M_PI / 4.0);
        SearchResult result;
        result.best_genome = g;
        const GenomeEvaluation eval = evaluate_genome(g, SearchConfig{});
        result.per_mode_db = eval.per_mode_db;
        result.total_squeezing_db = eval.total_db;
        result.constraint_residual = eval.residual;
        const SolutionAnalysis analysis = analyze_solution(result, M);
        CHECK(analysis.near_vacuum_modes == M - 1);
        CHECK(analysis.pair_structure);
        CHECK(std::abs(analysis.pair_db_high - analysis.pair_db_low) < 1e-9);
        CHECK(std::abs(analysis.pair_db_high - std::abs(equal_squeezing_db(M))) < 1e-9);
        CHECK(std::abs(analysis.total_db - eval.total_db) < 1e-12);
        CHECK(analysis.per_mode_db.size() == static_cast<std::size_t>(M + 1));
        CHECK(analysis.per_mode_db.front() >= analysis.per_mode_db.back());
    }

    // Analysis of an unconverged run still reports coherent numbers.
    SearchConfig config;
    config.population = 8;
    config.generations = 3;
    const SearchResult rough = genetic_search(2, config);
    const SolutionAnalysis analysis = analyze_solution(rough, 2);
    double total = 0.0;
    for (double db : analysis.per_mode_db) total += db;
    CHECK(std::abs(analysis.total_db - total) < 1e-12);
    CHECK(analysis.residual == rough.constraint_residual);
}

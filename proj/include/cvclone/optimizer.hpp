#pragma once

#include <array>
#include <cstdint>

#include "cvclone/gaussian.hpp"
#include "cvclone/protocol.hpp"

namespace cvclone {

// dB of squeezing carried by one mode per unit |xi|: |10 log10 e^{-2|xi|}|.
inline constexpr double kDbPerXi = 8.685889638065035;
// Cap on per-mode squeezing parameters (about 26 dB).
inline constexpr double kXiBound = 3.0;

// Parameter vector of the general ansatz: M+1 single-mode squeezers, a
// triangular (M+1)-mode interferometer, and a 2-mode pre-measurement unitary
// built from two beam-splitter factors applied before the Bell mixer.
struct CircuitGenome {
    int M = 2;
    std::vector<double> xi;      // M+1
    std::vector<double> thetas;  // M(M+1)/2
    std::vector<double> phis;    // M(M+1)/2
    std::vector<double> betas;   // M+1
    std::array<double, 4> u2 = {0.0, 0.0, 0.0, 0.0};

    static int parameter_count(int M);  // M^2 + 3M + 6
    static CircuitGenome zeros(int M);
    static CircuitGenome from_flat(int M, const std::vector<double>& flat);
    std::vector<double> flatten() const;
    // Wrap all angles to (-pi, pi] and clamp |xi| to kXiBound.
    void normalize();
};

struct SearchConfig {
    enum class Target { SymmetricNoise, Fidelity };
    int population = 64;
    int generations = 500;
    double mutation_sigma = 0.5;
    double mutation_rate = 0.25;  // per-gene mutation probability
    double crossover_rate = 0.7;
    double penalty_weight = 1e4;
    Target target = Target::SymmetricNoise;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    double s = 0.0;  // scales the target noise diag(e^{2s} λ, e^{-2s} λ)
    // Genomes injected into the initial population (elitism keeps the best of
    // them from ever degrading).
    std::vector<CircuitGenome> initial;
};

struct GenomeEvaluation {
    double objective = 0.0;
    double residual = 0.0;
    double total_db = 0.0;
    std::vector<double> per_mode_db;
};

struct HistoryEntry {
    int generation = 0;
    double best_objective = 0.0;
    double best_total_db = 0.0;
    double residual = 0.0;
};

struct SearchResult {
    CircuitGenome best_genome;
    double total_squeezing_db = 0.0;
    std::vector<double> per_mode_db;
    GaussianChannel channel;
    double constraint_residual = 0.0;
    std::vector<HistoryEntry> history;
};

struct SolutionAnalysis {
    std::vector<double> per_mode_db;  // sorted descending
    int near_vacuum_modes = 0;        // entries below kVacuumThresholdDb
    bool pair_structure = false;      // exactly M-1 near-vacuum modes
    double pair_db_high = 0.0;        // squeezing split of the remaining pair
    double pair_db_low = 0.0;
    double total_db = 0.0;
    double residual = 0.0;
};

inline constexpr double kVacuumThresholdDb = 0.1;

// Realize a genome: squeezers into vacua, triangular interferometer, mode 0
// designated as port; u2 = (theta1, phi1, theta2, phi2) builds the pre-Bell
// transform bell_mixer * B(theta1, phi1) * B(theta2, phi2), so the all-zero
// genome reproduces the plain Bell mixer.
std::pair<GaussianState, SymplecticTransform> genome_to_scheme(const CircuitGenome& genome);

// Objective = total squeezing (dB) + penalty_weight * residual, where the
// residual is the max-entry deviation of the unit-gain ensemble channel from
// (identity gain, noise diag(e^{2s} λ, e^{-2s} λ)) with λ = (M-1)/(2M).
// Degenerate-port genomes receive a large finite penalty.
GenomeEvaluation evaluate_genome(const CircuitGenome& genome, const SearchConfig& config);

// Tournament/elitism genetic search over the ansatz, followed by a
// deterministic proximal Gauss-Newton refinement of the best genome (exact
// constraint projection alternated with L1 shrinkage of the squeezers). The
// result is bit-reproducible for a fixed config.
SearchResult genetic_search(int M, const SearchConfig& config);

SolutionAnalysis analyze_solution(const SearchResult& result, int M);

// Hand-encoded genome of the known construction (squeezed pair, first beam
// splitter at theta0, symmetric splitter cascade, plain Bell mixer).
CircuitGenome minimal_circuit_genome(int M, double theta0);

}  // namespace cvclone

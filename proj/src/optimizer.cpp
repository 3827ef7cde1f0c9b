#include "cvclone/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "cvclone/mqc.hpp"

namespace cvclone {

namespace {

Eigen::Matrix2cd bs2(double theta, double phi) {
    const std::complex<double> ph = std::polar(1.0, phi);
    Eigen::Matrix2cd u;
    u << ph * std::sin(theta), ph * std::cos(theta), std::cos(theta), -std::sin(theta);
    return u;
}

double wrap_angle(double a) {
    const double w = std::remainder(a, 2.0 * M_PI);
    return w <= -M_PI ? w + 2.0 * M_PI : w;
}

}  // namespace

int CircuitGenome::parameter_count(int M) { return M * M + 3 * M + 6; }

CircuitGenome CircuitGenome::zeros(int M) {
    if (M < 2) throw std::invalid_argument("CircuitGenome: M must be >= 2");
    CircuitGenome g;
    g.M = M;
    g.xi.assign(M + 1, 0.0);
    g.thetas.assign(M * (M + 1) / 2, 0.0);
    g.phis.assign(M * (M + 1) / 2, 0.0);
    g.betas.assign(M + 1, 0.0);
    return g;
}

CircuitGenome CircuitGenome::from_flat(int M, const std::vector<double>& flat) {
    if (static_cast<int>(flat.size()) != parameter_count(M)) {
        throw std::invalid_argument("CircuitGenome: flat vector has wrong length");
    }
    CircuitGenome g = zeros(M);
    std::size_t k = 0;
    for (auto& v : g.xi) v = flat[k++];
    for (auto& v : g.thetas) v = flat[k++];
    for (auto& v : g.phis) v = flat[k++];
    for (auto& v : g.betas) v = flat[k++];
    for (auto& v : g.u2) v = flat[k++];
    return g;
}

std::vector<double> CircuitGenome::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count(M));
    flat.insert(flat.end(), xi.begin(), xi.end());
    flat.insert(flat.end(), thetas.begin(), thetas.end());
    flat.insert(flat.end(), phis.begin(), phis.end());
    flat.insert(flat.end(), betas.begin(), betas.end());
    flat.insert(flat.end(), u2.begin(), u2.end());
    return flat;
}

void CircuitGenome::normalize() {
    for (auto& v : xi) v = std::clamp(v, -kXiBound, kXiBound);
    for (auto& v : thetas) v = wrap_angle(v);
    for (auto& v : phis) v = wrap_angle(v);
    for (auto& v : betas) v = wrap_angle(v);
    for (auto& v : u2) v = wrap_angle(v);
}

std::pair<GaussianState, SymplecticTransform> genome_to_scheme(const CircuitGenome& genome) {
    const int n = genome.M + 1;
    if (static_cast<int>(genome.xi.size()) != n ||
        static_cast<int>(genome.thetas.size()) != genome.M * n / 2 ||
        genome.thetas.size() != genome.phis.size() ||
        static_cast<int>(genome.betas.size()) != n) {
        throw std::invalid_argument("genome_to_scheme: field lengths inconsistent with M");
    }
    GaussianState state = vacuum(n);
    for (int m = 0; m < n; ++m) {
        state.cov(idx_x(m), idx_x(m)) = std::exp(2.0 * genome.xi[m]) * kVacuumVariance;
        state.cov(idx_p(m), idx_p(m)) = std::exp(-2.0 * genome.xi[m]) * kVacuumVariance;
    }
    state = apply_symplectic(state,
                             reck_interferometer(n, genome.thetas, genome.phis, genome.betas));
    SymplecticTransform pre_bell{bell_mixer().matrix *
                                 beam_splitter(2, 0, 1, genome.u2[0], genome.u2[1]).matrix *
                                 beam_splitter(2, 0, 1, genome.u2[2], genome.u2[3]).matrix};
    return {std::move(state), std::move(pre_bell)};
}

GenomeEvaluation evaluate_genome(const CircuitGenome& genome, const SearchConfig& config) {
    const int M = genome.M;
    GenomeEvaluation eval;
    eval.per_mode_db.reserve(M + 1);
    for (double xi : genome.xi) {
        eval.per_mode_db.push_back(kDbPerXi * std::abs(xi));
        eval.total_db += kDbPerXi * std::abs(xi);
    }

    const double lambda = (M - 1.0) / (2.0 * M);
    const double target_x = std::exp(2.0 * config.s) * lambda;
    const double target_p = std::exp(-2.0 * config.s) * lambda;
    constexpr double kDegenerateResidual = 10.0;

    const auto [state, pre_bell] = genome_to_scheme(genome);
    try {
        const auto gains = solve_unit_gain(state, 0, pre_bell);
        const GaussianChannel channel = derive_ensemble_channel(state, 0, pre_bell, gains);
        double residual = 0.0;
        for (int j = 0; j < channel.clone_count; ++j) {
            const Eigen::Matrix2d g = channel.joint_gain.block<2, 2>(2 * j, 0);
            residual = std::max(residual,
                                (g - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
            Eigen::Matrix2d noise_dev = channel.joint_noise.block<2, 2>(2 * j, 2 * j);
            noise_dev(0, 0) -= target_x;
            noise_dev(1, 1) -= target_p;
            if (config.target == SearchConfig::Target::Fidelity) {
                noise_dev.setZero();  // handled below via fidelity deviation
            }
            residual = std::max(residual, noise_dev.cwiseAbs().maxCoeff());
        }
        if (config.target == SearchConfig::Target::Fidelity) {
            InputSpec in;
            in.kind = InputSpec::Kind::Squeezed;
            in.s_in = config.s;
            const GaussianState in_state = input_state(in);
            GaussianState clone;
            clone.num_modes = 1;
            clone.mean = channel.joint_offset.head<2>();
            clone.cov = channel.gain * in_state.cov * channel.gain.transpose() + channel.noise;
            residual = std::max(residual,
                                std::abs(gaussian_fidelity(in_state, clone) - optimal_fidelity(M)));
        }
        eval.residual = residual;
    } catch (const NumericalDegeneracyError&) {
        eval.residual = kDegenerateResidual;
    }
    eval.objective = eval.total_db + config.penalty_weight * eval.residual;
    if (!std::isfinite(eval.objective)) {
        eval.residual = kDegenerateResidual;
        eval.objective = eval.total_db + config.penalty_weight * kDegenerateResidual;
    }
    return eval;
}

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

double soft_threshold(double v, double delta) {
    if (v > delta) return v - delta;
    if (v < -delta) return v + delta;
    return 0.0;
}

// Smooth constraint vector behind the scalar residual: per-clone noise-block
// deviations (or fidelity deviations) plus the gain off-diagonals. Returns
// false for degenerate-port genomes.
bool constraint_vector(const CircuitGenome& genome, const SearchConfig& config,
                       Eigen::VectorXd* out) {
    try {
        const auto [state, pre_bell] = genome_to_scheme(genome);
        const auto gains = solve_unit_gain(state, 0, pre_bell);
        const GaussianChannel ch = derive_ensemble_channel(state, 0, pre_bell, gains);
        const int M = genome.M;
        const double lambda = (M - 1.0) / (2.0 * M);
        int k = 0;
        if (config.target == SearchConfig::Target::Fidelity) {
            InputSpec in;
            in.kind = InputSpec::Kind::Squeezed;
            in.s_in = config.s;
            const GaussianState in_state = input_state(in);
            Eigen::VectorXd r(ch.clone_count + 2);
            for (int j = 0; j < ch.clone_count; ++j) {
                GaussianState clone;
                clone.num_modes = 1;
                clone.mean = Eigen::Vector2d::Zero();
                const Eigen::Matrix2d g = ch.joint_gain.block<2, 2>(2 * j, 0);
                clone.cov = g * in_state.cov * g.transpose() +
                            ch.joint_noise.block<2, 2>(2 * j, 2 * j);
                r(k++) = gaussian_fidelity(in_state, clone) - optimal_fidelity(M);
            }
            r(k++) = ch.gain(0, 1);
            r(k++) = ch.gain(1, 0);
            *out = std::move(r);
        } else {
            const double target_x = std::exp(2.0 * config.s) * lambda;
            const double target_p = std::exp(-2.0 * config.s) * lambda;
            Eigen::VectorXd r(3 * ch.clone_count + 2);
            for (int j = 0; j < ch.clone_count; ++j) {
                const Eigen::Matrix2d b = ch.joint_noise.block<2, 2>(2 * j, 2 * j);
                r(k++) = b(0, 0) - target_x;
                r(k++) = b(1, 1) - target_p;
                r(k++) = b(0, 1);
            }
            r(k++) = ch.gain(0, 1);
            r(k++) = ch.gain(1, 0);
            *out = std::move(r);
        }
        return true;
    } catch (const NumericalDegeneracyError&) {
        return false;
    }
}

// Damped Gauss-Newton projection onto the constraint manifold, numeric
// central-difference Jacobian. Deterministic; returns the input unchanged if
// the starting point is degenerate.
CircuitGenome lm_project(const CircuitGenome& start, const SearchConfig& config) {
    CircuitGenome genome = start;
    Eigen::VectorXd r;
    if (!constraint_vector(genome, config, &r)) return start;
    double cost = r.squaredNorm();
    const int n = CircuitGenome::parameter_count(genome.M);
    const double h = 1e-6;
    double mu = 1e-3;
    for (int iter = 0; iter < 60 && cost > 1e-24; ++iter) {
        const std::vector<double> flat = genome.flatten();
        Eigen::MatrixXd jac(r.size(), n);
        bool ok = true;
        for (int g = 0; g < n && ok; ++g) {
            std::vector<double> plus = flat, minus = flat;
            plus[g] += h;
            minus[g] -= h;
            Eigen::VectorXd rp, rm;
            ok = constraint_vector(CircuitGenome::from_flat(genome.M, plus), config, &rp) &&
                 constraint_vector(CircuitGenome::from_flat(genome.M, minus), config, &rm);
            if (ok) jac.col(g) = (rp - rm) / (2.0 * h);
        }
        if (!ok) break;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        bool stepped = false;
        while (mu < 1e10) {
            const Eigen::MatrixXd damped =
                jtj + mu * Eigen::MatrixXd::Identity(n, n);
            const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
            std::vector<double> next = flat;
            for (int g = 0; g < n; ++g) next[g] += delta(g);
            CircuitGenome candidate = CircuitGenome::from_flat(genome.M, next);
            candidate.normalize();
            Eigen::VectorXd rc;
            if (constraint_vector(candidate, config, &rc) && rc.squaredNorm() < cost) {
                genome = std::move(candidate);
                r = std::move(rc);
                cost = r.squaredNorm();
                mu = std::max(mu * 0.3, 1e-12);
                stepped = true;
                break;
            }
            mu *= 5.0;
        }
        if (!stepped) break;
    }
    return genome;
}

// Proximal refinement of a candidate: alternate exact re-projection with L1
// shrinkage of the squeezing genes, so the penalty constraint is met to
// machine precision while superfluous squeezers decay to vacuum.
CircuitGenome refine_genome(const CircuitGenome& start, const SearchConfig& config) {
    CircuitGenome best = lm_project(start, config);
    double best_objective = evaluate_genome(best, config).objective;
    double delta = 0.05;
    while (delta > 1e-7) {
        CircuitGenome trial = best;
        for (auto& v : trial.xi) v = soft_threshold(v, delta);
        trial = lm_project(trial, config);
        const double objective = evaluate_genome(trial, config).objective;
        if (objective < best_objective - 1e-12) {
            best = std::move(trial);
            best_objective = objective;
        } else {
            delta *= 0.5;
        }
    }
    // Snap residual near-vacuum squeezers exactly to zero when that survives
    // re-projection.
    CircuitGenome snapped = best;
    bool any = false;
    for (auto& v : snapped.xi) {
        if (v != 0.0 && kDbPerXi * std::abs(v) < kVacuumThresholdDb) {
            v = 0.0;
            any = true;
        }
    }
    if (any) {
        snapped = lm_project(snapped, config);
        if (evaluate_genome(snapped, config).objective < best_objective) {
            best = std::move(snapped);
        }
    }
    return best;
}

}  // namespace

SearchResult genetic_search(int M, const SearchConfig& config) {
    if (M < 2) throw std::invalid_argument("genetic_search: M must be >= 2");
    if (config.population < 4) throw std::invalid_argument("genetic_search: population must be >= 4");
    if (!(config.tolerance > 0.0)) throw std::invalid_argument("genetic_search: tolerance must be > 0");
    if (config.generations < 1) throw std::invalid_argument("genetic_search: generations must be >= 1");

    const int length = CircuitGenome::parameter_count(M);
    std::mt19937_64 rng(mix_seed(config.seed, 0x67656e65ULL));

    const auto random_genome = [&]() {
        CircuitGenome g = CircuitGenome::zeros(M);
        for (auto& v : g.xi) v = 0.5 * standard_normal(rng);
        for (auto& v : g.thetas) v = M_PI * (2.0 * uniform01(rng) - 1.0);
        for (auto& v : g.phis) v = M_PI * (2.0 * uniform01(rng) - 1.0);
        for (auto& v : g.betas) v = M_PI * (2.0 * uniform01(rng) - 1.0);
        for (auto& v : g.u2) v = 0.5 * standard_normal(rng);
        g.normalize();
        return g;
    };

    std::vector<CircuitGenome> pop(config.population);
    std::vector<GenomeEvaluation> evals(config.population);
    for (int i = 0; i < config.population; ++i) {
        if (i < static_cast<int>(config.initial.size())) {
            pop[i] = config.initial[i];
            if (pop[i].M != M) throw std::invalid_argument("genetic_search: seeded genome has wrong M");
        } else {
            pop[i] = random_genome();
        }
        evals[i] = evaluate_genome(pop[i], config);
    }

    const auto best_index = [&]() {
        int best = 0;
        for (int i = 1; i < config.population; ++i) {
            if (evals[i].objective < evals[best].objective) best = i;
        }
        return best;
    };
    const auto tournament = [&]() {
        int winner = static_cast<int>(uniform_index(rng, config.population));
        for (int k = 1; k < 3; ++k) {
            const int challenger = static_cast<int>(uniform_index(rng, config.population));
            if (evals[challenger].objective < evals[winner].objective) winner = challenger;
        }
        return winner;
    };

    SearchResult result;
    result.history.reserve(config.generations + 1);
    const auto record = [&](int generation) {
        const int b = best_index();
        result.history.push_back({generation, evals[b].objective, evals[b].total_db,
                                  evals[b].residual});
    };
    record(0);

    for (int gen = 1; gen <= config.generations; ++gen) {
        const double sigma = config.mutation_sigma * std::pow(0.995, gen);
        // Keep the two best individuals unchanged.
        int first = best_index();
        int second = first == 0 ? 1 : 0;
        for (int i = 0; i < config.population; ++i) {
            if (i == first) continue;
            if (evals[i].objective < evals[second].objective) second = i;
        }
        std::vector<CircuitGenome> next;
        std::vector<GenomeEvaluation> next_evals;
        next.reserve(config.population);
        next_evals.reserve(config.population);
        next.push_back(pop[first]);
        next_evals.push_back(evals[first]);
        next.push_back(pop[second]);
        next_evals.push_back(evals[second]);
        while (static_cast<int>(next.size()) < config.population) {
            std::vector<double> child = pop[tournament()].flatten();
            if (uniform01(rng) < config.crossover_rate) {
                const std::vector<double> other = pop[tournament()].flatten();
                for (int g = 0; g < length; ++g) {
                    if (uniform01(rng) < 0.5) child[g] = other[g];
                }
            }
            for (int g = 0; g < length; ++g) {
                if (uniform01(rng) < config.mutation_rate) {
                    // Log-uniform step-size mixture: coarse moves early in the
                    // run, fine tuning near convergence.
                    const double scale = std::pow(10.0, -4.0 * uniform01(rng));
                    child[g] += sigma * scale * standard_normal(rng);
                }
            }
            CircuitGenome genome = CircuitGenome::from_flat(M, child);
            genome.normalize();
            next_evals.push_back(evaluate_genome(genome, config));
            next.push_back(std::move(genome));
        }
        pop = std::move(next);
        evals = std::move(next_evals);
        record(gen);

        // Memetic checkpoints: pull the two current leaders onto the
        // constraint manifold so selection can exploit feasible circuits.
        if (gen % 250 == 0 && gen < config.generations) {
            int lead = best_index();
            int runner = -1;
            for (int i = 0; i < config.population; ++i) {
                if (i == lead) continue;
                if (runner < 0 || evals[i].objective < evals[runner].objective) runner = i;
            }
            for (int idx : {lead, runner}) {
                if (idx < 0) continue;
                CircuitGenome refined = refine_genome(pop[idx], config);
                const GenomeEvaluation eval = evaluate_genome(refined, config);
                if (eval.objective < evals[idx].objective) {
                    pop[idx] = std::move(refined);
                    evals[idx] = eval;
                }
            }
            // Refined random probes compete with the incumbents, so a
            // population that collapsed into an infeasible attractor can
            // still be rescued by a feasible restart.
            for (int k = 0; k < 2; ++k) {
                CircuitGenome probe = refine_genome(random_genome(), config);
                const GenomeEvaluation eval = evaluate_genome(probe, config);
                int worst = 0;
                for (int i = 1; i < config.population; ++i) {
                    if (evals[i].objective > evals[worst].objective) worst = i;
                }
                if (eval.objective < evals[worst].objective) {
                    pop[worst] = std::move(probe);
                    evals[worst] = eval;
                }
            }
        }
    }

    const int b = best_index();
    result.best_genome = pop[b];
    GenomeEvaluation best_eval = evals[b];
    // Evolution finds the basin; a deterministic local refinement settles the
    // constraints to machine precision and prunes unused squeezers.
    CircuitGenome refined = refine_genome(pop[b], config);
    const GenomeEvaluation refined_eval = evaluate_genome(refined, config);
    if (refined_eval.objective < best_eval.objective) {
        result.best_genome = std::move(refined);
        best_eval = refined_eval;
    }
    result.total_squeezing_db = best_eval.total_db;
    result.per_mode_db = best_eval.per_mode_db;
    result.constraint_residual = best_eval.residual;
    const auto [state, pre_bell] = genome_to_scheme(result.best_genome);
    try {
        const auto gains = solve_unit_gain(state, 0, pre_bell);
        result.channel = derive_ensemble_channel(state, 0, pre_bell, gains);
    } catch (const NumericalDegeneracyError&) {
        result.channel = GaussianChannel{};
    }
    return result;
}

SolutionAnalysis analyze_solution(const SearchResult& result, int M) {
    SolutionAnalysis analysis;
    analysis.per_mode_db = result.per_mode_db;
    std::sort(analysis.per_mode_db.begin(), analysis.per_mode_db.end(), std::greater<>());
    for (double db : analysis.per_mode_db) {
        if (db < kVacuumThresholdDb) ++analysis.near_vacuum_modes;
        analysis.total_db += db;
    }
    analysis.pair_structure = analysis.near_vacuum_modes == M - 1;
    if (analysis.per_mode_db.size() >= 2) {
        analysis.pair_db_high = analysis.per_mode_db[0];
        analysis.pair_db_low = analysis.per_mode_db[1];
    }
    analysis.residual = result.constraint_residual;
    return analysis;
}

CircuitGenome minimal_circuit_genome(int M, double theta0) {
    const auto [r1, r2] = solve_squeezing(M, theta0);
    const int n = M + 1;
    CircuitGenome genome = CircuitGenome::zeros(M);
    genome.xi[0] = r1;
    genome.xi[1] = -r2;

    // Interferometer of the known recipe: first beam splitter on (0, 1), then
    // the symmetric splitter cascade over modes 1..M.
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(n, n);
    {
        const Eigen::Matrix2cd b = bs2(theta0, 0.0);
        u(0, 0) = b(0, 0);
        u(0, 1) = b(0, 1);
        u(1, 0) = b(1, 0);
        u(1, 1) = b(1, 1);
    }
    for (int j = 0; j + 1 < M; ++j) {
        const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(M - j)));
        Eigen::MatrixXcd step = Eigen::MatrixXcd::Identity(n, n);
        const Eigen::Matrix2cd b = bs2(theta, 0.0);
        const int k = 1 + j, l = 2 + j;
        step(k, k) = b(0, 0);
        step(k, l) = b(0, 1);
        step(l, k) = b(1, 0);
        step(l, l) = b(1, 1);
        u = (step * u).eval();
    }
    const ReckParams params = reck_params_from_unitary(u);
    genome.thetas = params.thetas;
    genome.phis = params.phis;
    genome.betas = params.betas;
    return genome;
}

}  // namespace cvclone

// Acceptance gate: every release-blocking property of the simulator and the
// optimizer, one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "cvclone/mqc.hpp"
#include "cvclone/optimizer.hpp"
#include "cvclone/protocol.hpp"
#include "cvclone/verify.hpp"

using namespace cvclone;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("%s: %-32s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
}

std::string deviation(double value, double bound) {
    std::ostringstream out;
    out << "max deviation " << value << " (tolerance " << bound << ")";
    return out.str();
}

GaussianState standard_resource(int M, double s = 0.0) {
    return build_mqc(make_mqc_spec(M, M_PI / 4.0, s));
}

void check_fidelity_table() {
    double dev = 0.0;
    for (int M = 2; M <= 10; ++M) {
        const TelecloneReport r = run_teleclone_analytic(standard_resource(M), 0, InputSpec{});
        dev = std::max(dev, std::abs(r.fidelity_per_clone - M / (2.0 * M - 1.0)));
    }
    report("clone-fidelity-table", dev <= 1e-10, deviation(dev, 1e-10));
}

void check_noise_table() {
    double dev = 0.0;
    for (int M = 2; M <= 10; ++M) {
        const TelecloneReport r = run_teleclone_analytic(standard_resource(M), 0, InputSpec{});
        dev = std::max(dev, std::abs(r.lambda_x - (M - 1) / (2.0 * M)));
        dev = std::max(dev, std::abs(r.lambda_p - (M - 1) / (2.0 * M)));
        dev = std::max(dev, std::abs(r.channel.noise(0, 1)));
    }
    report("excess-noise-table", dev <= 1e-10, deviation(dev, 1e-10));
}

void check_circuit_vs_closed_form() {
    double dev = 0.0;
    for (int M = 2; M <= 6; ++M) {
        const auto [lo, hi] = theta0_interval(M);
        for (double s : {-0.5, 0.0, 0.5}) {
            for (int k = 1; k <= 5; ++k) {
                const MqcSpec spec = make_mqc_spec(M, lo + k / 6.0 * (hi - lo), s);
                dev = std::max(dev, (build_mqc(spec).cov - closed_form_covariance(spec).cov)
                                        .cwiseAbs()
                                        .maxCoeff());
            }
        }
    }
    report("circuit-vs-closed-form", dev <= 1e-10, deviation(dev, 1e-10));
}

void check_squeezing_budget() {
    const double table[] = {-7.66, -5.72, -4.77, -4.18};
    double dev = 0.0;
    for (int M = 2; M <= 5; ++M) {
        dev = std::max(dev, std::abs(equal_squeezing_db(M) - table[M - 2]));
    }
    report("squeezing-budget-table", dev <= 0.01, deviation(dev, 0.01));
}

void check_squeezed_inputs() {
    double dev = 0.0;
    for (double s : {-0.5, 0.5}) {
        InputSpec input;
        input.kind = InputSpec::Kind::Squeezed;
        input.s_in = s;
        for (int M : {2, 3, 4}) {
            const TelecloneReport r = run_teleclone_analytic(standard_resource(M, s), 0, input);
            const double lambda = (M - 1) / (2.0 * M);
            dev = std::max(dev, std::abs(r.fidelity_per_clone - optimal_fidelity(M)));
            dev = std::max(dev, std::abs(r.lambda_x - std::exp(2.0 * s) * lambda));
            dev = std::max(dev, std::abs(r.lambda_p - std::exp(-2.0 * s) * lambda));
        }
    }
    report("squeezed-input-matching", dev <= 1e-10, deviation(dev, 1e-10));
}

void check_sampled_protocol() {
    const long long trials = 100000;
    InputSpec input;
    input.x0 = 1.3;
    input.p0 = -0.7;
    const GaussianState state = standard_resource(2);
    const TelecloneReport analytic = run_teleclone_analytic(state, 0, input);
    const TelecloneReport mc = run_teleclone_mc(state, 0, input, trials, 2026);
    const double f_gap = std::abs(mc.fidelity_per_clone - 2.0 / 3.0);
    const double n_gap = (mc.channel.noise - analytic.channel.noise).cwiseAbs().maxCoeff();
    const double n_tol = 5.0 / std::sqrt(static_cast<double>(trials));
    const bool ok = mc.fidelity_std_error > 0.0 && f_gap <= 3.0 * mc.fidelity_std_error &&
                    n_gap <= n_tol;
    std::ostringstream detail;
    detail << "fidelity gap " << f_gap << " vs 3*SE " << 3.0 * mc.fidelity_std_error
           << ", noise gap " << n_gap << " (tolerance " << n_tol << ")";
    report("sampled-protocol-convergence", ok, detail.str());
}

void check_two_sided_resource() {
    bool ok = true;
    std::ostringstream detail;
    for (int M : {2, 3}) {
        std::vector<int> receivers(M);
        for (int j = 0; j < M; ++j) receivers[j] = M + j;
        double previous = 0.0;
        double last = 0.0;
        for (double r : {0.5, 1.0, 2.0, 3.0}) {
            const GaussianState state = build_symmetric_mqc({M, r, 0.0});
            const TelecloneReport rep = run_teleclone_analytic(state, 0, InputSpec{}, receivers);
            ok = ok && rep.fidelity_per_clone > previous;
            previous = rep.fidelity_per_clone;
            last = rep.fidelity_per_clone;
            for (int port = 1; port < M; ++port) {
                const TelecloneReport other =
                    run_teleclone_analytic(state, port, InputSpec{}, receivers);
                ok = ok && std::abs(other.fidelity_per_clone - rep.fidelity_per_clone) <= 1e-10;
            }
        }
        ok = ok && last >= 0.99 * optimal_fidelity(M);
        detail << "M=" << M << " F(r=3)=" << last << " vs 0.99*opt "
               << 0.99 * optimal_fidelity(M) << "; ";
    }
    report("two-sided-resource-quality", ok, detail.str());
}

void check_search_convergence() {
    const auto start = std::chrono::steady_clock::now();
    bool ok = true;
    std::ostringstream detail;
    for (int M : {2, 3}) {
        const double target_db = 2.0 * std::abs(equal_squeezing_db(M));
        int converged = 0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            SearchConfig config;
            config.population = 64;
            config.generations = 1000;
            config.seed = seed;
            const SearchResult result = genetic_search(M, config);
            const SolutionAnalysis analysis = analyze_solution(result, M);
            const bool hit = result.constraint_residual < 1e-6 &&
                             std::abs(analysis.total_db - target_db) <= 0.02 * target_db &&
                             analysis.near_vacuum_modes == M - 1;
            if (hit) ++converged;
            std::printf("  info: search M=%d seed=%llu residual=%.3g total=%.4f dB "
                        "(target %.4f) near-vacuum=%d -> %s\n",
                        M, static_cast<unsigned long long>(seed), result.constraint_residual,
                        analysis.total_db, target_db, analysis.near_vacuum_modes,
                        hit ? "converged" : "missed");
        }
        ok = ok && converged >= 3;
        detail << "M=" << M << ": " << converged << "/5 seeds converged; ";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ok = ok && elapsed < 600.0;
    detail << "wall " << elapsed << " s (budget 600)";
    report("circuit-search-convergence", ok, detail.str());
}

void check_verification_suite() {
    VerifyOptions options;
    options.clone_counts = {2, 3, 4, 5};
    bool all_pass = true;
    std::string first_failure;
    for (const CheckResult& check : run_verification(options)) {
        if (!check.pass && first_failure.empty()) first_failure = check.name;
        all_pass = all_pass && check.pass;
    }
    std::string detail = all_pass ? "all library checks pass" : "first failure: " + first_failure;
    if (const char* bin = std::getenv("CVCLONE_BIN")) {
        const std::string cmd = std::string(bin) + " verify --M 2,3,4,5 > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        const bool cli_ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
        all_pass = all_pass && cli_ok;
        detail += cli_ok ? "; CLI verify exit 0" : "; CLI verify FAILED";
    }
    report("verification-suite", all_pass, detail);
}

}  // namespace

int main() {
    check_fidelity_table();
    check_noise_table();
    check_circuit_vs_closed_form();
    check_squeezing_budget();
    check_squeezed_inputs();
    check_sampled_protocol();
    check_two_sided_resource();
    check_search_convergence();
    check_verification_suite();
    if (failures) {
        std::printf("%d criterion(s) FAILED\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cvclone/mqc.hpp"
#include "cvclone/protocol.hpp"

using namespace cvclone;

namespace {

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

GaussianState standard_resource(int M, double s = 0.0) {
    return build_mqc(make_mqc_spec(M, M_PI / 4.0, s));
}

}  // namespace

TEST_CASE("bell mixer difference/sum convention") {
    const Eigen::MatrixXd b = bell_mixer().matrix;
    const double isq = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(b(0, 0) - isq) < 1e-15);
    CHECK(std::abs(b(0, 2) + isq) < 1e-15);  // x_u = (x_in - x_port)/sqrt2
    CHECK(std::abs(b(3, 1) - isq) < 1e-15);
    CHECK(std::abs(b(3, 3) - isq) < 1e-15);  // p_v = (p_in + p_port)/sqrt2
    CHECK(b(0, 1) == 0.0);
    CHECK(b(0, 3) == 0.0);
    CHECK(symplectic_defect(bell_mixer()) < 1e-15);
}

TEST_CASE("input states carry means and the squeezed-class covariance") {
    InputSpec spec;
    spec.x0 = 1.5;
    spec.p0 = -0.5;
    spec.s_in = 0.7;  // ignored for coherent inputs
    const GaussianState c = input_state(spec);
    CHECK(c.mean(0) == 1.5);
    CHECK(max_diff(c.cov, vacuum(1).cov) == 0.0);

    spec.kind = InputSpec::Kind::Squeezed;
    const GaussianState s = input_state(spec);
    CHECK(std::abs(s.cov(0, 0) - std::exp(1.4) / 4.0) < 1e-15);
    CHECK(std::abs(s.cov(1, 1) - std::exp(-1.4) / 4.0) < 1e-15);
    CHECK(s.mean(1) == -0.5);

    spec.x0 = std::nan("");
    CHECK_THROWS_AS(input_state(spec), std::invalid_argument);
}

TEST_CASE("unit-gain feedforward uses sqrt(2) for the bell mixer") {
    const GaussianState state = standard_resource(2);
    const auto [gx, gp] = solve_unit_gain(state, 0, bell_mixer());
    CHECK(std::abs(gx - std::sqrt(2.0)) < 1e-12);
    CHECK(std::abs(gp - std::sqrt(2.0)) < 1e-12);
    // A pre-measurement transform that never sees the input cannot be
    // compensated by any gain.
    CHECK_THROWS_AS(solve_unit_gain(state, 0, identity_transform(2)), DegeneratePortError);
    CHECK_THROWS_AS(solve_unit_gain(state, 7, bell_mixer()), std::invalid_argument);
}

TEST_CASE("ensemble channel of the standard resource") {
    for (int M = 2; M <= 10; ++M) {
        const GaussianState state = standard_resource(M);
        const auto gains = solve_unit_gain(state, 0, bell_mixer());
        const GaussianChannel ch = derive_ensemble_channel(state, 0, bell_mixer(), gains);
        CHECK(ch.clone_count == M);
        CHECK(max_diff(ch.gain, Eigen::Matrix2d::Identity()) < 1e-12);
        const double lambda = (M - 1) / (2.0 * M);
        CHECK(std::abs(ch.noise(0, 0) - lambda) < 1e-10);
        CHECK(std::abs(ch.noise(1, 1) - lambda) < 1e-10);
        CHECK(std::abs(ch.noise(0, 1)) < 1e-10);
        CHECK(ch.joint_offset.cwiseAbs().maxCoeff() < 1e-12);
        // Identical couplings for every clone.
        for (int j = 0; j < M; ++j) {
            CHECK(std::abs(ch.joint_gain(2 * j, 0) - 1.0) < 1e-12);
            CHECK(std::abs(ch.joint_gain(2 * j + 1, 1) - 1.0) < 1e-12);
            CHECK(std::abs(ch.joint_gain(2 * j, 1)) < 1e-12);
        }
    }
}

TEST_CASE("all clones see the same marginal, jointly symmetric output") {
    const GaussianState state = standard_resource(3);
    const auto gains = solve_unit_gain(state, 0, bell_mixer());
    const GaussianChannel ch = derive_ensemble_channel(state, 0, bell_mixer(), gains);
    const Eigen::MatrixXd joint = joint_output_covariance(ch, vacuum(1).cov);
    CHECK(joint.rows() == 6);
    // Per-clone marginal equals gain V gain^T + noise of the ensemble channel.
    CHECK(max_diff(joint.topLeftCorner<2, 2>(), vacuum(1).cov + ch.noise) < 1e-12);
    const SymmetryCheck check = verify_output_symmetry(joint);
    CHECK(check.symmetric);
    CHECK(check.max_deviation < 1e-12);

    Eigen::MatrixXd broken = joint;
    broken(0, 0) += 1e-6;
    CHECK_FALSE(verify_output_symmetry(broken).symmetric);
    CHECK(verify_output_symmetry(broken).max_deviation > 1e-7);

    CHECK_THROWS_AS(verify_output_symmetry(Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
}

TEST_CASE("vacuum resource reduces to the classical benchmark noise") {
    const GaussianState no_entanglement = vacuum(2);
    const auto gains = solve_unit_gain(no_entanglement, 1, bell_mixer());
    const GaussianChannel ch = derive_ensemble_channel(no_entanglement, 1, bell_mixer(), gains);
    CHECK(max_diff(ch.noise, classical_channel().noise) < 1e-12);
    CHECK(max_diff(ch.gain, classical_channel().gain) < 1e-12);
}

TEST_CASE("closed-form fidelity and its benchmarks") {
    for (double lambda : {0.05, 0.25, 0.4, 1.0}) {
        CHECK(std::abs(clone_fidelity(lambda, lambda, 0.0) - 1.0 / (1.0 + 2.0 * lambda)) < 1e-14);
    }
    CHECK(std::abs(clone_fidelity(0.25, 0.25, 0.0) - 2.0 / 3.0) < 1e-14);
    CHECK(std::abs(clone_fidelity(0.5, 0.5, 0.0) - 0.5) < 1e-14);  // classical benchmark
    // Matched asymmetric noise restores the symmetric fidelity for any s.
    for (double s : {-0.7, 0.3, 1.1}) {
        CHECK(std::abs(clone_fidelity(0.25 * std::exp(2.0 * s), 0.25 * std::exp(-2.0 * s), s) -
                       2.0 / 3.0) < 1e-14);
        // Unmatched symmetric noise does strictly worse on squeezed inputs.
        CHECK(clone_fidelity(0.25, 0.25, s) < 2.0 / 3.0 - 1e-3);
    }
    CHECK_THROWS_AS(clone_fidelity(-0.1, 0.25, 0.0), std::invalid_argument);

    CHECK(optimal_fidelity(1) == 1.0);
    CHECK(std::abs(optimal_fidelity(2) - 2.0 / 3.0) < 1e-15);
    CHECK(std::abs(optimal_fidelity(5) - 5.0 / 9.0) < 1e-15);
    CHECK_THROWS_AS(optimal_fidelity(0), std::invalid_argument);
}

TEST_CASE("analytic protocol run hits the optimal point") {
    for (int M : {2, 3, 5, 10}) {
        const TelecloneReport report =
            run_teleclone_analytic(standard_resource(M), 0, InputSpec{});
        CHECK(report.M == M);
        CHECK(report.method == "analytic");
        CHECK(std::abs(report.fidelity_per_clone - optimal_fidelity(M)) < 1e-10);
        CHECK(std::abs(report.lambda_x - (M - 1) / (2.0 * M)) < 1e-10);
        CHECK(std::abs(report.lambda_p - (M - 1) / (2.0 * M)) < 1e-10);
        CHECK(std::abs(report.feedforward_gain_x - std::sqrt(2.0)) < 1e-12);
        // Two independent fidelity paths: overlap integral vs closed form.
        CHECK(std::abs(report.fidelity_per_clone -
                       clone_fidelity(report.lambda_x, report.lambda_p, 0.0)) < 1e-12);
    }
}

TEST_CASE("fidelity is independent of the input mean") {
    const GaussianState state = standard_resource(2);
    InputSpec at_origin;
    InputSpec displaced;
    displaced.x0 = 7.0;
    displaced.p0 = -3.0;
    const TelecloneReport a = run_teleclone_analytic(state, 0, at_origin);
    const TelecloneReport b = run_teleclone_analytic(state, 0, displaced);
    CHECK(std::abs(a.fidelity_per_clone - b.fidelity_per_clone) < 1e-12);
    // Unit gain: the clone mean reproduces the input mean exactly.
    CHECK(std::abs(b.clone_mean(0) - 7.0) < 1e-10);
    CHECK(std::abs(b.clone_mean(1) + 3.0) < 1e-10);
}

TEST_CASE("matched resource is optimal for the squeezed input class") {
    const double s = 0.5;
    InputSpec input;
    input.kind = InputSpec::Kind::Squeezed;
    input.s_in = s;
    for (int M : {2, 3}) {
        const double lambda = (M - 1) / (2.0 * M);
        const TelecloneReport matched =
            run_teleclone_analytic(standard_resource(M, s), 0, input);
        CHECK(std::abs(matched.fidelity_per_clone - optimal_fidelity(M)) < 1e-10);
        CHECK(std::abs(matched.lambda_x - std::exp(2.0 * s) * lambda) < 1e-10);
        CHECK(std::abs(matched.lambda_p - std::exp(-2.0 * s) * lambda) < 1e-10);
        // The coherent-tuned resource is strictly worse for this input.
        const TelecloneReport mismatched =
            run_teleclone_analytic(standard_resource(M, 0.0), 0, input);
        CHECK(mismatched.fidelity_per_clone < matched.fidelity_per_clone - 1e-3);
    }
    // Same for the opposite squeezing direction.
    input.s_in = -0.5;
    const TelecloneReport flipped =
        run_teleclone_analytic(standard_resource(2, -0.5), 0, input);
    CHECK(std::abs(flipped.fidelity_per_clone - 2.0 / 3.0) < 1e-10);
}

TEST_CASE("clone subsets and defaults") {
    const GaussianState state = standard_resource(3);
    CHECK(default_clones(state, 0) == std::vector<int>{1, 2, 3});
    CHECK(default_clones(state, 2) == std::vector<int>{0, 1, 3});
    const auto gains = solve_unit_gain(state, 0, bell_mixer());
    const GaussianChannel one = derive_ensemble_channel(state, 0, bell_mixer(), gains, {2});
    CHECK(one.clone_count == 1);
    CHECK(one.joint_noise.rows() == 2);
    // Any single receiver sees the ensemble marginal.
    const GaussianChannel all = derive_ensemble_channel(state, 0, bell_mixer(), gains);
    CHECK(max_diff(one.noise, all.noise) < 1e-12);
    CHECK_THROWS_AS(derive_ensemble_channel(state, 0, bell_mixer(), gains, {0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(derive_ensemble_channel(state, 0, bell_mixer(), gains, {9}),
                    std::invalid_argument);
}

TEST_CASE("two-sided resource: port choice is free, quality grows with squeezing") {
    for (int M : {2, 3}) {
        std::vector<int> receivers(M);
        for (int j = 0; j < M; ++j) receivers[j] = M + j;
        double previous = 0.0;
        for (double r : {0.5, 1.0, 2.0, 3.0}) {
            const GaussianState state = build_symmetric_mqc({M, r, 0.0});
            const TelecloneReport report =
                run_teleclone_analytic(state, 0, InputSpec{}, receivers);
            const double lambda = (M - 1) / (2.0 * M) + std::exp(-2.0 * r) / (2.0 * M);
            CHECK(std::abs(report.lambda_x - lambda) < 1e-10);
            CHECK(std::abs(report.lambda_p - lambda) < 1e-10);
            CHECK(report.fidelity_per_clone > previous);
            previous = report.fidelity_per_clone;
            // Any mode of the left side serves equally well as the port.
            for (int port = 1; port < M; ++port) {
                const TelecloneReport other =
                    run_teleclone_analytic(state, port, InputSpec{}, receivers);
                CHECK(std::abs(other.fidelity_per_clone - report.fidelity_per_clone) < 1e-10);
            }
        }
        // Frozen endpoints of the sweep.
        const double expect = M == 2 ? 0.6661162876007323 : 0.5997026971268289;
        CHECK(std::abs(previous - expect) < 1e-12);
        CHECK(previous >= 0.99 * optimal_fidelity(M));
    }
}

TEST_CASE("sampled protocol converges to the exact channel") {
    const GaussianState state = standard_resource(2);
    InputSpec input;
    input.x0 = 1.3;
    input.p0 = -0.7;
    const long long trials = 100000;
    const TelecloneReport mc = run_teleclone_mc(state, 0, input, trials, 11);
    CHECK(mc.method == "monte_carlo");
    CHECK(mc.trials == trials);
    CHECK(mc.seed == 11);
    CHECK(mc.M == 2);
    CHECK(mc.fidelity_std_error > 0.0);
    CHECK(mc.fidelity_std_error < 0.01);
    CHECK(std::abs(mc.fidelity_per_clone - 2.0 / 3.0) < 3.0 * mc.fidelity_std_error);
    CHECK(std::abs(mc.clone_mean(0) - 1.3) < 0.02);
    CHECK(std::abs(mc.clone_mean(1) + 0.7) < 0.02);
    const double tol = 4.0 / std::sqrt(static_cast<double>(trials));
    const Eigen::Matrix2d exact = 0.25 * Eigen::Matrix2d::Identity();
    CHECK(max_diff(mc.channel.noise, exact) < tol);
    CHECK(std::abs(mc.feedforward_gain_x - std::sqrt(2.0)) < 1e-12);

    // Bitwise deterministic for a fixed seed.
    const TelecloneReport again = run_teleclone_mc(state, 0, input, trials, 11);
    CHECK(again.fidelity_per_clone == mc.fidelity_per_clone);
    CHECK(again.lambda_x == mc.lambda_x);
    CHECK(again.fidelity_std_error == mc.fidelity_std_error);
    CHECK(again.clone_mean(0) == mc.clone_mean(0));
    const TelecloneReport other = run_teleclone_mc(state, 0, input, trials, 12);
    CHECK(other.fidelity_per_clone != mc.fidelity_per_clone);

    CHECK_THROWS_AS(run_teleclone_mc(state, 0, input, 0, 1), std::invalid_argument);
}

TEST_CASE("sampled noise estimate does not depend on the input mean") {
    const GaussianState state = standard_resource(2);
    InputSpec centered;
    InputSpec shifted;
    shifted.x0 = 5.0;
    shifted.p0 = 5.0;
    const TelecloneReport a = run_teleclone_mc(state, 0, centered, 20000, 3);
    const TelecloneReport b = run_teleclone_mc(state, 0, shifted, 20000, 3);
    CHECK(std::abs(a.lambda_x - b.lambda_x) < 1e-6);
    CHECK(std::abs(a.lambda_p - b.lambda_p) < 1e-6);
    CHECK(std::abs(a.fidelity_per_clone - b.fidelity_per_clone) < 1e-4);
}

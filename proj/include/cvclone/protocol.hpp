#pragma once

#include <cstdint>
#include <string>

#include "cvclone/gaussian.hpp"

namespace cvclone {

// Raised when the measured quadratures carry no input-signal component, so no
// feedforward gain can restore the input mean.
struct DegeneratePortError : NumericalDegeneracyError {
    using NumericalDegeneracyError::NumericalDegeneracyError;
};

// Ensemble description of the cloning map: every clone sees the input through
// the same affine channel  V_out = gain V_in gain^T + noise.
struct GaussianChannel {
    Eigen::Matrix2d gain = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d noise = Eigen::Matrix2d::Zero();
    int clone_count = 0;
    // Joint data across all clones: input coefficients (2M x 2), added noise
    // covariance (2M x 2M) and the mean offset inherited from the resource
    // state (2M, zero for all states built here).
    Eigen::MatrixXd joint_gain;
    Eigen::MatrixXd joint_noise;
    Eigen::VectorXd joint_offset;
};

struct InputSpec {
    enum class Kind { Coherent, Squeezed };
    Kind kind = Kind::Coherent;
    double x0 = 0.0;
    double p0 = 0.0;
    double s_in = 0.0;  // x-variance e^{2s}/4, p-variance e^{-2s}/4
};

// Single-mode Gaussian state described by an InputSpec.
GaussianState input_state(const InputSpec& input);

struct TelecloneReport {
    int M = 0;
    GaussianChannel channel;
    double fidelity_per_clone = 0.0;
    double optimal_fidelity = 0.0;
    double lambda_x = 0.0;
    double lambda_p = 0.0;
    double feedforward_gain_x = 0.0;
    double feedforward_gain_p = 0.0;
    std::string method;  // "analytic" or "monte_carlo"
    long long trials = 0;          // monte_carlo only
    std::uint64_t seed = 0;        // monte_carlo only
    double fidelity_std_error = 0.0;  // monte_carlo only, jackknife
    Eigen::Vector2d clone_mean = Eigen::Vector2d::Zero();
    InputSpec input;
};

// The 50:50 mixer used for Bell detection: measured quadratures become
// x_u = (x_in - x_port)/sqrt(2) on pair-mode 0 and
// p_v = (p_in + p_port)/sqrt(2) on pair-mode 1.
SymplecticTransform bell_mixer();

// All modes of the resource state except the port (the default clone set).
std::vector<int> default_clones(const GaussianState& mqc_state, int port);

// Exact Heisenberg-picture ensemble channel of the protocol: mix input and
// port through pre_bell, measure (x, p) on pair-modes (0, 1), displace every
// clone quadrature by its gain times the outcome. gains = (g_x, g_p).
GaussianChannel derive_ensemble_channel(const GaussianState& mqc_state, int port,
                                        const SymplecticTransform& pre_bell,
                                        const std::pair<double, double>& gains,
                                        const std::vector<int>& clones = {});

// Feedforward gains that give every clone unit gain on the input means.
std::pair<double, double> solve_unit_gain(const GaussianState& mqc_state, int port,
                                          const SymplecticTransform& pre_bell);

// Closed-form single-clone fidelity for the squeezed input class:
// F = 2 / sqrt[(4 lambda_x e^{-4s} + 2 e^{-2s})(4 lambda_p e^{4s} + 2 e^{2s})].
double clone_fidelity(double lambda_x, double lambda_p, double s_in);

// Best achievable symmetric 1->M coherent-state cloning fidelity M/(2M-1).
double optimal_fidelity(int M);

// Measure-and-resend benchmark: unit gain with noise diag(1/2, 1/2).
GaussianChannel classical_channel();

struct SymmetryCheck {
    bool symmetric = false;
    double max_deviation = 0.0;
};

// True iff every transposition of two clone modes leaves the joint covariance
// invariant within tol.
SymmetryCheck verify_output_symmetry(const Eigen::MatrixXd& joint_cov, double tol = 1e-10);

// Joint output covariance across all clones for a given input covariance.
Eigen::MatrixXd joint_output_covariance(const GaussianChannel& channel,
                                        const Eigen::Matrix2d& input_cov);

TelecloneReport run_teleclone_analytic(const GaussianState& mqc_state, int port,
                                       const InputSpec& input,
                                       const std::vector<int>& clones = {});

// Sampled protocol: per-trial homodyne outcomes, feedforward displacements,
// moment estimates with Bessel correction and jackknife standard errors over
// 100 blocks. Deterministic for a fixed seed.
TelecloneReport run_teleclone_mc(const GaussianState& mqc_state, int port, const InputSpec& input,
                                 long long trials, std::uint64_t seed,
                                 const std::vector<int>& clones = {});

}  // namespace cvclone

#include "cvclone/protocol.hpp"

#include <cmath>

namespace cvclone {

namespace {

void check_port(const GaussianState& mqc_state, int port) {
    if (port < 0 || port >= mqc_state.num_modes) {
        throw std::invalid_argument("port index out of range");
    }
}

std::vector<int> resolve_clones(const GaussianState& mqc_state, int port,
                                const std::vector<int>& clones) {
    if (clones.empty()) return default_clones(mqc_state, port);
    for (int c : clones) {
        if (c < 0 || c >= mqc_state.num_modes || c == port) {
            throw std::invalid_argument("clone index out of range or equal to port");
        }
    }
    return clones;
}

}  // namespace

GaussianState input_state(const InputSpec& input) {
    if (!std::isfinite(input.x0) || !std::isfinite(input.p0) || !std::isfinite(input.s_in)) {
        throw std::invalid_argument("input_state: fields must be finite");
    }
    const double s = input.kind == InputSpec::Kind::Squeezed ? input.s_in : 0.0;
    GaussianState state = squeezed_vacuum(s, /*squeeze_p=*/true);
    state.mean(0) = input.x0;
    state.mean(1) = input.p0;
    return state;
}

SymplecticTransform bell_mixer() {
    Eigen::Matrix2cd u;
    u << 1.0, -1.0, 1.0, 1.0;
    u /= std::sqrt(2.0);
    return unitary_to_symplectic(u);
}

std::vector<int> default_clones(const GaussianState& mqc_state, int port) {
    check_port(mqc_state, port);
    std::vector<int> clones;
    clones.reserve(mqc_state.num_modes - 1);
    for (int m = 0; m < mqc_state.num_modes; ++m) {
        if (m != port) clones.push_back(m);
    }
    return clones;
}

GaussianChannel derive_ensemble_channel(const GaussianState& mqc_state, int port,
                                        const SymplecticTransform& pre_bell,
                                        const std::pair<double, double>& gains,
                                        const std::vector<int>& clones) {
    check_port(mqc_state, port);
    if (pre_bell.matrix.rows() != 4 || pre_bell.matrix.cols() != 4) {
        throw std::invalid_argument("derive_ensemble_channel: pre_bell must act on 2 modes");
    }
    if (symplectic_defect(pre_bell) > 1e-9) {
        throw std::invalid_argument("derive_ensemble_channel: pre_bell is not symplectic");
    }
    const std::vector<int> clone_modes = resolve_clones(mqc_state, port, clones);
    const int m_count = static_cast<int>(clone_modes.size());
    const int dim = 2 * mqc_state.num_modes;
    const auto [gx, gp] = gains;
    const Eigen::Matrix4d& s = pre_bell.matrix;

    // Measured quadratures over the (input, port) pair in the original basis:
    // x_u = row 0 of pre_bell, p_v = row 3.
    GaussianChannel ch;
    ch.clone_count = m_count;
    ch.joint_gain = Eigen::MatrixXd::Zero(2 * m_count, 2);
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(2 * m_count, dim);
    for (int j = 0; j < m_count; ++j) {
        const int c = clone_modes[j];
        ch.joint_gain(2 * j, 0) = gx * s(0, 0);
        ch.joint_gain(2 * j, 1) = gx * s(0, 1);
        ch.joint_gain(2 * j + 1, 0) = gp * s(3, 0);
        ch.joint_gain(2 * j + 1, 1) = gp * s(3, 1);
        rows(2 * j, idx_x(c)) += 1.0;
        rows(2 * j, idx_x(port)) += gx * s(0, 2);
        rows(2 * j, idx_p(port)) += gx * s(0, 3);
        rows(2 * j + 1, idx_p(c)) += 1.0;
        rows(2 * j + 1, idx_x(port)) += gp * s(3, 2);
        rows(2 * j + 1, idx_p(port)) += gp * s(3, 3);
    }
    ch.joint_noise = rows * mqc_state.cov * rows.transpose();
    ch.joint_offset = rows * mqc_state.mean;
    ch.gain = ch.joint_gain.topRows<2>();
    ch.noise = ch.joint_noise.topLeftCorner<2, 2>();
    return ch;
}

std::pair<double, double> solve_unit_gain(const GaussianState& mqc_state, int port,
                                          const SymplecticTransform& pre_bell) {
    check_port(mqc_state, port);
    if (pre_bell.matrix.rows() != 4 || pre_bell.matrix.cols() != 4) {
        throw std::invalid_argument("solve_unit_gain: pre_bell must act on 2 modes");
    }
    const double cx = pre_bell.matrix(0, 0);  // x_in coefficient in the measured x
    const double cp = pre_bell.matrix(3, 1);  // p_in coefficient in the measured p
    if (std::abs(cx) < 1e-12 || std::abs(cp) < 1e-12) {
        throw DegeneratePortError(
            "solve_unit_gain: measured quadratures carry no input component");
    }
    return {1.0 / cx, 1.0 / cp};
}

double clone_fidelity(double lambda_x, double lambda_p, double s_in) {
    if (lambda_x < 0.0 || lambda_p < 0.0) {
        throw std::invalid_argument("clone_fidelity: noise variances must be >= 0");
    }
    const double fx = 4.0 * lambda_x * std::exp(-4.0 * s_in) + 2.0 * std::exp(-2.0 * s_in);
    const double fp = 4.0 * lambda_p * std::exp(4.0 * s_in) + 2.0 * std::exp(2.0 * s_in);
    return 2.0 / std::sqrt(fx * fp);
}

double optimal_fidelity(int M) {
    if (M < 1) throw std::invalid_argument("optimal_fidelity: M must be >= 1");
    return static_cast<double>(M) / (2.0 * M - 1.0);
}

GaussianChannel classical_channel() {
    GaussianChannel ch;
    ch.gain = Eigen::Matrix2d::Identity();
    ch.noise = 0.5 * Eigen::Matrix2d::Identity();
    ch.clone_count = 0;  // measure-and-resend broadcast; count immaterial
    return ch;
}

SymmetryCheck verify_output_symmetry(const Eigen::MatrixXd& joint_cov, double tol) {
    const int dim = static_cast<int>(joint_cov.rows());
    if (joint_cov.cols() != dim || dim % 2 != 0 || dim == 0) {
        throw std::invalid_argument("verify_output_symmetry: expected a 2M x 2M matrix");
    }
    const int m_count = dim / 2;
    SymmetryCheck check;
    for (int a = 0; a < m_count; ++a) {
        for (int b = a + 1; b < m_count; ++b) {
            std::vector<int> perm(dim);
            for (int i = 0; i < dim; ++i) perm[i] = i;
            std::swap(perm[2 * a], perm[2 * b]);
            std::swap(perm[2 * a + 1], perm[2 * b + 1]);
            double dev = 0.0;
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j)
                    dev = std::max(dev,
                                   std::abs(joint_cov(perm[i], perm[j]) - joint_cov(i, j)));
            check.max_deviation = std::max(check.max_deviation, dev);
        }
    }
    check.symmetric = check.max_deviation <= tol;
    return check;
}

Eigen::MatrixXd joint_output_covariance(const GaussianChannel& channel,
                                        const Eigen::Matrix2d& input_cov) {
    return channel.joint_gain * input_cov * channel.joint_gain.transpose() + channel.joint_noise;
}

namespace {

TelecloneReport make_base_report(const GaussianChannel& channel,
                                 const std::pair<double, double>& gains,
                                 const InputSpec& input) {
    TelecloneReport report;
    report.M = channel.clone_count;
    report.channel = channel;
    report.lambda_x = channel.noise(0, 0);
    report.lambda_p = channel.noise(1, 1);
    report.optimal_fidelity = optimal_fidelity(channel.clone_count);
    report.feedforward_gain_x = gains.first;
    report.feedforward_gain_p = gains.second;
    report.input = input;
    return report;
}

}  // namespace

TelecloneReport run_teleclone_analytic(const GaussianState& mqc_state, int port,
                                       const InputSpec& input, const std::vector<int>& clones) {
    const auto gains = solve_unit_gain(mqc_state, port, bell_mixer());
    const GaussianChannel channel =
        derive_ensemble_channel(mqc_state, port, bell_mixer(), gains, clones);
    const GaussianState in_state = input_state(input);
    GaussianState clone;
    clone.num_modes = 1;
    clone.mean = channel.gain * in_state.mean + channel.joint_offset.head<2>();
    clone.cov = channel.gain * in_state.cov * channel.gain.transpose() + channel.noise;
    TelecloneReport report = make_base_report(channel, gains, input);
    report.method = "analytic";
    report.fidelity_per_clone = gaussian_fidelity(in_state, clone);
    report.clone_mean = clone.mean;
    return report;
}

TelecloneReport run_teleclone_mc(const GaussianState& mqc_state, int port, const InputSpec& input,
                                 long long trials, std::uint64_t seed,
                                 const std::vector<int>& clones) {
    if (trials < 1) throw std::invalid_argument("run_teleclone_mc: trials must be >= 1");
    const auto gains = solve_unit_gain(mqc_state, port, bell_mixer());
    const GaussianChannel channel =
        derive_ensemble_channel(mqc_state, port, bell_mixer(), gains, clones);
    const std::vector<int> clone_modes = resolve_clones(mqc_state, port, clones);
    const GaussianState in_state = input_state(input);

    // Extended register: input at mode 0, resource shifted up by one.
    const GaussianState extended = tensor(in_state, mqc_state);
    const int n_ext = extended.num_modes;
    const GaussianState premixed = apply_symplectic(
        extended, embed_transform(bell_mixer(), n_ext, {0, port + 1}));
    // After measuring extended mode 0 the resource keeps its own indices;
    // after measuring the port, indices above it drop by one.
    const int first_clone = clone_modes[0] - (clone_modes[0] > port ? 1 : 0);

    const long long block_count = std::min<long long>(100, trials);
    std::vector<Eigen::Vector2d> block_sum(block_count, Eigen::Vector2d::Zero());
    std::vector<Eigen::Matrix2d> block_sq(block_count, Eigen::Matrix2d::Zero());
    std::vector<long long> block_n(block_count, 0);
    Eigen::Matrix2d cond_cov = Eigen::Matrix2d::Zero();

    for (long long t = 0; t < trials; ++t) {
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        auto [u, after_u] = homodyne(premixed, 0, Quadrature::X, rng);
        auto [v, after_v] = homodyne(after_u, port, Quadrature::P, rng);
        const double dx = gains.first * u.value;
        const double dp = gains.second * v.value;
        Eigen::Vector2d mean(after_v.mean(idx_x(first_clone)) + dx,
                             after_v.mean(idx_p(first_clone)) + dp);
        if (t == 0) {
            cond_cov = after_v.cov.block<2, 2>(idx_x(first_clone), idx_x(first_clone));
        }
        const long long b = t * block_count / trials;
        block_sum[b] += mean;
        block_sq[b] += mean * mean.transpose();
        block_n[b] += 1;
    }

    Eigen::Vector2d total_sum = Eigen::Vector2d::Zero();
    Eigen::Matrix2d total_sq = Eigen::Matrix2d::Zero();
    for (long long b = 0; b < block_count; ++b) {
        total_sum += block_sum[b];
        total_sq += block_sq[b];
    }
    const auto output_estimate = [&](const Eigen::Vector2d& sum, const Eigen::Matrix2d& sq,
                                     long long n) {
        GaussianState out;
        out.num_modes = 1;
        out.mean = sum / static_cast<double>(n);
        Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
        if (n > 1) {
            scatter = (sq - static_cast<double>(n) * out.mean * out.mean.transpose()) /
                      static_cast<double>(n - 1);
        }
        out.cov = cond_cov + scatter;
        return out;
    };

    const GaussianState estimate = output_estimate(total_sum, total_sq, trials);
    TelecloneReport report = make_base_report(channel, gains, input);
    report.method = "monte_carlo";
    report.trials = trials;
    report.seed = seed;
    report.fidelity_per_clone = gaussian_fidelity(in_state, estimate);
    report.clone_mean = estimate.mean;
    report.channel.noise =
        estimate.cov - channel.gain * in_state.cov * channel.gain.transpose();
    report.lambda_x = report.channel.noise(0, 0);
    report.lambda_p = report.channel.noise(1, 1);

    if (block_count > 1) {
        std::vector<double> jack(block_count);
        double jack_mean = 0.0;
        for (long long b = 0; b < block_count; ++b) {
            const GaussianState leave_out = output_estimate(
                total_sum - block_sum[b], total_sq - block_sq[b], trials - block_n[b]);
            jack[b] = gaussian_fidelity(in_state, leave_out);
            jack_mean += jack[b];
        }
        jack_mean /= static_cast<double>(block_count);
        double var = 0.0;
        for (double f : jack) var += (f - jack_mean) * (f - jack_mean);
        report.fidelity_std_error =
            std::sqrt(var * static_cast<double>(block_count - 1) / block_count);
    }
    return report;
}

}  // namespace cvclone

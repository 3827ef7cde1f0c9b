#include "cvclone/mqc.hpp"

#include <cmath>
#include <sstream>

namespace cvclone {

std::pair<double, double> theta0_interval(int M) {
    if (M < 2) throw std::invalid_argument("theta0_interval: M must be >= 2");
    const double m = static_cast<double>(M);
    return {std::asin(1.0 / std::sqrt(m + 1.0)), std::asin(std::sqrt(m / (m + 1.0)))};
}

std::pair<double, double> solve_squeezing(int M, double theta0) {
    const auto [lo, hi] = theta0_interval(M);
    if (!(theta0 > lo + kThetaMargin)) {
        std::ostringstream msg;
        msg << "solve_squeezing: theta0 = " << theta0
            << " at or below the lower bound asin(1/sqrt(M+1)) = " << lo
            << " (forces infinite r1)";
        throw std::domain_error(msg.str());
    }
    if (!(theta0 < hi - kThetaMargin)) {
        std::ostringstream msg;
        msg << "solve_squeezing: theta0 = " << theta0
            << " at or above the upper bound asin(sqrt(M/(M+1))) = " << hi
            << " (forces infinite r2)";
        throw std::domain_error(msg.str());
    }
    const double rootm = std::sqrt(static_cast<double>(M));
    const double sn = std::sin(theta0), cs = std::cos(theta0);
    const double q1 = (rootm * sn - cs) / (rootm * sn + cs);
    const double q2 = (rootm * cs - sn) / (rootm * cs + sn);
    return {-0.5 * std::log(q1), -0.5 * std::log(q2)};
}

double equal_squeezing_db(int M) {
    if (M < 2) throw std::invalid_argument("equal_squeezing_db: M must be >= 2");
    const double rootm = std::sqrt(static_cast<double>(M));
    return 10.0 * std::log10((rootm - 1.0) / (rootm + 1.0));
}

MqcSpec make_mqc_spec(int M, double theta0, double s) {
    if (M < 2) throw std::invalid_argument("make_mqc_spec: M must be >= 2");
    if (!std::isfinite(theta0) || !std::isfinite(s)) {
        throw std::invalid_argument("make_mqc_spec: parameters must be finite");
    }
    MqcSpec spec;
    spec.M = M;
    spec.theta0 = theta0;
    spec.s = s;
    std::tie(spec.r1, spec.r2) = solve_squeezing(M, theta0);
    return spec;
}

GaussianState build_mqc(const MqcSpec& spec) {
    const int M = spec.M;
    if (M < 2) throw std::invalid_argument("build_mqc: M must be >= 2");
    // Mode 0: p-squeezed by r1+s; mode 1: x-squeezed by r2-s; modes 2..M:
    // ancillas p-squeezed by s.
    GaussianState state = tensor(squeezed_vacuum(spec.r1 + spec.s, /*squeeze_p=*/true),
                                 squeezed_vacuum(spec.r2 - spec.s, /*squeeze_p=*/false));
    for (int m = 2; m <= M; ++m) {
        state = tensor(state, squeezed_vacuum(spec.s, /*squeeze_p=*/true));
    }
    state = apply_symplectic(state, beam_splitter(M + 1, 0, 1, spec.theta0, 0.0));
    std::vector<int> receiver_modes(M);
    for (int m = 0; m < M; ++m) receiver_modes[m] = m + 1;
    state = apply_symplectic(state, embed_transform(m_splitter(M), M + 1, receiver_modes));
    return state;
}

GaussianState closed_form_covariance(const MqcSpec& spec) {
    const int M = spec.M;
    if (M < 2) throw std::invalid_argument("closed_form_covariance: M must be >= 2");
    const int n = M + 1;
    const double sn = std::sin(spec.theta0), cs = std::cos(spec.theta0);
    const double rootm = std::sqrt(static_cast<double>(M));

    // Linear combinations of the Wigner exponent, identical for the x and p
    // blocks up to the sign of the weight exponents.
    Eigen::VectorXd a = Eigen::VectorXd::Constant(n, cs / rootm);
    a(0) = sn;
    Eigen::VectorXd b = Eigen::VectorXd::Constant(n, -sn / rootm);
    b(0) = cs;

    const auto quad_form = [&](double sign) {
        // sign = -1 builds the x block, +1 the p block.
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
        q += 2.0 * std::exp(sign * 2.0 * (spec.s + spec.r1)) * a * a.transpose();
        q += 2.0 * std::exp(sign * 2.0 * (spec.s - spec.r2)) * b * b.transpose();
        const double w = std::exp(sign * 2.0 * spec.s) / static_cast<double>(M);
        for (int i = 1; i < n; ++i) {
            for (int j = 1; j < n; ++j) {
                if (i == j) continue;
                q(i, i) += w;
                q(j, j) += w;
                q(i, j) -= w;
                q(j, i) -= w;
            }
        }
        return q;
    };

    const Eigen::MatrixXd vx = 0.5 * invert_checked(quad_form(-1.0), "closed_form_covariance");
    const Eigen::MatrixXd vp = 0.5 * invert_checked(quad_form(+1.0), "closed_form_covariance");

    GaussianState state;
    state.num_modes = n;
    state.mean = Eigen::VectorXd::Zero(2 * n);
    state.cov = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            state.cov(idx_x(i), idx_x(j)) = vx(i, j);
            state.cov(idx_p(i), idx_p(j)) = vp(i, j);
        }
    }
    return state;
}

GaussianState build_symmetric_mqc(const SymmetricMqcSpec& spec) {
    const int M = spec.M;
    if (M < 1) throw std::invalid_argument("build_symmetric_mqc: M must be >= 1");
    if (!(std::isfinite(spec.r) && spec.r >= 0.0)) {
        throw std::invalid_argument("build_symmetric_mqc: r must be finite and >= 0");
    }
    const int n = 2 * M;
    // EPR halves at slot 0 of each side (modes 0 and M); ancillas fill the rest.
    GaussianState state = vacuum(n);
    for (int side = 0; side < 2; ++side) {
        for (int m = 1; m < M; ++m) {
            const int mode = side * M + m;
            state.cov(idx_x(mode), idx_x(mode)) = std::exp(2.0 * spec.s) * kVacuumVariance;
            state.cov(idx_p(mode), idx_p(mode)) = std::exp(-2.0 * spec.s) * kVacuumVariance;
        }
    }
    state = apply_symplectic(state, squeezer(n, 0, spec.r));
    state = apply_symplectic(state, squeezer(n, M, -spec.r));
    state = apply_symplectic(state, beam_splitter(n, 0, M, M_PI / 4.0, 0.0));
    std::vector<int> left(M), right(M);
    for (int m = 0; m < M; ++m) {
        left[m] = m;
        right[m] = M + m;
    }
    const SymplecticTransform splitter = m_splitter(M);
    state = apply_symplectic(state, embed_transform(splitter, n, left));
    state = apply_symplectic(state, embed_transform(splitter, n, right));
    return state;
}

}  // namespace cvclone

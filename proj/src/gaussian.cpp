#include "cvclone/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>

namespace cvclone {

namespace {

void check_mode(const GaussianState& state, int mode) {
    if (mode < 0 || mode >= state.num_modes) {
        throw std::invalid_argument("mode index out of range");
    }
}

void check_state_shape(const GaussianState& state) {
    const int d = 2 * state.num_modes;
    if (state.mean.size() != d || state.cov.rows() != d || state.cov.cols() != d) {
        throw std::invalid_argument("state dimensions inconsistent with num_modes");
    }
}

}  // namespace

Eigen::MatrixXd symplectic_form(int num_modes) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * num_modes, 2 * num_modes);
    for (int m = 0; m < num_modes; ++m) {
        omega(idx_x(m), idx_p(m)) = 1.0;
        omega(idx_p(m), idx_x(m)) = -1.0;
    }
    return omega;
}

double symplectic_defect(const SymplecticTransform& s) {
    const int n = s.num_modes();
    const Eigen::MatrixXd omega = symplectic_form(n);
    return (s.matrix * omega * s.matrix.transpose() - omega).cwiseAbs().maxCoeff();
}

GaussianState vacuum(int num_modes) {
    if (num_modes < 1) throw std::invalid_argument("vacuum: need at least one mode");
    GaussianState state;
    state.num_modes = num_modes;
    state.mean = Eigen::VectorXd::Zero(2 * num_modes);
    state.cov = kVacuumVariance * Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes);
    return state;
}

GaussianState squeezed_vacuum(double r, bool squeeze_p) {
    if (!std::isfinite(r)) throw std::invalid_argument("squeezed_vacuum: r must be finite");
    GaussianState state = vacuum(1);
    const double up = std::exp(2.0 * r) * kVacuumVariance;
    const double down = std::exp(-2.0 * r) * kVacuumVariance;
    state.cov(0, 0) = squeeze_p ? up : down;
    state.cov(1, 1) = squeeze_p ? down : up;
    return state;
}

GaussianState coherent(double x0, double p0) {
    GaussianState state = vacuum(1);
    state.mean(0) = x0;
    state.mean(1) = p0;
    return state;
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
    check_state_shape(a);
    check_state_shape(b);
    GaussianState out;
    out.num_modes = a.num_modes + b.num_modes;
    const int da = 2 * a.num_modes, db = 2 * b.num_modes;
    out.mean = Eigen::VectorXd::Zero(da + db);
    out.mean.head(da) = a.mean;
    out.mean.tail(db) = b.mean;
    out.cov = Eigen::MatrixXd::Zero(da + db, da + db);
    out.cov.topLeftCorner(da, da) = a.cov;
    out.cov.bottomRightCorner(db, db) = b.cov;
    return out;
}

GaussianState apply_symplectic(const GaussianState& state, const SymplecticTransform& s) {
    check_state_shape(state);
    if (s.matrix.rows() != state.mean.size()) {
        throw std::invalid_argument("apply_symplectic: dimension mismatch");
    }
    GaussianState out;
    out.num_modes = state.num_modes;
    out.mean = s.matrix * state.mean;
    out.cov = s.matrix * state.cov * s.matrix.transpose();
    return out;
}

GaussianState displace(const GaussianState& state, int mode, double dx, double dp) {
    check_mode(state, mode);
    GaussianState out = state;
    out.mean(idx_x(mode)) += dx;
    out.mean(idx_p(mode)) += dp;
    return out;
}

GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep) {
    check_state_shape(state);
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    for (int m : keep) check_mode(state, m);
    GaussianState out;
    out.num_modes = static_cast<int>(keep.size());
    out.mean = Eigen::VectorXd::Zero(2 * out.num_modes);
    out.cov = Eigen::MatrixXd::Zero(2 * out.num_modes, 2 * out.num_modes);
    for (int i = 0; i < out.num_modes; ++i) {
        out.mean(idx_x(i)) = state.mean(idx_x(keep[i]));
        out.mean(idx_p(i)) = state.mean(idx_p(keep[i]));
        for (int j = 0; j < out.num_modes; ++j) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    out.cov(2 * i + a, 2 * j + b) = state.cov(2 * keep[i] + a, 2 * keep[j] + b);
        }
    }
    return out;
}

SymplecticTransform identity_transform(int num_modes) {
    return {Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes)};
}

SymplecticTransform unitary_to_symplectic(const Eigen::MatrixXcd& u) {
    const int n = static_cast<int>(u.rows());
    if (u.cols() != n) throw std::invalid_argument("unitary_to_symplectic: square matrix required");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            const double re = u(j, k).real(), im = u(j, k).imag();
            s(2 * j, 2 * k) = re;
            s(2 * j, 2 * k + 1) = -im;
            s(2 * j + 1, 2 * k) = im;
            s(2 * j + 1, 2 * k + 1) = re;
        }
    }
    return {std::move(s)};
}

namespace {

// 2x2 mode-operator matrix of B_{kl}(theta, phi).
Eigen::Matrix2cd beam_splitter_unitary(double theta, double phi) {
    const std::complex<double> ph = std::polar(1.0, phi);
    Eigen::Matrix2cd u;
    u << ph * std::sin(theta), ph * std::cos(theta), std::cos(theta), -std::sin(theta);
    return u;
}

}  // namespace

SymplecticTransform beam_splitter(int num_modes, int k, int l, double theta, double phi) {
    if (k == l) throw std::invalid_argument("beam_splitter: k and l must differ");
    if (k < 0 || l < 0 || k >= num_modes || l >= num_modes) {
        throw std::invalid_argument("beam_splitter: mode index out of range");
    }
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(num_modes, num_modes);
    const Eigen::Matrix2cd b = beam_splitter_unitary(theta, phi);
    u(k, k) = b(0, 0);
    u(k, l) = b(0, 1);
    u(l, k) = b(1, 0);
    u(l, l) = b(1, 1);
    return unitary_to_symplectic(u);
}

SymplecticTransform squeezer(int num_modes, int k, double r) {
    if (k < 0 || k >= num_modes) throw std::invalid_argument("squeezer: mode index out of range");
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes);
    s(idx_x(k), idx_x(k)) = std::exp(r);
    s(idx_p(k), idx_p(k)) = std::exp(-r);
    return {std::move(s)};
}

SymplecticTransform phase_shift(int num_modes, int k, double beta) {
    if (k < 0 || k >= num_modes) throw std::invalid_argument("phase_shift: mode index out of range");
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(num_modes, num_modes);
    u(k, k) = std::polar(1.0, beta);
    return unitary_to_symplectic(u);
}

SymplecticTransform m_splitter(int num_output_modes) {
    const int m = num_output_modes;
    if (m < 1) throw std::invalid_argument("m_splitter: need at least one mode");
    SymplecticTransform total = identity_transform(m);
    // Rightmost factor B_{1,2}(asin 1/sqrtM) acts first.
    for (int j = 0; j + 1 < m; ++j) {
        const double theta = std::asin(1.0 / std::sqrt(static_cast<double>(m - j)));
        total.matrix = (beam_splitter(m, j, j + 1, theta, 0.0).matrix * total.matrix).eval();
    }
    return total;
}

Eigen::MatrixXcd reck_unitary(int num_modes, const std::vector<double>& thetas,
                              const std::vector<double>& phis, const std::vector<double>& betas) {
    const int n = num_modes;
    const std::size_t pairs = static_cast<std::size_t>(n) * (n - 1) / 2;
    if (thetas.size() != pairs || phis.size() != pairs) {
        throw std::invalid_argument("reck_unitary: expected n(n-1)/2 (theta, phi) pairs");
    }
    if (betas.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("reck_unitary: expected n betas");
    }
    Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(n, n);
    std::size_t idx = 0;
    for (int l = n - 1; l >= 1; --l) {
        for (int k = l - 1; k >= 0; --k) {
            Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(n, n);
            const Eigen::Matrix2cd f = beam_splitter_unitary(thetas[idx], phis[idx]);
            b(k, k) = f(0, 0);
            b(k, l) = f(0, 1);
            b(l, k) = f(1, 0);
            b(l, l) = f(1, 1);
            prod = (prod * b).eval();
            ++idx;
        }
    }
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Identity(n, n);
    for (int j = 0; j < n; ++j) d(j, j) = std::polar(1.0, betas[j]);
    // U = (B... D)^{-1}; the product is unitary, so invert via adjoint.
    return (prod * d).adjoint();
}

SymplecticTransform reck_interferometer(int num_modes, const std::vector<double>& thetas,
                                        const std::vector<double>& phis,
                                        const std::vector<double>& betas) {
    return unitary_to_symplectic(reck_unitary(num_modes, thetas, phis, betas));
}

ReckParams reck_params_from_unitary(const Eigen::MatrixXcd& u) {
    const int n = static_cast<int>(u.rows());
    if (u.cols() != n || n < 1) {
        throw std::invalid_argument("reck_params_from_unitary: square matrix required");
    }
    if ((u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("reck_params_from_unitary: input is not unitary");
    }
    ReckParams params;
    Eigen::MatrixXcd w = u.adjoint();  // = (B... D), to be peeled from the left
    for (int l = n - 1; l >= 1; --l) {
        for (int k = l - 1; k >= 0; --k) {
            const double rho_k = std::abs(w(k, l));
            const double rho_l = std::abs(w(l, l));
            const double theta = std::atan2(rho_l, rho_k);
            double phi = 0.0;
            if (rho_k > 1e-15 && rho_l > 1e-15) {
                phi = std::arg(w(k, l)) - std::arg(w(l, l)) - M_PI;
                phi = std::remainder(phi, 2.0 * M_PI);
            }
            const Eigen::Matrix2cd b = beam_splitter_unitary(theta, phi);
            // w <- B^dagger w on rows (k, l); zeroes entry (k, l).
            const Eigen::RowVectorXcd row_k = w.row(k), row_l = w.row(l);
            w.row(k) = std::conj(b(0, 0)) * row_k + std::conj(b(1, 0)) * row_l;
            w.row(l) = std::conj(b(0, 1)) * row_k + std::conj(b(1, 1)) * row_l;
            params.thetas.push_back(theta);
            params.phis.push_back(phi);
        }
    }
    params.betas.resize(n);
    for (int j = 0; j < n; ++j) params.betas[j] = std::arg(w(j, j));
    return params;
}

SymplecticTransform embed_transform(const SymplecticTransform& s, int num_modes,
                                    const std::vector<int>& modes) {
    if (static_cast<int>(modes.size()) != s.num_modes()) {
        throw std::invalid_argument("embed_transform: mode list size mismatch");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Identity(2 * num_modes, 2 * num_modes);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (modes[i] < 0 || modes[i] >= num_modes) {
            throw std::invalid_argument("embed_transform: mode index out of range");
        }
        for (std::size_t j = 0; j < modes.size(); ++j) {
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    out(2 * modes[i] + a, 2 * modes[j] + b) = s.matrix(2 * i + a, 2 * j + b);
        }
    }
    return {std::move(out)};
}

namespace {

std::pair<HomodyneOutcome, GaussianState> homodyne_impl(const GaussianState& state, int mode,
                                                        Quadrature quadrature, double outcome) {
    check_state_shape(state);
    check_mode(state, mode);
    if (state.num_modes < 2) {
        throw std::invalid_argument("homodyne: register must keep at least one mode");
    }
    const int q = quadrature == Quadrature::X ? idx_x(mode) : idx_p(mode);
    const double v = state.cov(q, q);
    if (v < 1e-14) {
        throw NumericalDegeneracyError("homodyne: measured variance is degenerate");
    }
    const int d = 2 * state.num_modes;
    std::vector<int> rest;
    rest.reserve(d - 2);
    for (int i = 0; i < d; ++i) {
        if (i != idx_x(mode) && i != idx_p(mode)) rest.push_back(i);
    }
    GaussianState out;
    out.num_modes = state.num_modes - 1;
    out.mean = Eigen::VectorXd::Zero(d - 2);
    out.cov = Eigen::MatrixXd::Zero(d - 2, d - 2);
    Eigen::VectorXd cross(d - 2);
    for (int i = 0; i < d - 2; ++i) cross(i) = state.cov(rest[i], q);
    const double shift = (outcome - state.mean(q)) / v;
    for (int i = 0; i < d - 2; ++i) out.mean(i) = state.mean(rest[i]) + cross(i) * shift;
    for (int i = 0; i < d - 2; ++i)
        for (int j = 0; j < d - 2; ++j)
            out.cov(i, j) = state.cov(rest[i], rest[j]) - cross(i) * cross(j) / v;
    HomodyneOutcome result{quadrature, mode, outcome};
    return {result, std::move(out)};
}

}  // namespace

std::pair<HomodyneOutcome, GaussianState> homodyne(const GaussianState& state, int mode,
                                                   Quadrature quadrature, std::mt19937_64& rng) {
    const int q = quadrature == Quadrature::X ? idx_x(mode) : idx_p(mode);
    check_state_shape(state);
    check_mode(state, mode);
    const double v = state.cov(q, q);
    if (v < 1e-14) throw NumericalDegeneracyError("homodyne: measured variance is degenerate");
    const double outcome = state.mean(q) + std::sqrt(v) * standard_normal(rng);
    return homodyne_impl(state, mode, quadrature, outcome);
}

std::pair<HomodyneOutcome, GaussianState> homodyne(const GaussianState& state, int mode,
                                                   Quadrature quadrature, double fixed_outcome) {
    if (!std::isfinite(fixed_outcome)) {
        throw std::invalid_argument("homodyne: fixed outcome must be finite");
    }
    return homodyne_impl(state, mode, quadrature, fixed_outcome);
}

std::vector<double> symplectic_eigenvalues(const GaussianState& state) {
    check_state_shape(state);
    if ((state.cov - state.cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("symplectic_eigenvalues: covariance is not symmetric");
    }
    const Eigen::MatrixXd m = symplectic_form(state.num_modes) * state.cov;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    std::vector<double> mags(2 * state.num_modes);
    for (int i = 0; i < m.rows(); ++i) mags[i] = std::abs(solver.eigenvalues()(i));
    std::sort(mags.begin(), mags.end());
    // Eigenvalues come in +-i nu pairs; average each pair.
    std::vector<double> out(state.num_modes);
    for (int i = 0; i < state.num_modes; ++i) out[i] = 0.5 * (mags[2 * i] + mags[2 * i + 1]);
    return out;
}

bool is_physical(const GaussianState& state, double tol) {
    for (double nu : symplectic_eigenvalues(state)) {
        if (nu < kVacuumVariance - tol) return false;
    }
    return true;
}

double gaussian_fidelity(const GaussianState& pure_input, const GaussianState& output) {
    if (pure_input.num_modes != 1 || output.num_modes != 1) {
        throw std::invalid_argument("gaussian_fidelity: single-mode states required");
    }
    const double nu = symplectic_eigenvalues(pure_input)[0];
    if (std::abs(nu - kVacuumVariance) > 1e-9) {
        throw std::invalid_argument("gaussian_fidelity: first argument must be pure");
    }
    const Eigen::Matrix2d sum = pure_input.cov + output.cov;
    const double det = sum(0, 0) * sum(1, 1) - sum(0, 1) * sum(1, 0);
    if (det <= 0.0) throw NumericalDegeneracyError("gaussian_fidelity: singular covariance sum");
    const Eigen::Vector2d dmu = pure_input.mean - output.mean;
    Eigen::Matrix2d inv;
    inv << sum(1, 1), -sum(0, 1), -sum(1, 0), sum(0, 0);
    inv /= det;
    return std::exp(-0.5 * dmu.dot(inv * dmu)) / (2.0 * std::sqrt(det));
}

double standard_normal(std::mt19937_64& rng) {
    // Box-Muller on two uniforms; no retained state between calls.
    const double inv = 1.0 / (static_cast<double>(std::mt19937_64::max()) + 2.0);
    const double u1 = (static_cast<double>(rng()) + 1.0) * inv;
    const double u2 = (static_cast<double>(rng()) + 1.0) * inv;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a combined word.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::MatrixXd invert_checked(const Eigen::MatrixXd& m, const char* context) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (!lu.isInvertible()) {
        throw NumericalDegeneracyError(std::string(context) + ": singular matrix");
    }
    const Eigen::MatrixXd inv = lu.inverse();
    const double cond = m.cwiseAbs().rowwise().sum().maxCoeff() *
                        inv.cwiseAbs().rowwise().sum().maxCoeff();
    if (cond > 1e12) {
        std::fprintf(stderr, "cvclone: warning: %s: condition number %.3g exceeds 1e12\n", context,
                     cond);
    }
    return inv;
}

}  // namespace cvclone

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

// Phase-space toolkit for Gaussian states of bosonic modes.
//
// Scaling convention used throughout: [x, p] = i/2, so a quadrature of the
// vacuum has variance 1/4. Quadratures are ordered (x1, p1, ..., xN, pN).

namespace cvclone {

inline constexpr double kVacuumVariance = 0.25;

enum class Quadrature { X, P };

// Thrown when a conditioning step hits a (near-)zero variance.
struct NumericalDegeneracyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GaussianState {
    int num_modes = 0;
    Eigen::VectorXd mean;  // length 2N
    Eigen::MatrixXd cov;   // 2N x 2N, symmetric
};

// Real 2N x 2N matrix S with S * Omega * S^T = Omega, where Omega is the
// block-diagonal stack of [[0, 1], [-1, 0]].
struct SymplecticTransform {
    Eigen::MatrixXd matrix;
    int num_modes() const { return static_cast<int>(matrix.rows()) / 2; }
};

struct HomodyneOutcome {
    Quadrature quadrature = Quadrature::X;
    int mode = 0;
    double value = 0.0;
};

inline int idx_x(int mode) { return 2 * mode; }
inline int idx_p(int mode) { return 2 * mode + 1; }

Eigen::MatrixXd symplectic_form(int num_modes);

// max |S Omega S^T - Omega|
double symplectic_defect(const SymplecticTransform& s);

// States ---------------------------------------------------------------

GaussianState vacuum(int num_modes);

// Single-mode squeezed vacuum. squeeze_p=true squeezes p for r > 0:
// cov = diag(e^{2r}/4, e^{-2r}/4). squeeze_p=false squeezes x instead.
GaussianState squeezed_vacuum(double r, bool squeeze_p);

// Vacuum-shaped state displaced to mean (x0, p0).
GaussianState coherent(double x0, double p0);

GaussianState tensor(const GaussianState& a, const GaussianState& b);

GaussianState apply_symplectic(const GaussianState& state, const SymplecticTransform& s);

GaussianState displace(const GaussianState& state, int mode, double dx, double dp);

GaussianState partial_trace(const GaussianState& state, const std::vector<int>& keep);

// Transforms -----------------------------------------------------------

SymplecticTransform identity_transform(int num_modes);

// Two-mode beam splitter on modes (k, l) of an n-mode register. The
// underlying mode-operator matrix is
//   [ e^{i phi} sin(theta)   e^{i phi} cos(theta) ]
//   [        cos(theta)            -sin(theta)    ]
// so phi = 0 is the phase-free convention c_k -> c_k sin + c_l cos,
// c_l -> c_k cos - c_l sin.
SymplecticTransform beam_splitter(int num_modes, int k, int l, double theta, double phi);

// x_k -> e^{r} x_k, p_k -> e^{-r} p_k.
SymplecticTransform squeezer(int num_modes, int k, double r);

// Rotation by beta in the (x_k, p_k) plane.
SymplecticTransform phase_shift(int num_modes, int k, double beta);

// Cascade B_{M-1,M}(asin 1/sqrt2) ... B_{1,2}(asin 1/sqrtM) of phase-free
// beam splitters (1-based labels; rightmost factor acts first). Column 0 of
// the result is uniformly 1/sqrt(M): input mode 0 is spread evenly over all
// M outputs. M = 1 gives the identity.
SymplecticTransform m_splitter(int num_output_modes);

// Interferometer U(n) = (B_{n-1,n} ... B_{1,n} B_{n-2,n-1} ... B_{1,2} D)^{-1}
// with D = diag(e^{i beta_j}). Parameter vectors follow that factor order:
// for l = n..2 (1-based), k = l-1..1, one (theta, phi) pair per factor;
// betas has length n. Expects n(n-1)/2 pairs.
SymplecticTransform reck_interferometer(int num_modes,
                                        const std::vector<double>& thetas,
                                        const std::vector<double>& phis,
                                        const std::vector<double>& betas);

// Complex n x n unitary behind reck_interferometer (same parameter order).
Eigen::MatrixXcd reck_unitary(int num_modes,
                              const std::vector<double>& thetas,
                              const std::vector<double>& phis,
                              const std::vector<double>& betas);

struct ReckParams {
    std::vector<double> thetas;
    std::vector<double> phis;
    std::vector<double> betas;
};

// Solve for parameters with reck_unitary(params) == u (entrywise), by
// peeling beam-splitter factors off u^dagger in the fixed factor order.
ReckParams reck_params_from_unitary(const Eigen::MatrixXcd& u);

// Embed a passive transform: a' = U a on annihilation operators becomes the
// real matrix of 2x2 blocks [[Re U_jk, -Im U_jk], [Im U_jk, Re U_jk]].
SymplecticTransform unitary_to_symplectic(const Eigen::MatrixXcd& u);

// Map a small transform onto modes[i] of an n-mode register.
SymplecticTransform embed_transform(const SymplecticTransform& s, int num_modes,
                                    const std::vector<int>& modes);

// Measurement ----------------------------------------------------------

// Homodyne detection of one quadrature. The outcome is drawn from the
// marginal N(mean_q, var_q) unless a fixed outcome is supplied. The measured
// mode is removed from the register; remaining means shift by
// C v^{-1} (outcome - mu_q) and the covariance loses the Schur complement
// C v^{-1} C^T, with v the measured variance and C the cross-covariance
// column against the measured quadrature. Plain 1x1 inversion of v, guarded
// at v < 1e-14.
std::pair<HomodyneOutcome, GaussianState> homodyne(const GaussianState& state, int mode,
                                                   Quadrature quadrature, std::mt19937_64& rng);

std::pair<HomodyneOutcome, GaussianState> homodyne(const GaussianState& state, int mode,
                                                   Quadrature quadrature, double fixed_outcome);

// Spectra and fidelity ---------------------------------------------------

// Absolute eigenvalues of Omega * cov, one per mode, sorted ascending.
// Physical states have all values >= 1/4; pure states sit at 1/4.
std::vector<double> symplectic_eigenvalues(const GaussianState& state);

bool is_physical(const GaussianState& state, double tol = 1e-9);

// Overlap fidelity F = pi * Int W1 W2 between a pure single-mode Gaussian
// and an arbitrary single-mode Gaussian:
//   exp(-1/2 dmu^T (V1+V2)^{-1} dmu) / (2 sqrt(det(V1+V2))).
// Rejects a non-pure first argument (the overlap is only a fidelity when
// the reference state is pure).
double gaussian_fidelity(const GaussianState& pure_input, const GaussianState& output);

// RNG helpers ------------------------------------------------------------

// Stateless standard-normal draw (Box-Muller); two engine uses per call.
double standard_normal(std::mt19937_64& rng);

// Deterministic per-stream seed derivation (splitmix64 over seed, stream).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Pivoted inversion for the small dense matrices used here; warns on
// condition numbers above 1e12.
Eigen::MatrixXd invert_checked(const Eigen::MatrixXd& m, const char* context);

}  // namespace cvclone

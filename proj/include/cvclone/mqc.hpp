#pragma once

#include "cvclone/gaussian.hpp"

namespace cvclone {

// Multiuser-channel construction: an (M+1)-mode entangled resource whose mode 0
// acts as the port and modes 1..M as the receiver shares.
struct MqcSpec {
    int M = 2;           // receiver count, >= 2
    double theta0 = 0.0; // first-beam-splitter angle, strictly inside the allowed interval
    double s = 0.0;      // input-class squeezing parameter
    double r1 = 0.0;     // derived squeezing (see solve_squeezing)
    double r2 = 0.0;
};

// 2M-mode variant: a finite-squeezing EPR pair distributed symmetrically over
// M "left" modes (0..M-1, any of which can serve as port) and M "right" modes
// (M..2M-1, the receiver shares).
struct SymmetricMqcSpec {
    int M = 1;      // receivers per side, >= 1
    double r = 0.0; // EPR squeezing, finite and >= 0
    double s = 0.0; // ancilla squeezing parameter
};

// Open interval of admissible theta0 values for a given M, as angles:
// sin(theta0) in (1/sqrt(M+1), sqrt(M/(M+1))). Endpoints force infinite
// squeezing and are rejected with a small margin.
std::pair<double, double> theta0_interval(int M);

inline constexpr double kThetaMargin = 1e-6; // radians kept away from the interval ends

// Squeezing parameters (r1, r2) that make the construction consistent:
//   e^{-2 r1} = (sqrt(M) sin t - cos t) / (sqrt(M) sin t + cos t)
//   e^{-2 r2} = (sqrt(M) cos t - sin t) / (sqrt(M) cos t + sin t)
// Throws std::domain_error (naming the violated bound) outside the interval.
std::pair<double, double> solve_squeezing(int M, double theta0);

// Per-mode squeezing budget 10*log10((sqrt(M)-1)/(sqrt(M)+1)) in dB (negative).
double equal_squeezing_db(int M);

// Validates and completes a spec (fills r1, r2). M >= 2 required.
MqcSpec make_mqc_spec(int M, double theta0, double s);

// Circuit recipe: squeezed inputs on modes 0 and 1, beam splitter at theta0,
// then mode 1 plus M-1 squeezed ancillas through an M-splitter.
GaussianState build_mqc(const MqcSpec& spec);

// Same state assembled directly from its Wigner-exponent quadratic form;
// independent of the circuit path and used to cross-validate it.
GaussianState closed_form_covariance(const MqcSpec& spec);

GaussianState build_symmetric_mqc(const SymmetricMqcSpec& spec);

}  // namespace cvclone

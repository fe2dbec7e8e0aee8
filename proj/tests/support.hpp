#ifndef DNLS_TESTS_SUPPORT_HPP
#define DNLS_TESTS_SUPPORT_HPP

// Shared scenario builders and independent reference computations.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <dnls/dnls.hpp>

namespace testing_support {

using dnls::Complex;

inline const double tanh1 = std::tanh(1.0);
// Exponential profile amplitude with unit l2 norm on the infinite lattice.
inline const double unit_exp_amplitude = std::sqrt(tanh1);

// Cubic reference scenario: gamma = 2, |g1|_Cb = 1 (exponential, rate 1),
// |g2|_Cb = 0.25, both modulated by cos t, so the effective damping is 1.5.
inline dnls::ModelParams reference_model() { return {1.0, 2.0, dnls::NonlinearitySpec::cubic()}; }

inline dnls::DrivingSpec reference_driving(std::size_t sites) {
    const auto law = dnls::TemporalLaw::periodic(2.0 * std::numbers::pi, 0.0, {{1.0, 0.0}});
    return {{dnls::SpatialProfile::exponential(sites, unit_exp_amplitude, 1.0), law},
            {dnls::SpatialProfile::exponential(sites, 0.25 * unit_exp_amplitude, 1.0), law}};
}

// Strong-damping breather scenario: gamma = 3, g1 = 0.5 exp(-|n|) cos t, g2 = 0.
inline dnls::ModelParams breather_model() { return {1.0, 3.0, dnls::NonlinearitySpec::cubic()}; }

inline dnls::DrivingSpec breather_driving(std::size_t sites) {
    const auto law = dnls::TemporalLaw::periodic(2.0 * std::numbers::pi, 0.0, {{1.0, 0.0}});
    return {{dnls::SpatialProfile::exponential(sites, 0.5, 1.0), law}, dnls::DrivingField::none(sites)};
}

inline std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<Complex> v(n);
    for (auto& z : v) z = {d(rng), d(rng)};
    return v;
}

// Plain (uncompensated) reference implementations, written independently of the library.
inline double naive_norm(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline double naive_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

inline std::vector<Complex> to_vector(const dnls::LatticeState& s) { return {s.values().begin(), s.values().end()}; }

// Exact solution of psi' = -i kappa A psi with periodic bc via the discrete
// Fourier basis: A e_j = lambda_j e_j with lambda_j = -2 + 2 cos(2 pi j / N).
inline std::vector<Complex> dft_linear_flow(const std::vector<Complex>& psi0, double kappa, double gamma, double t) {
    const std::size_t n = psi0.size();
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Complex> hat(n), out(n);
    for (std::size_t j = 0; j < n; ++j) {
        Complex s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += psi0[k] * std::polar(1.0, -two_pi * static_cast<double>(j * k % n) / static_cast<double>(n));
        const double lambda = -2.0 + 2.0 * std::cos(two_pi * static_cast<double>(j) / static_cast<double>(n));
        hat[j] = s * std::exp(Complex(-gamma * t, -kappa * lambda * t));
    }
    for (std::size_t k = 0; k < n; ++k) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            s += hat[j] * std::polar(1.0, two_pi * static_cast<double>(j * k % n) / static_cast<double>(n));
        out[k] = s / static_cast<double>(n);
    }
    return out;
}

// psi(t) = psi* + (psi0 - psi*) e^{-gamma t} with psi* = -i g / gamma
// for psi' = -gamma psi - i g (single site, constant g).
inline Complex affine_solution(Complex psi0, Complex g, double gamma, double t) {
    const Complex star = Complex(0.0, -1.0) * g / gamma;
    return star + (psi0 - star) * std::exp(-gamma * t);
}

} // namespace testing_support

#endif

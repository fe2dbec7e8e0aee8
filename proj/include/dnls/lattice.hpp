#ifndef DNLS_LATTICE_HPP
#define DNLS_LATTICE_HPP

// Truncated l2 lattice states, the discrete Laplacian, forward/backward
// differences and the local power nonlinearity.
//
// A state of N sites carries site indices n = -N/2 .. N/2-1; site 0 lives at
// array index N/2. Values are std::complex<double>, i.e. interleaved (re, im)
// pairs in one flat buffer.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "summation.hpp"

namespace dnls {

using Complex = std::complex<double>;

enum class BoundaryCondition { dirichlet, periodic };

inline std::string_view to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::periodic ? "periodic" : "dirichlet";
}

inline BoundaryCondition parse_boundary(std::string_view s) {
    if (s == "dirichlet") return BoundaryCondition::dirichlet;
    if (s == "periodic") return BoundaryCondition::periodic;
    throw DomainError("unknown boundary condition '" + std::string(s) + "'");
}

enum class Direction { forward, backward };

class LatticeState {
public:
    static constexpr std::size_t min_sites = 3;

    explicit LatticeState(std::size_t sites, BoundaryCondition bc = BoundaryCondition::dirichlet)
        : values_(check_size(sites), Complex{}), bc_(bc) {}

    explicit LatticeState(std::vector<Complex> values, BoundaryCondition bc = BoundaryCondition::dirichlet)
        : values_(std::move(values)), bc_(bc) {
        check_size(values_.size());
        for (const auto& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw DomainError("lattice state contains a non-finite entry");
    }

    // Unit vector at site index n.
    static LatticeState unit(std::size_t sites, long site, BoundaryCondition bc = BoundaryCondition::dirichlet) {
        LatticeState s(sites, bc);
        s.values_.at(s.index_of(site)) = 1.0;
        return s;
    }

    std::size_t size() const noexcept { return values_.size(); }
    BoundaryCondition bc() const noexcept { return bc_; }
    std::span<const Complex> values() const noexcept { return values_; }
    const Complex& operator[](std::size_t i) const { return values_[i]; }

    long first_site() const noexcept { return -static_cast<long>(size() / 2); }
    long last_site() const noexcept { return first_site() + static_cast<long>(size()) - 1; }
    long site_of(std::size_t index) const noexcept { return static_cast<long>(index) + first_site(); }

    std::size_t index_of(long site) const {
        if (site < first_site() || site > last_site())
            throw DomainError("site " + std::to_string(site) + " outside truncation");
        return static_cast<std::size_t>(site - first_site());
    }

    Complex at_site(long site) const { return values_[index_of(site)]; }

    friend bool operator==(const LatticeState&, const LatticeState&) = default;

private:
    static std::size_t check_size(std::size_t n) {
        if (n < min_sites) throw DomainError("lattice needs at least 3 sites");
        return n;
    }

    std::vector<Complex> values_;
    BoundaryCondition bc_;
};

// F(s) = sign * s^sigma, with H1 constants (a, b).
struct NonlinearitySpec {
    double sigma = 1.0;
    int sign = 1;
    double a = 1.5;
    double b = 2.0;

    // b = 2 sigma, a = (2 sigma + 1)/2 for sigma <= 1 and 2 sigma + 1 otherwise.
    static NonlinearitySpec power(double sigma, int sign = 1) {
        NonlinearitySpec spec;
        spec.sigma = sigma;
        spec.sign = sign;
        spec.b = 2.0 * sigma;
        spec.a = sigma <= 1.0 ? (2.0 * sigma + 1.0) / 2.0 : 2.0 * sigma + 1.0;
        spec.validate();
        return spec;
    }

    static NonlinearitySpec cubic(int sign = 1) { return power(1.0, sign); }

    // F == 0; H1 constants kept positive so bound formulas stay defined.
    static NonlinearitySpec none() {
        NonlinearitySpec spec;
        spec.sign = 0;
        return spec;
    }

    bool is_zero() const noexcept { return sign == 0; }

    // Worst-case Lipschitz factor a (|x|^b + |y|^b) from H1.
    double h1_bound(Complex x, Complex y) const {
        if (is_zero()) return 0.0;
        return a * (std::pow(std::abs(x), b) + std::pow(std::abs(y), b)) * std::abs(x - y);
    }

    void validate() const {
        if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("nonlinearity power sigma must be positive");
        if (sign != 1 && sign != -1 && sign != 0) throw DomainError("nonlinearity sign must be +1, -1 or 0");
        if (!(a > 0.0) || !(b > 0.0)) throw DomainError("H1 constants a, b must be positive");
    }

    friend bool operator==(const NonlinearitySpec&, const NonlinearitySpec&) = default;
};

struct ModelParams {
    double kappa = 1.0;
    double gamma = 1.0;
    NonlinearitySpec nonlinearity = NonlinearitySpec::cubic();

    // gamma = 0 is admitted for conservative oracle runs; every dissipative
    // diagnostic re-checks gamma > 0 through its own precondition.
    void validate() const {
        if (!std::isfinite(kappa)) throw DomainError("coupling kappa must be finite");
        if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("damping gamma must be nonnegative");
        nonlinearity.validate();
    }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

namespace kernel {

// out = A in. Buffers must not alias.
inline void laplacian(std::span<const Complex> in, std::span<Complex> out, BoundaryCondition bc) noexcept {
    const std::size_t n = in.size();
    const bool wrap = bc == BoundaryCondition::periodic;
    const Complex left_ghost = wrap ? in[n - 1] : Complex{};
    const Complex right_ghost = wrap ? in[0] : Complex{};
    out[0] = in[1] - 2.0 * in[0] + left_ghost;
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = in[i + 1] - 2.0 * in[i] + in[i - 1];
    out[n - 1] = right_ghost - 2.0 * in[n - 1] + in[n - 2];
}

inline Complex local_nonlinearity(Complex z, const NonlinearitySpec& spec) noexcept {
    if (spec.is_zero()) return {};
    const double s = std::norm(z);
    if (s == 0.0) return {};
    const double f = spec.sigma == 1.0 ? s : std::pow(s, spec.sigma);
    return static_cast<double>(spec.sign) * f * z;
}

} // namespace kernel

inline LatticeState apply_laplacian(const LatticeState& state) {
    std::vector<Complex> out(state.size());
    kernel::laplacian(state.values(), out, state.bc());
    return LatticeState(std::move(out), state.bc());
}

// forward: (B psi)_n = psi_{n+1} - psi_n; backward: (B* psi)_n = psi_{n-1} - psi_n.
inline LatticeState apply_difference(const LatticeState& state, Direction direction) {
    const auto in = state.values();
    const std::size_t n = in.size();
    const bool wrap = state.bc() == BoundaryCondition::periodic;
    std::vector<Complex> out(n);
    if (direction == Direction::forward) {
        for (std::size_t i = 0; i + 1 < n; ++i) out[i] = in[i + 1] - in[i];
        out[n - 1] = (wrap ? in[0] : Complex{}) - in[n - 1];
    } else {
        out[0] = (wrap ? in[n - 1] : Complex{}) - in[0];
        for (std::size_t i = 1; i < n; ++i) out[i] = in[i - 1] - in[i];
    }
    return LatticeState(std::move(out), state.bc());
}

inline LatticeState evaluate_nonlinearity(const LatticeState& state, const NonlinearitySpec& spec) {
    std::vector<Complex> out(state.size());
    std::ranges::transform(state.values(), out.begin(),
                           [&](Complex z) { return kernel::local_nonlinearity(z, spec); });
    return LatticeState(std::move(out), state.bc());
}

// (x, y) = sum x_n conj(y_n)
inline Complex inner_product(std::span<const Complex> x, std::span<const Complex> y) {
    if (x.size() != y.size()) throw DomainError("inner product of states with different sizes");
    CompensatedSum re, im;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Complex p = x[i] * std::conj(y[i]);
        re += p.real();
        im += p.imag();
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

inline Complex inner_product(const LatticeState& x, const LatticeState& y) {
    return inner_product(x.values(), y.values());
}

inline double squared_norm(std::span<const Complex> v) noexcept {
    CompensatedSum s;
    for (const auto& z : v) s += std::norm(z);
    return static_cast<double>(s);
}

inline double l2_norm(std::span<const Complex> v) noexcept { return std::sqrt(squared_norm(v)); }
inline double l2_norm(const LatticeState& state) noexcept { return l2_norm(state.values()); }

inline double distance(std::span<const Complex> x, std::span<const Complex> y) {
    if (x.size() != y.size()) throw DomainError("distance between states with different sizes");
    CompensatedSum s;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::norm(x[i] - y[i]);
    return std::sqrt(static_cast<double>(s));
}

inline double distance(const LatticeState& x, const LatticeState& y) { return distance(x.values(), y.values()); }

// sum_{|n| > m} |psi_n|^2 over the sites of the truncation.
inline double tail_mass(std::span<const Complex> v, long m) {
    const long half = static_cast<long>(v.size() / 2);
    if (m < 0 || m >= half) throw DomainError("tail cutoff m=" + std::to_string(m) + " outside [0, N/2)");
    CompensatedSum s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const long site = static_cast<long>(i) - half;
        if (site > m || site < -m) s += std::norm(v[i]);
    }
    return static_cast<double>(s);
}

inline double tail_mass(const LatticeState& state, long m) { return tail_mass(state.values(), m); }

inline double max_abs(std::span<const Complex> v) noexcept {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

} // namespace dnls

#endif

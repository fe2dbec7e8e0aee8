#ifndef DNLS_MODEL_HPP
#define DNLS_MODEL_HPP

#include <span>
#include <vector>

#include "driving.hpp"
#include "lattice.hpp"

namespace dnls {

// Right-hand side of the damped driven DNLS lattice in dpsi/dt form:
//   dpsi/dt = -i kappa A psi - gamma psi - i F(|psi|^2) psi - i g1(t) - i g2(t) psi
class DnlsSystem {
public:
    DnlsSystem(ModelParams params, DrivingSpec driving, BoundaryCondition bc)
        : params_(std::move(params)), driving_(std::move(driving)), bc_(bc),
          lap_(driving_.sites()) {
        params_.validate();
        driving_.validate();
    }

    std::size_t sites() const noexcept { return driving_.sites(); }
    const ModelParams& params() const noexcept { return params_; }
    const DrivingSpec& driving() const noexcept { return driving_; }
    BoundaryCondition bc() const noexcept { return bc_; }

    // Evaluation reuses scratch buffers; one system object per thread.
    void operator()(double t, std::span<const Complex> psi, std::span<Complex> dpsi) {
        const Complex i{0.0, 1.0};
        kernel::laplacian(psi, lap_, bc_);
        const double s1 = driving_.g1.law(t);
        const double s2 = driving_.g2.law(t);
        const auto p1 = driving_.g1.profile.values();
        const auto p2 = driving_.g2.profile.values();
        const auto& nl = params_.nonlinearity;
        for (std::size_t n = 0; n < psi.size(); ++n) {
            const Complex conservative = params_.kappa * lap_[n] + kernel::local_nonlinearity(psi[n], nl) +
                                         p1[n] * s1 + p2[n] * s2 * psi[n];
            dpsi[n] = -i * conservative - params_.gamma * psi[n];
        }
    }

private:
    ModelParams params_;
    DrivingSpec driving_;
    BoundaryCondition bc_;
    std::vector<Complex> lap_;
};

inline LatticeState rhs(const LatticeState& state, double t, const ModelParams& params, const DrivingSpec& driving) {
    if (driving.sites() != state.size()) throw DomainError("driving and state use different truncations");
    DnlsSystem system(params, driving, state.bc());
    std::vector<Complex> out(state.size());
    system(t, state.values(), out);
    return LatticeState(std::move(out), state.bc());
}

} // namespace dnls

#endif

#ifndef DNLS_MONITOR_HPP
#define DNLS_MONITOR_HPP

// Online checks of the energy inequality
//   d/dt |psi|^2 + G |psi|^2 <= |g1(t)|^2 / G,   G = gamma - 2 sup|g2|,
// and of its Gronwall consequence (the a-priori norm bound) on sampled
// trajectories.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "driving.hpp"
#include "errors.hpp"
#include "integrator.hpp"

namespace dnls {

struct DissipationViolation {
    std::size_t index; // interval [t_index, t_index+1]
    double time;
    double lhs;
    double rhs;
    double slack;
    double margin() const noexcept { return rhs + slack - lhs; }
};

struct DissipationReport {
    double effective_damping = 0.0;
    std::size_t intervals_checked = 0;
    double worst_margin = 0.0;
    std::vector<DissipationViolation> violations;
    bool pass() const noexcept { return violations.empty(); }
};

inline void require_effective_damping(double gamma_eff) {
    if (!(gamma_eff > 0.0))
        throw PreconditionError("effective damping gamma - 2 sup|g2| = " + std::to_string(gamma_eff) +
                                " <= 0; reduce sup|g2| below gamma/2 (need gamma > 2 sup|g2|)");
}

namespace detail {

// max over [ta, tb] of |s|, using the Lipschitz constant sum |c_k w_k| of the law.
inline double law_sup_on(const TemporalLaw& law, double ta, double tb) {
    double lip = 0.0;
    for (const auto& h : law.terms()) lip += std::abs(h.amplitude * h.frequency);
    const double endpoint = std::max(std::abs(law(ta)), std::abs(law(tb)));
    return std::min(endpoint + 0.5 * lip * (tb - ta), law.amplitude_bound());
}

} // namespace detail

// Checks the energy inequality between consecutive samples in its exact
// interval-integrated form
//   |psi_{i+1}|^2 - |psi_i|^2 e^{-G dt} <= (1 - e^{-G dt}) / G^2 * sup_{[t_i, t_{i+1}]} |g1|^2 + slack,
// with slack = 10 rtol (1 + |psi_i|^2). Dividing by dt recovers the
// differential form; the interval sup replaces the O(dt) allowance.
inline DissipationReport monitor_dissipation(const Trajectory& traj, const ModelParams& params,
                                             const DrivingSpec& driving, double rtol) {
    const double g_eff = effective_damping(params, driving);
    require_effective_damping(g_eff);
    DissipationReport report;
    report.effective_damping = g_eff;
    report.worst_margin = std::numeric_limits<double>::infinity();
    const double p1 = driving.g1.profile.norm();
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const double dt = traj.times[i + 1] - traj.times[i];
        const double n0 = traj.norms[i] * traj.norms[i];
        const double n1 = traj.norms[i + 1] * traj.norms[i + 1];
        const double decay = std::exp(-g_eff * dt);
        const double g_sup = p1 * detail::law_sup_on(driving.g1.law, traj.times[i], traj.times[i + 1]);
        const double lhs = n1 - n0 * decay;
        const double rhs = -std::expm1(-g_eff * dt) / (g_eff * g_eff) * g_sup * g_sup;
        const double slack = 10.0 * rtol * (1.0 + std::max(n0, n1));
        const DissipationViolation v{i, traj.times[i], lhs, rhs, slack};
        report.worst_margin = std::min(report.worst_margin, v.margin());
        if (v.margin() < 0.0) report.violations.push_back(v);
        ++report.intervals_checked;
    }
    if (report.intervals_checked == 0) report.worst_margin = 0.0;
    return report;
}

struct AprioriReport {
    double effective_damping = 0.0;
    double asymptotic_radius = 0.0; // sup|g1| / G
    std::size_t samples_checked = 0;
    double worst_margin = 0.0;
    std::vector<std::size_t> violations;
    bool pass() const noexcept { return violations.empty(); }
};

// |psi(t)|^2 <= |psi(t0)|^2 e^{-G (t - t0)} + sup|g1|^2 / G^2 + 1e-6 (1 + |psi(t0)|^2)
inline AprioriReport verify_apriori(const Trajectory& traj, const ModelParams& params, const DrivingSpec& driving) {
    const double g_eff = effective_damping(params, driving);
    require_effective_damping(g_eff);
    AprioriReport report;
    report.effective_damping = g_eff;
    report.asymptotic_radius = driving.g1.sup_norm() / g_eff;
    if (traj.size() == 0) return report;
    const double r0 = traj.norms.front() * traj.norms.front();
    const double slack = 1e-6 * (1.0 + r0);
    const double tail = report.asymptotic_radius * report.asymptotic_radius;
    report.worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double bound = r0 * std::exp(-g_eff * (traj.times[i] - traj.times.front())) + tail + slack;
        const double margin = bound - traj.norms[i] * traj.norms[i];
        report.worst_margin = std::min(report.worst_margin, margin);
        if (margin < 0.0) report.violations.push_back(i);
        ++report.samples_checked;
    }
    return report;
}

} // namespace dnls

#endif

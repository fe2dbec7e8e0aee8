#ifndef DNLS_BREATHER_HPP
#define DNLS_BREATHER_HPP

// Time-periodic localized solutions under periodic driving, computed as the
// fixed point of the period map by Picard iteration. Under the strong
// damping condition the period map contracts with ratio at most
// exp[-(gamma - a R_u^b - sup|g2|) T], so the iteration itself certifies
// existence and uniqueness inside the R_u ball.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "diagnostics.hpp"
#include "driving.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "lattice.hpp"

namespace dnls {

struct StrongDampingCheck {
    double lhs = 0.0;       // gamma
    double rhs = 0.0;       // a R_u^b + sup|g2|
    double radius = 0.0;    // R_u = sup|g1| / (gamma - 2 sup|g2|)
    double period = 0.0;
    bool satisfied = false;

    // gamma - a R_u^b - sup|g2|
    double contraction_exponent() const noexcept { return lhs - rhs; }
    // exp[-(gamma - a R_u^b - sup|g2|) T]
    double theoretical_ratio() const noexcept { return std::exp(-contraction_exponent() * period); }
};

inline double driving_period(const DrivingSpec& driving) {
    const auto period = common_period(driving);
    if (!period) throw DomainError("breather computations need periodic driving with a common period");
    return *period;
}

inline StrongDampingCheck check_strong_damping(const ModelParams& params, const DrivingSpec& driving) {
    StrongDampingCheck c;
    c.period = driving_period(driving);
    const double g_eff = effective_damping(params, driving);
    require_effective_damping(g_eff);
    const auto [g1, g2] = sup_norm(driving);
    const auto& nl = params.nonlinearity;
    c.lhs = params.gamma;
    c.radius = g1 / g_eff;
    c.rhs = (nl.is_zero() ? 0.0 : nl.a * std::pow(c.radius, nl.b)) + g2;
    c.satisfied = c.lhs > c.rhs;
    return c;
}

// U(t0 + T, t0) psi
inline LatticeState period_map(const LatticeState& state, double t0, const ModelParams& params,
                               const DrivingSpec& driving,
                               const IntegratorConfig& config = IntegratorConfig::reference()) {
    const double period = driving_period(driving);
    return evolve(state, t0, t0 + period, params, driving, config);
}

struct LocalizationFit {
    double rate = 0.0; // decay rate of ln |psi_n| in |n|
    double r_squared = 0.0;
    std::size_t points = 0;
    long first_site = 0;
    long last_site = 0;
};

// Symmetric envelope e_m = max(|psi_m|, |psi_-m|), m = 0 .. N/2 - 1.
inline std::vector<double> symmetric_envelope(const LatticeState& s) {
    const long half = static_cast<long>(s.size() / 2);
    std::vector<double> e(static_cast<std::size_t>(half), 0.0);
    for (long m = 0; m < half; ++m)
        e[static_cast<std::size_t>(m)] = std::max(std::abs(s.at_site(m)), std::abs(s.at_site(-m)));
    return e;
}

// Exponential fit of the envelope for m >= first, down to relative amplitude floor.
inline std::optional<LocalizationFit> fit_localization(std::span<const double> envelope, long first,
                                                       double relative_floor = 1e-10) {
    const double peak = *std::max_element(envelope.begin(), envelope.end());
    if (!(peak > 0.0)) return std::nullopt;
    std::vector<double> x, y;
    long last = first;
    for (long m = first; m < static_cast<long>(envelope.size()); ++m) {
        const double e = envelope[static_cast<std::size_t>(m)];
        if (e < relative_floor * peak) break;
        x.push_back(static_cast<double>(m));
        y.push_back(std::log(e));
        last = m;
    }
    if (x.size() < 3) return std::nullopt;
    const auto f = fit_line(x, y);
    return LocalizationFit{-f.slope, f.r_squared, f.points, first, last};
}

struct BreatherSolution {
    LatticeState state0{LatticeState::min_sites};
    double t0 = 0.0;
    double period = 0.0;
    double periodicity_residual = 0.0;
    std::optional<LocalizationFit> localization;
    long iterations = 0;
    double contraction_ratio = 0.0; // largest measured d_{k+1} / d_k above the noise floor
    bool ratio_measured = false;
    double theoretical_ratio = 0.0;
    std::vector<double> residuals;  // d_k = |Phi(psi_k) - psi_k|
};

struct BreatherOptions {
    double tol = 1e-10;
    long max_iterations = 1000;
    double t0 = 0.0;
    IntegratorConfig integrator = IntegratorConfig::reference();
};

namespace detail {

inline long driving_core(const DrivingSpec& driving) {
    const auto p = driving.g1.profile.values();
    double peak = 0.0;
    for (const auto& z : p) peak = std::max(peak, std::abs(z));
    if (peak == 0.0) return 0;
    const long half = static_cast<long>(p.size() / 2);
    long core = 0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::abs(p[i]) >= 0.5 * peak) core = std::max(core, std::abs(static_cast<long>(i) - half));
    return core;
}

} // namespace detail

inline BreatherSolution find_breather(const ModelParams& params, const DrivingSpec& driving,
                                      const LatticeState& seed, const BreatherOptions& options = {}) {
    const auto check = check_strong_damping(params, driving);
    if (!check.satisfied)
        throw PreconditionError("strong damping condition unsatisfied (gamma = " + std::to_string(check.lhs) +
                                " <= a R_u^b + sup|g2| = " + std::to_string(check.rhs) +
                                "); uniqueness of the breather is not guaranteed");
    if (seed.size() != driving.sites()) throw DomainError("seed and driving use different truncations");
    if (l2_norm(seed) > check.radius * (1.0 + 1e-12) && l2_norm(seed) > 0.0)
        throw PreconditionError("seed lies outside the R_u ball");

    BreatherSolution sol;
    sol.state0 = seed;
    sol.t0 = options.t0;
    sol.period = check.period;
    sol.theoretical_ratio = check.theoretical_ratio();
    const double noise = 10.0 * options.integrator.rtol * (1.0 + check.radius);
    LatticeState psi = seed;
    for (long k = 0; k < options.max_iterations; ++k) {
        LatticeState next = period_map(psi, options.t0, params, driving, options.integrator);
        const double d = distance(next, psi);
        sol.residuals.push_back(d);
        if (k > 0 && d >= noise && sol.residuals[k - 1] > 0.0) {
            sol.contraction_ratio = std::max(sol.contraction_ratio, d / sol.residuals[k - 1]);
            sol.ratio_measured = true;
        }
        psi = std::move(next);
        if (d <= options.tol) {
            sol.iterations = k + 1;
            sol.state0 = psi;
            const auto again = period_map(psi, options.t0, params, driving, options.integrator);
            sol.periodicity_residual = distance(again, psi);
            sol.localization = fit_localization(symmetric_envelope(psi), detail::driving_core(driving) + 1);
            return sol;
        }
    }
    std::ostringstream msg;
    msg << "Picard iteration did not converge in " << options.max_iterations << " iterations; ratio trace:";
    for (std::size_t k = 1; k < sol.residuals.size() && k <= 20; ++k)
        msg << ' ' << sol.residuals[k] / sol.residuals[k - 1];
    throw ConvergenceError(msg.str());
}

struct BreatherReport {
    std::vector<double> phase_times;
    std::vector<double> phase_residuals;
    double max_residual = 0.0;
    double residual_limit = 0.0;
    bool periodic = false;
    bool envelope_monotone = false;
    std::optional<LocalizationFit> localization;
    bool localization_required = false;
    bool localized = false;
    bool pass() const noexcept { return periodic && envelope_monotone && localized; }
};

// Checks |psi(t + T) - psi(t)| <= 10 tol at `phases` equispaced times in one
// period, monotone decay of the site envelope beyond the driving core, and an
// exponential fit with R^2 >= 0.99 when g1 has an exponential profile.
inline BreatherReport verify_breather(const BreatherSolution& sol, const ModelParams& params,
                                      const DrivingSpec& driving, std::size_t phases, double tol = 1e-10,
                                      const IntegratorConfig& config = IntegratorConfig::reference()) {
    if (phases == 0) throw DomainError("need at least one phase");
    BreatherReport report;
    report.residual_limit = 10.0 * tol;
    IntegratorConfig c = config;
    c.sample_stride = sol.period / static_cast<double>(phases);
    c.dense_output = DenseOutput::step_endpoint;
    const auto traj = integrate(sol.state0, sol.t0, sol.t0 + 2.0 * sol.period, params, driving, c);
    // Samples j and j + phases are one period apart.
    const auto& states = traj.states;
    const std::size_t count = std::min(phases, states.size() > phases ? states.size() - phases : 0);
    std::vector<double> envelope(sol.state0.size() / 2, 0.0);
    for (std::size_t j = 0; j < count; ++j) {
        const double r = distance(states[j + phases], states[j]);
        report.phase_times.push_back(traj.times[j]);
        report.phase_residuals.push_back(r);
        report.max_residual = std::max(report.max_residual, r);
        const auto e = symmetric_envelope(states[j]);
        for (std::size_t m = 0; m < e.size(); ++m) envelope[m] = std::max(envelope[m], e[m]);
    }
    report.periodic = count == phases && report.max_residual <= report.residual_limit;

    const long core = detail::driving_core(driving);
    const double peak = *std::max_element(envelope.begin(), envelope.end());
    report.envelope_monotone = true;
    for (std::size_t m = static_cast<std::size_t>(core) + 1; m < envelope.size(); ++m) {
        if (envelope[m] < 1e-12 * peak) break; // round-off region
        if (envelope[m] > envelope[m - 1] * (1.0 + 1e-9)) {
            report.envelope_monotone = false;
            break;
        }
    }
    report.localization = fit_localization(envelope, core + 1);
    report.localization_required = driving.g1.profile.kind() == ProfileKind::exponential && !driving.g1.is_zero();
    report.localized = !report.localization_required ||
                       (report.localization && report.localization->r_squared >= 0.99);
    return report;
}

} // namespace dnls

#endif

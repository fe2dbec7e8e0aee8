#ifndef DNLS_DIAGNOSTICS_HPP
#define DNLS_DIAGNOSTICS_HPP

// Predictions derived from the energy inequality and the checks that hold
// simulated trajectories against them: absorbing ball, tail decay,
// two-trajectory contraction and continuity with respect to data.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "driving.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "monitor.hpp"
#include "parallel.hpp"

namespace dnls {

// ---------------------------------------------------------------- absorbing

struct AbsorbingPrediction {
    double gamma_eff = 0.0; // G = gamma - 2 sup|g2|
    double g1_sup = 0.0;
    double radius = 0.0;    // K, with K^2 = 2 sup|g1|^2 / G^2
    double initial_radius = 0.0;
    double entry_time = 0.0; // T(r)

    // T(r) = ln(G^2 r^2 / sup|g1|^2) / G, clamped at 0.
    double entry_time_for(double r) const {
        if (r <= 0.0) return 0.0;
        if (g1_sup == 0.0) return std::numeric_limits<double>::infinity();
        return std::max(0.0, std::log(gamma_eff * gamma_eff * r * r / (g1_sup * g1_sup)) / gamma_eff);
    }
};

inline AbsorbingPrediction predict_absorbing(const ModelParams& params, const DrivingSpec& driving, double r) {
    const double g_eff = effective_damping(params, driving);
    if (!(g_eff > 0.0))
        throw PreconditionError("strong-damping condition violated: gamma - 2 sup|g2| = " + std::to_string(g_eff) +
                                " <= 0 (need gamma > 2 sup|g2|)");
    if (!(r >= 0.0)) throw DomainError("initial radius must be nonnegative");
    AbsorbingPrediction p;
    p.gamma_eff = g_eff;
    p.g1_sup = driving.g1.sup_norm();
    p.radius = std::sqrt(2.0) * p.g1_sup / g_eff;
    p.initial_radius = r;
    p.entry_time = p.entry_time_for(r);
    return p;
}

struct AbsorbingReport {
    AbsorbingPrediction prediction;
    double tolerance = 1e-6;
    std::optional<double> first_entry;  // relative to t0
    std::optional<double> first_exit;   // first time outside after entry
    std::size_t violations_after_deadline = 0;
    double max_norm_after_deadline = 0.0;
    bool pass() const noexcept {
        return first_entry && *first_entry <= prediction.entry_time && !first_exit && violations_after_deadline == 0;
    }
};

// Every sample with t >= t0 + T(r) must satisfy |psi| <= K (1 + 1e-6); the
// first entry must happen no later than T(r) and the ball is never left again.
inline AbsorbingReport verify_absorbing(const Trajectory& traj, const AbsorbingPrediction& prediction) {
    if (traj.size() == 0) throw DomainError("empty trajectory");
    const double t0 = traj.times.front();
    if (traj.times.back() - t0 < prediction.entry_time)
        throw DomainError("trajectory shorter than the predicted entry time");
    AbsorbingReport report;
    report.prediction = prediction;
    const double k = prediction.radius * (1.0 + report.tolerance);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.times[i] - t0;
        const bool inside = traj.norms[i] <= k;
        if (inside && !report.first_entry) report.first_entry = t;
        if (!inside && report.first_entry && !report.first_exit) report.first_exit = t;
        if (t >= prediction.entry_time) {
            report.max_norm_after_deadline = std::max(report.max_norm_after_deadline, traj.norms[i]);
            if (!inside) ++report.violations_after_deadline;
        }
    }
    return report;
}

// ---------------------------------------------------------------- tail

struct TailPrediction {
    double xi = 0.0;
    double initial_radius = 0.0;
    double gamma_eff = 0.0;
    double time = 0.0;          // T(xi, r) = ln(2 r^2 / xi) / G
    long cutoff = 0;            // M(xi)
    double driving_tail = 0.0;  // certified sup_t sum_{|k|>M} |g1_k|^2
};

inline TailPrediction predict_tail(double xi, double r, const ModelParams& params, const DrivingSpec& driving) {
    if (!(xi > 0.0)) throw DomainError("tail target xi must be positive");
    const double g_eff = effective_damping(params, driving);
    require_effective_damping(g_eff);
    if (!driving.g1.profile.is_localized())
        throw DomainError("tail prediction needs a localized (exponential, gaussian or single-site) g1 profile");
    TailPrediction p;
    p.xi = xi;
    p.initial_radius = r;
    p.gamma_eff = g_eff;
    p.time = r > 0.0 ? std::max(0.0, std::log(2.0 * r * r / xi) / g_eff) : 0.0;
    const long half = static_cast<long>(driving.sites() / 2);
    const double budget = g_eff * g_eff * xi / 2.0;
    for (long m = 0; m < half; ++m) {
        const double tail = driving.g1.sup_tail(m);
        if (tail <= budget) {
            p.cutoff = m;
            p.driving_tail = tail;
            return p;
        }
    }
    throw DomainError("truncation too small: tail cutoff M(xi) would exceed N/2");
}

struct TailReport {
    TailPrediction prediction;
    std::size_t samples_checked = 0;
    std::size_t violations = 0;
    double max_tail_after_deadline = 0.0;
    std::optional<double> first_violation;
    bool pass() const noexcept { return violations == 0; }
};

inline TailReport verify_tail(const Trajectory& traj, const TailPrediction& prediction) {
    if (traj.size() == 0) throw DomainError("empty trajectory");
    const double t0 = traj.times.front();
    if (traj.times.back() - t0 < prediction.time) throw DomainError("trajectory shorter than T(xi, r)");
    TailReport report;
    report.prediction = prediction;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] - t0 < prediction.time) continue;
        const double tail = tail_mass(traj.states[i], prediction.cutoff);
        report.max_tail_after_deadline = std::max(report.max_tail_after_deadline, tail);
        ++report.samples_checked;
        if (tail > prediction.xi) {
            ++report.violations;
            if (!report.first_violation) report.first_violation = traj.times[i] - t0;
        }
    }
    return report;
}

// ---------------------------------------------------------------- fits

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ConvergenceError("line fit needs at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw ConvergenceError("degenerate line fit (all abscissae equal)");
    LineFit f;
    f.points = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    const double sse = std::max(0.0, syy - f.slope * sxy);
    f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    f.slope_stderr = n > 2 ? std::sqrt(sse / static_cast<double>(n - 2) / sxx) : 0.0;
    return f;
}

// ---------------------------------------------------------------- contraction

struct ContractionReport {
    double fitted_rate = 0.0;     // slope of ln|psi - phi| versus t
    double predicted_rate = 0.0;  // gamma - a K^b - sup|g2|
    double radius = 0.0;          // K used in the prediction
    double slack = 0.05;
    double fit_start = 0.0;
    double fit_end = 0.0;
    double initial_distance = 0.0;
    LineFit fit;
    bool pass = false;
};

struct ContractionOptions {
    double slack = 0.05;
    double fit_fraction = 0.8;     // last fraction of the decay window used in the fit
    double noise_floor = 1e-7;     // relative to 1 + K; smaller distances are dropped
    unsigned threads = 0;
};

// Integrates two trajectories from distinct initial states and fits the decay
// rate of their distance. Passes iff slope <= -(1 - slack) * predicted_rate.
inline ContractionReport contraction_rate(const ModelParams& params, const DrivingSpec& driving,
                                          const std::array<LatticeState, 2>& seeds, double horizon,
                                          const IntegratorConfig& config, const ContractionOptions& options = {}) {
    const auto absorbing = predict_absorbing(params, driving, 0.0);
    const auto& nl = params.nonlinearity;
    ContractionReport report;
    report.slack = options.slack;
    report.radius = absorbing.radius;
    const double nonlinear = nl.is_zero() ? 0.0 : nl.a * std::pow(absorbing.radius, nl.b);
    report.predicted_rate = params.gamma - nonlinear - driving.g2.sup_norm();
    if (!(report.predicted_rate > 0.0))
        throw PreconditionError("contraction needs gamma > a K^b + sup|g2| (gamma = " + std::to_string(params.gamma) +
                                ", a K^b + sup|g2| = " + std::to_string(params.gamma - report.predicted_rate) + ")");
    report.initial_distance = distance(seeds[0], seeds[1]);
    if (report.initial_distance == 0.0) throw ConvergenceError("degenerate fit: contraction seeds are identical");
    if (!(horizon > 0.0)) throw DomainError("contraction horizon must be positive");

    std::array<Trajectory, 2> traj;
    parallel_for(2, resolve_threads(options.threads), [&](std::size_t k) {
        traj[k] = integrate(seeds[k], 0.0, horizon, params, driving, config);
    });

    const double k_ball = absorbing.radius * (1.0 + 1e-6);
    // Without a nonlinearity the difference decays at the linear rate everywhere.
    std::size_t start = nl.is_zero() ? 0 : traj[0].size();
    for (std::size_t i = 0; i < traj[0].size() && start == traj[0].size(); ++i)
        if (traj[0].norms[i] <= k_ball && traj[1].norms[i] <= k_ball) {
            start = i;
            break;
        }
    if (start == traj[0].size()) throw ConvergenceError("trajectories never entered the absorbing ball");
    // Stay inside until the end and above the noise floor.
    const double floor = options.noise_floor * (1.0 + absorbing.radius);
    std::vector<double> ts, logs;
    std::size_t end = start;
    for (std::size_t i = start; i < traj[0].size(); ++i) {
        const double d = distance(traj[0].states[i], traj[1].states[i]);
        if (d <= floor) break;
        ts.push_back(traj[0].times[i]);
        logs.push_back(std::log(d));
        end = i;
    }
    const std::size_t window = ts.size();
    const std::size_t skip = window - static_cast<std::size_t>(std::ceil(options.fit_fraction * static_cast<double>(window)));
    if (window - skip < 3) throw ConvergenceError("decay window too short for a rate fit");
    report.fit = fit_line(std::span(ts).subspan(skip), std::span(logs).subspan(skip));
    report.fitted_rate = report.fit.slope;
    report.fit_start = ts[skip];
    report.fit_end = traj[0].times[end];
    report.pass = report.fitted_rate <= -(1.0 - options.slack) * report.predicted_rate;
    return report;
}

// ---------------------------------------------------------------- continuity

struct ContinuityReport {
    std::vector<double> times;
    std::vector<double> measured;
    std::vector<double> bound;
    double growth_rate = 0.0;   // gamma + L + 4|kappa| + sup|g2|
    double lipschitz = 0.0;     // L = sqrt(2) a R^b
    double radius = 0.0;        // R
    bool radius_certified = true;
    double initial_gap = 0.0;
    double g1_gap = 0.0;        // sup over the horizon of |g1n - g1|
    double g2_gap = 0.0;
    double max_ratio = 0.0;     // max measured / bound
    bool pass = false;
};

namespace detail {

// Certified sup over [ta, tb] of |fa(t) - fb(t)| via a grid plus a Lipschitz correction.
inline double field_gap_sup(const DrivingField& fa, const DrivingField& fb, double ta, double tb) {
    if (fa == fb) return 0.0;
    auto lipschitz = [](const DrivingField& f) {
        double l = 0.0;
        for (const auto& h : f.law.terms()) l += std::abs(h.amplitude * h.frequency);
        return f.profile.norm() * l;
    };
    const double lip = lipschitz(fa) + lipschitz(fb);
    const std::size_t n = fa.profile.size();
    std::vector<Complex> a(n), b(n);
    const std::size_t steps = std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil((tb - ta) * 200.0)));
    const double h = (tb - ta) / static_cast<double>(steps);
    double sup = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = ta + h * static_cast<double>(k);
        fa.sample_into(t, a);
        fb.sample_into(t, b);
        sup = std::max(sup, distance(a, b));
    }
    return sup + 0.5 * lip * h;
}

} // namespace detail

// Compares |U^{g_n}(t,t0) theta_n - U^g(t,t0) theta| with the Gronwall bound
//   e^{lambda (t-t0)} |theta_n - theta| + (e^{lambda (t-t0)} - 1)/lambda (|g1n - g1| + R |g2n - g2|).
inline ContinuityReport continuity_gap(const ModelParams& params, const DrivingSpec& driving,
                                       const DrivingSpec& perturbed, const LatticeState& theta,
                                       const LatticeState& theta_n, double horizon, const IntegratorConfig& config,
                                       unsigned threads = 0) {
    if (!(horizon >= 0.0)) throw DomainError("continuity horizon must be nonnegative");
    std::array<Trajectory, 2> traj;
    parallel_for(2, resolve_threads(threads), [&](std::size_t k) {
        traj[k] = k == 0 ? integrate(theta, 0.0, horizon, params, driving, config)
                         : integrate(theta_n, 0.0, horizon, params, perturbed, config);
    });

    ContinuityReport report;
    report.initial_gap = distance(theta, theta_n);
    report.g1_gap = detail::field_gap_sup(perturbed.g1, driving.g1, 0.0, horizon);
    report.g2_gap = detail::field_gap_sup(perturbed.g2, driving.g2, 0.0, horizon);

    const double ga = effective_damping(params, driving);
    const double gb = effective_damping(params, perturbed);
    if (ga > 0.0 && gb > 0.0) {
        const double r0 = std::max(l2_norm(theta), l2_norm(theta_n));
        const double tail = std::max(driving.g1.sup_norm() / ga, perturbed.g1.sup_norm() / gb);
        report.radius = std::sqrt(r0 * r0 + tail * tail) * (1.0 + 1e-6);
    } else {
        report.radius_certified = false;
        for (const auto& t : traj)
            for (double n : t.norms) report.radius = std::max(report.radius, n * (1.0 + 1e-6));
    }
    const auto& nl = params.nonlinearity;
    report.lipschitz = nl.is_zero() ? 0.0 : std::sqrt(2.0) * nl.a * std::pow(report.radius, nl.b);
    report.growth_rate = params.gamma + report.lipschitz + 4.0 * std::abs(params.kappa) + driving.g2.sup_norm();
    const double forcing = report.g1_gap + report.radius * report.g2_gap;
    const double lambda = report.growth_rate;

    report.pass = true;
    for (std::size_t i = 0; i < traj[0].size(); ++i) {
        const double t = traj[0].times[i];
        const double grow = std::exp(lambda * t);
        const double b = grow * report.initial_gap + (lambda > 0.0 ? std::expm1(lambda * t) / lambda : t) * forcing;
        const double m = distance(traj[0].states[i], traj[1].states[i]);
        report.times.push_back(t);
        report.measured.push_back(m);
        report.bound.push_back(b);
        // Integration noise allowance: both runs carry O(rtol) errors.
        const double allowance = 10.0 * config.rtol * (1.0 + report.radius);
        if (m > b + allowance) report.pass = false;
        if (b > 0.0) report.max_ratio = std::max(report.max_ratio, m / b);
    }
    return report;
}

} // namespace dnls

#endif

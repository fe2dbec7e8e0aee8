#ifndef DNLS_INTEGRATOR_HPP
#define DNLS_INTEGRATOR_HPP

// Embedded Dormand-Prince 5(4) integration of the truncated lattice with a
// safety-factor step controller, cubic Hermite dense output and sampled
// trajectories.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driving.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "model.hpp"

namespace dnls {

enum class DenseOutput {
    hermite,       // samples interpolated between accepted steps
    step_endpoint, // steps are clipped so that every sample is a step endpoint
};

inline std::string_view to_string(DenseOutput d) {
    return d == DenseOutput::hermite ? "hermite" : "step_endpoint";
}

inline DenseOutput parse_dense_output(std::string_view s) {
    if (s == "hermite") return DenseOutput::hermite;
    if (s == "step_endpoint") return DenseOutput::step_endpoint;
    throw DomainError("unknown dense output mode '" + std::string(s) + "'");
}

struct IntegratorConfig {
    double rtol = 1e-8;
    double atol = 1e-11;
    double dt_init = 1e-2;
    double dt_min = 1e-12;
    double dt_max = 0.25;
    double sample_stride = 0.1;
    DenseOutput dense_output = DenseOutput::hermite;
    long max_steps = 50'000'000;

    // Tolerances used for oracle comparisons and period maps.
    static IntegratorConfig reference() {
        IntegratorConfig c;
        c.rtol = 1e-11;
        c.atol = 1e-13;
        c.dt_init = 1e-3;
        return c;
    }

    IntegratorConfig with_stride(double stride) const {
        IntegratorConfig c = *this;
        c.sample_stride = stride;
        return c;
    }

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("tolerances must be positive");
        if (atol > rtol) throw DomainError("atol must not exceed rtol");
        if (!(dt_min > 0.0) || !(dt_min <= dt_init) || !(dt_init <= dt_max))
            throw DomainError("need 0 < dt_min <= dt_init <= dt_max");
        if (!(sample_stride > 0.0)) throw DomainError("sample stride must be positive");
        if (max_steps <= 0) throw DomainError("max_steps must be positive");
    }

    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct StepStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;
    double smallest_dt = std::numeric_limits<double>::infinity();
    double largest_dt = 0.0;

    friend bool operator==(const StepStats&, const StepStats&) = default;
};

// Heuristic ceiling for explicit steps from the local growth bound
// 4|kappa| + a R^b + gamma + |g2|.
inline double suggested_dt_max(const ModelParams& params, const DrivingSpec& driving, double radius) {
    const auto& nl = params.nonlinearity;
    const double growth = 4.0 * std::abs(params.kappa) + (nl.is_zero() ? 0.0 : nl.a * std::pow(radius, nl.b)) +
                          params.gamma + driving.g2.sup_norm();
    return growth > 0.0 ? 3.0 / growth : 1.0;
}

template <class System>
class DormandPrince54 {
public:
    struct Attempt {
        double error;
        double dt_next;
        bool accepted;
    };

    DormandPrince54(System& system, const IntegratorConfig& config) : sys_(system), cfg_(config) {}

    // Tries one step of size dt from (t, y). On acceptance y_new() holds the
    // new state and f_new() its derivative.
    Attempt attempt(double t, std::span<const Complex> y, double dt) {
        const std::size_t n = y.size();
        resize(n);
        if (!fsal_valid_) {
            sys_(t, y, k1_);
            ++stats_.rhs_evaluations;
            fsal_valid_ = true;
        }
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * (a21 * k1_[i]);
        sys_(t + c2 * dt, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * (a31 * k1_[i] + a32 * k2_[i]);
        sys_(t + c3 * dt, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + dt * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        sys_(t + c4 * dt, tmp_, k4_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + dt * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        sys_(t + c5 * dt, tmp_, k5_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + dt * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        sys_(t + dt, tmp_, k6_);
        for (std::size_t i = 0; i < n; ++i)
            ynew_[i] = y[i] + dt * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        sys_(t + dt, ynew_, k7_);
        stats_.rhs_evaluations += 6;

        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Complex e = dt * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double sre = cfg_.atol + cfg_.rtol * std::max(std::abs(y[i].real()), std::abs(ynew_[i].real()));
            const double sim = cfg_.atol + cfg_.rtol * std::max(std::abs(y[i].imag()), std::abs(ynew_[i].imag()));
            acc += (e.real() / sre) * (e.real() / sre) + (e.imag() / sim) * (e.imag() / sim);
        }
        const double err = n ? std::sqrt(acc / static_cast<double>(2 * n)) : 0.0;
        if (!std::isfinite(err)) return {err, dt * min_factor, false};

        double factor = err == 0.0 ? max_factor : safety * std::pow(err, -0.2);
        factor = std::clamp(factor, min_factor, max_factor);
        const bool accepted = err <= 1.0;
        if (!accepted) factor = std::min(factor, 1.0);
        const double dt_next = std::min(dt * factor, cfg_.dt_max);
        if (accepted) {
            ++stats_.accepted;
            stats_.smallest_dt = std::min(stats_.smallest_dt, dt);
            stats_.largest_dt = std::max(stats_.largest_dt, dt);
        } else {
            ++stats_.rejected;
        }
        return {err, dt_next, accepted};
    }

    // Call after an accepted step once y_new has been copied into the state.
    void commit() { std::swap(k1_, k7_); }

    // Forget the cached derivative (state or time changed externally).
    void reset() { fsal_valid_ = false; }

    std::span<const Complex> y_new() const noexcept { return ynew_; }
    std::span<const Complex> f_start() const noexcept { return k1_; }
    std::span<const Complex> f_new() const noexcept { return k7_; }
    const StepStats& stats() const noexcept { return stats_; }

    static constexpr double safety = 0.9;
    static constexpr double min_factor = 0.2;
    static constexpr double max_factor = 5.0;

private:
    void resize(std::size_t n) {
        if (k1_.size() == n) return;
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_}) v->assign(n, Complex{});
        fsal_valid_ = false;
    }

    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                            a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                            a65 = -5103.0 / 18656.0;
    static constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                            a76 = 11.0 / 84.0;
    static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                            e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

    System& sys_;
    const IntegratorConfig& cfg_;
    std::vector<Complex> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
    bool fsal_valid_ = false;
    StepStats stats_;
};

struct StepResult {
    LatticeState state;
    double error;
    double dt_next;
    bool accepted;
};

// Single controlled step attempt. A rejected step returns the input state.
inline StepResult step(const LatticeState& state, double t, double dt, const ModelParams& params,
                       const DrivingSpec& driving, const IntegratorConfig& config) {
    config.validate();
    if (!(dt >= config.dt_min && dt <= config.dt_max)) throw DomainError("dt outside [dt_min, dt_max]");
    DnlsSystem system(params, driving, state.bc());
    DormandPrince54<DnlsSystem> stepper(system, config);
    const auto a = stepper.attempt(t, state.values(), dt);
    if (!a.accepted) {
        if (a.dt_next < config.dt_min) throw StiffnessError(t, l2_norm(state));
        return {state, a.error, a.dt_next, false};
    }
    const auto y = stepper.y_new();
    return {LatticeState(std::vector<Complex>(y.begin(), y.end()), state.bc()), a.error, a.dt_next, true};
}

namespace detail {

inline void hermite(double theta, double h, std::span<const Complex> y0, std::span<const Complex> f0,
                    std::span<const Complex> y1, std::span<const Complex> f1, std::span<Complex> out) noexcept {
    const double t2 = theta * theta, t3 = t2 * theta;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + theta;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
}

} // namespace detail

// Integrates y from t0 to t1, invoking on_sample(t, state_span) at
// t0, t0 + stride, ... and finally at t1. Returns step statistics.
template <class System, class Observer>
StepStats propagate(System& system, std::vector<Complex>& y, double t0, double t1, const IntegratorConfig& config,
                    Observer&& on_sample) {
    config.validate();
    if (!(t1 >= t0)) throw DomainError("integration needs t1 >= t0");
    const double stride = config.sample_stride;
    const double eps_t = 1e-12 * std::max({1.0, std::abs(t0), std::abs(t1)});
    long next_index = 1;
    auto sample_time = [&](long k) { return t0 + static_cast<double>(k) * stride; };

    on_sample(t0, std::span<const Complex>(y));
    if (t1 - t0 <= eps_t) return {};

    DormandPrince54<System> stepper(system, config);
    std::vector<Complex> y_prev(y.size()), f_prev(y.size()), scratch(y.size());
    double t = t0;
    double dt = std::min(config.dt_init, t1 - t0);
    long steps = 0;
    while (t1 - t > eps_t) {
        if (++steps > config.max_steps) throw StiffnessError(t, l2_norm(y));
        double target = t1;
        if (config.dense_output == DenseOutput::step_endpoint && sample_time(next_index) < t1 - eps_t)
            target = sample_time(next_index);
        bool clipped = false;
        double h = dt;
        if (t + h >= target - eps_t) {
            h = target - t;
            clipped = true;
        }
        const auto a = stepper.attempt(t, y, h);
        if (!a.accepted) {
            if (a.dt_next < config.dt_min) throw StiffnessError(t, l2_norm(y));
            dt = a.dt_next;
            continue;
        }
        std::copy(y.begin(), y.end(), y_prev.begin());
        const auto f0 = stepper.f_start();
        std::copy(f0.begin(), f0.end(), f_prev.begin());
        const auto yn = stepper.y_new();
        std::copy(yn.begin(), yn.end(), y.begin());
        const double t_prev = t;
        t = clipped ? target : t + h;
        // Samples strictly inside (t_prev, t]; the final t1 sample is emitted below.
        while (sample_time(next_index) < t1 - eps_t && sample_time(next_index) <= t + eps_t) {
            const double ts = sample_time(next_index);
            if (std::abs(ts - t) <= eps_t) {
                on_sample(ts, std::span<const Complex>(y));
            } else {
                detail::hermite((ts - t_prev) / h, h, y_prev, f_prev, y, stepper.f_new(), scratch);
                on_sample(ts, std::span<const Complex>(scratch));
            }
            ++next_index;
        }
        stepper.commit();
        // Keep the controller's proposal; a clipped final step must not shrink it.
        dt = clipped ? std::max(a.dt_next, std::min(dt, config.dt_max)) : a.dt_next;
        dt = std::clamp(dt, config.dt_min, config.dt_max);
    }
    on_sample(t1, std::span<const Complex>(y));
    return stepper.stats();
}

struct Trajectory {
    std::vector<double> times;
    std::vector<LatticeState> states;
    std::vector<double> norms;
    std::optional<long> tail_cutoff;
    std::vector<double> tail;
    StepStats stats;

    std::size_t size() const noexcept { return times.size(); }
    const LatticeState& final_state() const { return states.back(); }

    void append(double t, LatticeState s) {
        if (!times.empty() && !(t > times.back())) throw DomainError("trajectory times must increase strictly");
        norms.push_back(l2_norm(s));
        if (tail_cutoff) tail.push_back(tail_mass(s, *tail_cutoff));
        times.push_back(t);
        states.push_back(std::move(s));
    }

    // Recomputes norms (and tail series, if requested) from the stored states.
    void recompute(std::optional<long> cutoff = std::nullopt) {
        if (cutoff) tail_cutoff = cutoff;
        norms.clear();
        tail.clear();
        for (const auto& s : states) {
            norms.push_back(l2_norm(s));
            if (tail_cutoff) tail.push_back(tail_mass(s, *tail_cutoff));
        }
    }
};

inline Trajectory integrate(const LatticeState& initial, double t0, double t1, const ModelParams& params,
                            const DrivingSpec& driving, const IntegratorConfig& config) {
    if (driving.sites() != initial.size()) throw DomainError("driving and state use different truncations");
    DnlsSystem system(params, driving, initial.bc());
    std::vector<Complex> y(initial.values().begin(), initial.values().end());
    Trajectory traj;
    const auto bc = initial.bc();
    traj.stats = propagate(system, y, t0, t1, config, [&](double t, std::span<const Complex> s) {
        traj.append(t, LatticeState(std::vector<Complex>(s.begin(), s.end()), bc));
    });
    return traj;
}

// Final state only; no samples are stored.
inline LatticeState evolve(const LatticeState& initial, double t0, double t1, const ModelParams& params,
                           const DrivingSpec& driving, const IntegratorConfig& config) {
    if (driving.sites() != initial.size()) throw DomainError("driving and state use different truncations");
    DnlsSystem system(params, driving, initial.bc());
    std::vector<Complex> y(initial.values().begin(), initial.values().end());
    IntegratorConfig c = config;
    c.sample_stride = std::max(t1 - t0, config.sample_stride);
    c.dense_output = DenseOutput::hermite;
    propagate(system, y, t0, t1, c, [](double, std::span<const Complex>) {});
    for (const auto& z : y)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw StiffnessError(t1, l2_norm(y));
    return LatticeState(std::move(y), initial.bc());
}

} // namespace dnls

#endif

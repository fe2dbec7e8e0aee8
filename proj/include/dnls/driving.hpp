#ifndef DNLS_DRIVING_HPP
#define DNLS_DRIVING_HPP

// Separable driving fields g(t)_n = p_n s(t + h): a spatial profile p realized
// on the truncation times a scalar temporal law s, shifted by a hull offset h.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "summation.hpp"

namespace dnls {

enum class ProfileKind { exponential, gaussian, single_site, table };

class SpatialProfile {
public:
    // p_n = A exp(-alpha |n|)
    static SpatialProfile exponential(std::size_t sites, double amplitude, double rate) {
        if (!(rate > 0.0)) throw DomainError("exponential profile needs rate > 0");
        SpatialProfile p(ProfileKind::exponential, sites);
        p.amplitude_ = amplitude;
        p.shape_ = rate;
        for (std::size_t i = 0; i < sites; ++i)
            p.values_[i] = amplitude * std::exp(-rate * std::abs(static_cast<double>(p.site_of(i))));
        return p;
    }

    // p_n = A exp(-n^2 / (2 w^2))
    static SpatialProfile gaussian(std::size_t sites, double amplitude, double width) {
        if (!(width > 0.0)) throw DomainError("gaussian profile needs width > 0");
        SpatialProfile p(ProfileKind::gaussian, sites);
        p.amplitude_ = amplitude;
        p.shape_ = width;
        for (std::size_t i = 0; i < sites; ++i) {
            const double n = static_cast<double>(p.site_of(i));
            p.values_[i] = amplitude * std::exp(-n * n / (2.0 * width * width));
        }
        return p;
    }

    static SpatialProfile single_site(std::size_t sites, double amplitude, long site = 0) {
        SpatialProfile p(ProfileKind::single_site, sites);
        p.amplitude_ = amplitude;
        p.site_ = site;
        p.values_.at(p.index_for(site)) = amplitude;
        return p;
    }

    static SpatialProfile table(std::vector<Complex> values) {
        SpatialProfile p(ProfileKind::table, values.size());
        for (const auto& v : values)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw DomainError("profile table contains a non-finite entry");
        p.values_ = std::move(values);
        return p;
    }

    static SpatialProfile zero(std::size_t sites) { return single_site(sites, 0.0, 0); }

    ProfileKind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return amplitude_; }
    double rate() const noexcept { return shape_; }
    double width() const noexcept { return shape_; }
    long site() const noexcept { return site_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::span<const Complex> values() const noexcept { return values_; }

    double norm() const noexcept { return l2_norm(values_); }

    // Certified upper bound of sum_{|n|>m} |p_n|^2 on the infinite lattice.
    double tail_bound(long m) const {
        if (m < 0) throw DomainError("negative tail cutoff");
        switch (kind_) {
        case ProfileKind::exponential: {
            const double q = std::exp(-2.0 * shape_);
            return round_up * amplitude_ * amplitude_ * 2.0 * std::exp(-2.0 * shape_ * static_cast<double>(m + 1)) /
                   (1.0 - q);
        }
        case ProfileKind::gaussian: {
            // Sum dominated by the geometric series with ratio exp(-(2n+1)/(2w^2)) at n = m+1.
            const double w2 = 2.0 * shape_ * shape_;
            const double n = static_cast<double>(m + 1);
            const double first = amplitude_ * amplitude_ * std::exp(-2.0 * n * n / w2);
            const double ratio = std::exp(-2.0 * (2.0 * n + 1.0) / w2);
            return round_up * 2.0 * first / (1.0 - ratio);
        }
        case ProfileKind::single_site:
            return std::abs(site_) > m ? amplitude_ * amplitude_ : 0.0;
        case ProfileKind::table:
            break;
        }
        return m < static_cast<long>(size() / 2) ? tail_mass(values_, m) : 0.0;
    }

    bool is_localized() const noexcept { return kind_ != ProfileKind::table; }

    friend bool operator==(const SpatialProfile&, const SpatialProfile&) = default;

private:
    // Covers the rounding of the closed forms so the bounds stay certified.
    static constexpr double round_up = 1.0 + 1e-12;

    SpatialProfile(ProfileKind kind, std::size_t sites) : kind_(kind), values_(sites, Complex{}) {
        if (sites < LatticeState::min_sites) throw DomainError("profile needs at least 3 sites");
    }

    long site_of(std::size_t i) const noexcept {
        return static_cast<long>(i) - static_cast<long>(values_.size() / 2);
    }

    std::size_t index_for(long site) const {
        const long half = static_cast<long>(values_.size() / 2);
        const long idx = site + half;
        if (idx < 0 || idx >= static_cast<long>(values_.size()))
            throw DomainError("profile site outside truncation");
        return static_cast<std::size_t>(idx);
    }

    ProfileKind kind_;
    double amplitude_ = 0.0;
    double shape_ = 0.0;
    long site_ = 0;
    std::vector<Complex> values_;
};

enum class TemporalKind { periodic, quasiperiodic, almost_periodic };

struct Harmonic {
    double frequency = 0.0; // angular frequency
    double amplitude = 0.0;
    double phase = 0.0;

    friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

// True when x/y is within round-off of a fraction p/q with q <= max_denominator.
inline bool is_commensurate(double x, double y, std::int64_t max_denominator = 1'000'000) {
    if (x == 0.0 || y == 0.0) return true;
    const double r = std::abs(x / y);
    const double tol = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r);
    // Continued-fraction convergents h/k.
    double h_prev = 1.0, h = std::floor(r);
    double k_prev = 0.0, k = 1.0;
    double frac = r - std::floor(r);
    while (true) {
        if (std::abs(r - h / k) <= tol) return true;
        if (frac < 1e-300) return true;
        const double inv = 1.0 / frac;
        const double a = std::floor(inv);
        frac = inv - a;
        const double h_next = a * h + h_prev;
        const double k_next = a * k + k_prev;
        if (k_next > static_cast<double>(max_denominator)) return false;
        h_prev = h; h = h_next;
        k_prev = k; k = k_next;
    }
}

class TemporalLaw {
public:
    // s(t) = mean + sum_k c_k cos(2 pi k t / T + phi_k), k = 1, 2, ...
    static TemporalLaw periodic(double period, double mean, const std::vector<std::pair<double, double>>& harmonics = {}) {
        if (!(period > 0.0) || !std::isfinite(period)) throw DomainError("periodic law needs period > 0");
        TemporalLaw law(TemporalKind::periodic, mean);
        law.period_ = period;
        for (std::size_t k = 0; k < harmonics.size(); ++k)
            law.terms_.push_back({2.0 * std::numbers::pi * static_cast<double>(k + 1) / period,
                                  harmonics[k].first, harmonics[k].second});
        return law;
    }

    static TemporalLaw constant(double value, double period = 2.0 * std::numbers::pi) {
        return periodic(period, value);
    }

    // s(t) = mean + sum_j c_j cos(w_j t + phi_j) with rationally independent w_j.
    static TemporalLaw quasiperiodic(double mean, std::vector<Harmonic> terms) {
        if (terms.size() < 2) throw DomainError("quasiperiodic law needs at least two frequencies");
        check_independent(terms);
        TemporalLaw law(TemporalKind::quasiperiodic, mean);
        law.terms_ = std::move(terms);
        return law;
    }

    static TemporalLaw almost_periodic(double mean, std::vector<Harmonic> terms) {
        if (terms.size() < 3) throw DomainError("almost-periodic law needs at least three harmonics");
        check_independent(terms);
        TemporalLaw law(TemporalKind::almost_periodic, mean);
        law.terms_ = std::move(terms);
        return law;
    }

    TemporalKind kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }
    double shift() const noexcept { return shift_; }
    const std::vector<Harmonic>& terms() const noexcept { return terms_; }
    std::optional<double> period() const noexcept {
        if (kind_ == TemporalKind::periodic) return period_;
        return std::nullopt;
    }

    double operator()(double t) const noexcept {
        const double tau = t + shift_;
        if (kind_ == TemporalKind::periodic) {
            // Reduce the phase once so that s(t + T) == s(t) holds to round-off.
            const double phase = tau - period_ * std::floor(tau / period_);
            double s = mean_;
            for (const auto& h : terms_) s += h.amplitude * std::cos(h.frequency * phase + h.phase);
            return s;
        }
        double s = mean_;
        for (const auto& h : terms_) s += h.amplitude * std::cos(h.frequency * tau + h.phase);
        return s;
    }

    // |mean| + sum |c_k| >= sup_t |s(t)|.
    double amplitude_bound() const noexcept {
        double s = std::abs(mean_);
        for (const auto& h : terms_) s += std::abs(h.amplitude);
        return s;
    }

    bool is_constant() const noexcept {
        for (const auto& h : terms_)
            if (h.amplitude != 0.0) return false;
        return true;
    }

    TemporalLaw shifted(double h) const {
        TemporalLaw law = *this;
        law.shift_ += h;
        return law;
    }

    friend bool operator==(const TemporalLaw&, const TemporalLaw&) = default;

private:
    TemporalLaw(TemporalKind kind, double mean) : kind_(kind), mean_(mean) {
        if (!std::isfinite(mean)) throw DomainError("temporal law mean must be finite");
    }

    static void check_independent(const std::vector<Harmonic>& terms) {
        for (const auto& h : terms)
            if (h.frequency == 0.0 || !std::isfinite(h.frequency) || !std::isfinite(h.amplitude))
                throw DomainError("frequencies must be nonzero and finite");
        for (std::size_t i = 0; i < terms.size(); ++i)
            for (std::size_t j = i + 1; j < terms.size(); ++j)
                if (is_commensurate(terms[i].frequency, terms[j].frequency))
                    throw DomainError("frequencies " + std::to_string(terms[i].frequency) + " and " +
                                      std::to_string(terms[j].frequency) + " are commensurate");
    }

    TemporalKind kind_;
    double mean_ = 0.0;
    double period_ = 0.0;
    double shift_ = 0.0;
    std::vector<Harmonic> terms_;
};

struct DrivingField {
    SpatialProfile profile;
    TemporalLaw law;

    static DrivingField none(std::size_t sites) {
        return {SpatialProfile::zero(sites), TemporalLaw::constant(0.0)};
    }

    void sample_into(double t, std::span<Complex> out) const noexcept {
        const double s = law(t);
        const auto p = profile.values();
        for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * s;
    }

    // Exact for separable fields up to the amplitude bound of the law.
    double sup_norm() const noexcept { return profile.norm() * law.amplitude_bound(); }

    // sup_t sum_{|n|>m} |g_n(t)|^2, certified.
    double sup_tail(long m) const {
        const double s = law.amplitude_bound();
        return profile.tail_bound(m) * s * s;
    }

    bool is_zero() const noexcept { return sup_norm() == 0.0; }

    friend bool operator==(const DrivingField&, const DrivingField&) = default;
};

// g = (g1 additive, g2 multiplicative).
struct DrivingSpec {
    DrivingField g1;
    DrivingField g2;

    static DrivingSpec none(std::size_t sites) { return {DrivingField::none(sites), DrivingField::none(sites)}; }

    std::size_t sites() const noexcept { return g1.profile.size(); }

    void validate() const {
        if (g1.profile.size() != g2.profile.size())
            throw DomainError("g1 and g2 realized on different truncations");
    }

    friend bool operator==(const DrivingSpec&, const DrivingSpec&) = default;
};

inline std::pair<LatticeState, LatticeState> sample_driving(const DrivingSpec& spec, double t) {
    std::vector<Complex> g1(spec.sites()), g2(spec.sites());
    spec.g1.sample_into(t, g1);
    spec.g2.sample_into(t, g2);
    return {LatticeState(std::move(g1)), LatticeState(std::move(g2))};
}

// Hull translation T(h) g = g(. + h).
inline DrivingSpec translate(const DrivingSpec& spec, double h) {
    return {{spec.g1.profile, spec.g1.law.shifted(h)}, {spec.g2.profile, spec.g2.law.shifted(h)}};
}

// Upper bounds of (sup_t |g1(t)|, sup_t |g2(t)|).
inline std::pair<double, double> sup_norm(const DrivingSpec& spec) {
    return {spec.g1.sup_norm(), spec.g2.sup_norm()};
}

// Common period of every nonzero periodic component, if one exists.
inline std::optional<double> common_period(const DrivingSpec& spec) {
    std::optional<double> period;
    bool any_nonzero = false;
    for (const DrivingField* f : {&spec.g1, &spec.g2}) {
        if (f->is_zero()) continue;
        any_nonzero = true;
        const auto p = f->law.period();
        if (!p) return std::nullopt;
        if (period && std::abs(*period - *p) > 1e-12 * *period) return std::nullopt;
        period = p;
    }
    if (!any_nonzero) {
        for (const DrivingField* f : {&spec.g1, &spec.g2})
            if (const auto p = f->law.period()) return p;
    }
    return period;
}

// gamma - 2 sup|g2|, the effective damping of every decay estimate.
inline double effective_damping(const ModelParams& params, const DrivingSpec& driving) {
    return params.gamma - 2.0 * driving.g2.sup_norm();
}

} // namespace dnls

#endif

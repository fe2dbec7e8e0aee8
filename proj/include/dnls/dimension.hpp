#ifndef DNLS_DIMENSION_HPP
#define DNLS_DIMENSION_HPP

// Correlation (Grassberger-Procaccia) dimension of a sampled point set.
//
// C(eps) is the fraction of admissible pairs (|i - j| >= Theiler window)
// closer than eps. The dimension estimate is the least-squares slope of
// ln C versus ln eps over one decade of eps whose upper end is the radius at
// which C reaches 10^-1.5; the confidence interval is the 95% Student-t
// interval of that slope.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "diagnostics.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "lattice.hpp"
#include "parallel.hpp"

namespace dnls {

class PointCloud {
public:
    explicit PointCloud(std::size_t dim) : dim_(dim) {
        if (dim == 0) throw DomainError("point dimension must be positive");
    }

    static PointCloud from_states(std::span<const LatticeState> states) {
        if (states.empty()) throw DomainError("no states to embed");
        PointCloud cloud(2 * states.front().size());
        for (const auto& s : states) cloud.add_state(s);
        return cloud;
    }

    void add(std::span<const double> p) {
        if (p.size() != dim_) throw DomainError("point dimension mismatch");
        coords_.insert(coords_.end(), p.begin(), p.end());
    }

    void add_state(const LatticeState& s) {
        if (2 * s.size() != dim_) throw DomainError("state dimension mismatch");
        for (const auto& z : s.values()) {
            coords_.push_back(z.real());
            coords_.push_back(z.imag());
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return coords_.size() / dim_; }
    std::span<const double> point(std::size_t i) const { return std::span(coords_).subspan(i * dim_, dim_); }

private:
    std::size_t dim_;
    std::vector<double> coords_;
};

struct DimensionOptions {
    std::size_t min_points = 2000;
    std::size_t theiler_window = 10;
    double degenerate_tolerance = 1e-9; // all pairwise distances below this => dimension 0
    double upper_correlation = 0.031622776601683794; // C at the top of the fit decade
    std::size_t ladder_size = 48;
    unsigned threads = 0;
};

struct DimensionEstimate {
    std::vector<double> radii;
    std::vector<double> correlation; // C(eps)
    double fit_lower = 0.0;
    double fit_upper = 0.0;
    double slope = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t fit_points = 0;
    std::size_t pairs = 0;
    bool degenerate = false;

    double ci_width() const noexcept { return ci_high - ci_low; }
};

namespace detail {

// Two-sided 95% Student-t quantile.
inline double student_t_975(std::size_t dof) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                       2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                       2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof == 0) return std::numeric_limits<double>::infinity();
    if (dof <= 30) return table[dof - 1];
    return 1.96 + 2.4 / static_cast<double>(dof);
}

// Sorted admissible pair distances.
inline std::vector<double> pair_distances(const PointCloud& points, std::size_t theiler, unsigned threads) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, resolve_threads(threads), [&](std::size_t i) {
        const auto pi = points.point(i);
        auto& row = rows[i];
        for (std::size_t j = i + std::max<std::size_t>(theiler, 1); j < n; ++j) {
            const auto pj = points.point(j);
            double s = 0.0;
            for (std::size_t k = 0; k < pi.size(); ++k) {
                const double d = pi[k] - pj[k];
                s += d * d;
            }
            row.push_back(std::sqrt(s));
        }
    });
    std::vector<double> all;
    for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    return all;
}

inline double correlation_at(const std::vector<double>& sorted, double eps) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), eps);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

} // namespace detail

// radii empty => an automatic log-spaced ladder spanning the pair-distance range.
inline DimensionEstimate correlation_dimension(const PointCloud& points, std::vector<double> radii = {},
                                               const DimensionOptions& options = {}) {
    if (points.size() < options.min_points)
        throw DomainError("correlation dimension needs at least " + std::to_string(options.min_points) +
                          " points, got " + std::to_string(points.size()));
    const auto d = detail::pair_distances(points, options.theiler_window, options.threads);
    if (d.size() < 10) throw DomainError("too few admissible pairs after the Theiler window");

    DimensionEstimate est;
    est.pairs = d.size();
    if (d.back() <= options.degenerate_tolerance) {
        est.degenerate = true;
        est.radii = radii.empty() ? std::vector<double>{options.degenerate_tolerance} : radii;
        for (double r : est.radii) est.correlation.push_back(detail::correlation_at(d, r));
        return est;
    }

    // Fit decade [eps_hi / 10, eps_hi], eps_hi the radius where C = upper_correlation.
    const std::size_t hi_index = std::min(
        d.size() - 1, static_cast<std::size_t>(std::ceil(options.upper_correlation * static_cast<double>(d.size()))));
    est.fit_upper = d[hi_index];
    est.fit_lower = est.fit_upper / 10.0;

    if (radii.empty()) {
        const auto first_positive = std::upper_bound(d.begin(), d.end(), 0.0);
        const double lo = std::min(first_positive == d.end() ? est.fit_lower : *first_positive, est.fit_lower / 2.0);
        const double hi = d.back();
        const std::size_t m = std::max<std::size_t>(options.ladder_size, 8);
        for (std::size_t k = 0; k < m; ++k)
            radii.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(m - 1)));
        // Make sure the fit decade is densely sampled regardless of the global range.
        for (std::size_t k = 0; k <= 12; ++k)
            radii.push_back(est.fit_lower * std::pow(10.0, static_cast<double>(k) / 12.0));
        std::sort(radii.begin(), radii.end());
        radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    } else {
        std::sort(radii.begin(), radii.end());
    }
    est.radii = radii;
    std::vector<double> lx, ly;
    for (double r : radii) {
        const double c = detail::correlation_at(d, r);
        est.correlation.push_back(c);
        if (r >= est.fit_lower * (1 - 1e-12) && r <= est.fit_upper * (1 + 1e-12) && c > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(c));
        }
    }
    if (lx.size() < 3) throw ConvergenceError("fewer than three radii inside the fit decade");
    const auto fit = fit_line(lx, ly);
    est.slope = std::max(0.0, fit.slope);
    est.fit_points = fit.points;
    const double half = detail::student_t_975(fit.points - 2) * fit.slope_stderr;
    est.ci_low = std::max(0.0, fit.slope - half);
    est.ci_high = fit.slope + half;
    return est;
}

// Poincare section of the flow: `count` states at t0 + transient + k * section_period.
inline std::vector<LatticeState> sample_section(const LatticeState& initial, double t0, double transient,
                                                double section_period, std::size_t count, const ModelParams& params,
                                                const DrivingSpec& driving, IntegratorConfig config) {
    if (!(section_period > 0.0)) throw DomainError("section period must be positive");
    if (count == 0) throw DomainError("section needs at least one point");
    const LatticeState start = evolve(initial, t0, t0 + transient, params, driving, config);
    DnlsSystem system(params, driving, initial.bc());
    std::vector<Complex> y(start.values().begin(), start.values().end());
    config.sample_stride = section_period;
    config.dense_output = DenseOutput::step_endpoint;
    std::vector<LatticeState> section;
    section.reserve(count);
    const double t_start = t0 + transient;
    propagate(system, y, t_start, t_start + section_period * static_cast<double>(count - 1), config,
              [&](double, std::span<const Complex> s) {
                  if (section.size() < count) section.emplace_back(std::vector<Complex>(s.begin(), s.end()), initial.bc());
              });
    return section;
}

} // namespace dnls

#endif

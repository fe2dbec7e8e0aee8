// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <dnls/cli.hpp>

#include "support.hpp"

using namespace dnls;
using namespace testing_support;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [failed]");
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

LatticeState scaled(const LatticeState& s, double factor) {
    std::vector<Complex> v(s.values().begin(), s.values().end());
    for (auto& z : v) z *= factor;
    return LatticeState(std::move(v), s.bc());
}

// ---------------------------------------------------------------- 1

Outcome operators() {
    Outcome o;
    const std::size_t n = 256;
    std::mt19937_64 rng(2024);
    double worst_a = 0.0, worst_adj = 0.0, worst_bb = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto bc = k % 2 == 0 ? BoundaryCondition::periodic : BoundaryCondition::dirichlet;
        auto v = random_vector(n, rng);
        // Dirichlet: B*B = -A holds exactly for states vanishing on the lowest site.
        if (bc == BoundaryCondition::dirichlet) v.front() = 0.0;
        const LatticeState psi(std::move(v), bc);
        const LatticeState theta(random_vector(n, rng), bc);
        const double np = l2_norm(psi), nt = l2_norm(theta);
        const auto a = apply_laplacian(psi);
        worst_a = std::max(worst_a, l2_norm(a) / np);
        const Complex lhs = inner_product(apply_difference(psi, Direction::forward), theta);
        const Complex rhs = inner_product(psi, apply_difference(theta, Direction::backward));
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / (np * nt));
        const auto bb = apply_difference(apply_difference(psi, Direction::forward), Direction::backward);
        std::vector<Complex> sum(n);
        for (std::size_t i = 0; i < n; ++i) sum[i] = bb[i] + a[i];
        worst_bb = std::max(worst_bb, naive_norm(sum) / np);
    }
    o.require(worst_a <= 4.0, "max |A psi|/|psi| = " + fmt("%.6f", worst_a));
    o.require(worst_adj <= 1e-12, "adjoint defect " + fmt("%.2e", worst_adj));
    o.require(worst_bb <= 1e-12, "|B*B psi + A psi| " + fmt("%.2e", worst_bb));
    return o;
}

// ---------------------------------------------------------------- 2

Outcome oracles() {
    Outcome o;
    const std::size_t sites = 5;
    const double gamma = 1.3, g = 0.8;
    const Complex psi0{0.4, -0.9};
    std::vector<Complex> v(sites);
    v[sites / 2] = psi0;
    const DrivingSpec d{{SpatialProfile::single_site(sites, g), TemporalLaw::constant(1.0)}, DrivingField::none(sites)};
    const auto traj = integrate(LatticeState(std::move(v)), 0.0, 10.0, ModelParams{0.0, gamma, NonlinearitySpec::none()},
                                d, IntegratorConfig::reference());
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::vector<Complex> expected(sites);
        expected[sites / 2] = affine_solution(psi0, g, gamma, traj.times[k]);
        worst = std::max(worst, naive_distance(to_vector(traj.states[k]), expected));
    }
    o.require(worst <= 1e-8, "affine max error " + fmt("%.2e", worst));

    std::mt19937_64 rng(31);
    const auto w = random_vector(64, rng);
    const LatticeState start(w, BoundaryCondition::periodic);
    const auto out = evolve(start, 0.0, 1.0, ModelParams{1.0, 0.0, NonlinearitySpec::none()}, DrivingSpec::none(64),
                            IntegratorConfig::reference());
    const double err = naive_distance(to_vector(out), dft_linear_flow(w, 1.0, 0.0, 1.0)) / l2_norm(start);
    o.require(err <= 1e-8, "DFT relative error " + fmt("%.2e", err));
    return o;
}

// ---------------------------------------------------------------- 3

Outcome bounds() {
    Outcome o;
    const std::size_t n = 256;
    const auto p = reference_model();
    const auto d = reference_driving(n);
    const auto cfg = IntegratorConfig::reference();
    const auto traj = integrate(random_state(n, 3.0, 9, 7), 0.0, 50.0, p, d, cfg);
    const auto dissipation = monitor_dissipation(traj, p, d, cfg.rtol);
    const auto apriori = verify_apriori(traj, p, d);
    o.require(dissipation.violations.empty(), std::to_string(dissipation.violations.size()) + " dissipation violations in " +
                                                  std::to_string(dissipation.intervals_checked) + " intervals");
    o.require(apriori.violations.empty(), std::to_string(apriori.violations.size()) + " a-priori violations in " +
                                              std::to_string(apriori.samples_checked) + " samples");
    return o;
}

// ---------------------------------------------------------------- 4

Outcome absorbing() {
    Outcome o;
    const std::size_t n = 256;
    const auto p = reference_model();
    const auto d = reference_driving(n);
    const double k = predict_absorbing(p, d, 0.0).radius;
    o.require(std::abs(k - std::sqrt(2.0) / 1.5) <= 1e-12, "K = " + fmt("%.6f", k));
    const auto pred = predict_absorbing(p, d, 10.0 * k);
    const auto traj = integrate(random_state(n, 10.0 * k, 9, 7), 0.0, 5.0 * pred.entry_time, p, d, IntegratorConfig{});
    const auto report = verify_absorbing(traj, pred);
    o.require(report.first_entry && *report.first_entry <= pred.entry_time,
              "entry at " + fmt("%.3f", report.first_entry.value_or(NAN)) + " <= T = " + fmt("%.3f", pred.entry_time));
    o.require(!report.first_exit && report.violations_after_deadline == 0, "no exit over 5 T");
    return o;
}

// ---------------------------------------------------------------- 5

Outcome tail() {
    Outcome o;
    const std::size_t n = 256;
    const auto p = reference_model();
    const auto d = reference_driving(n);
    const double r = 10.0 * predict_absorbing(p, d, 0.0).radius;
    const auto pred = predict_tail(1e-4, r, p, d);
    const auto traj = integrate(random_state(n, r, 9, 7), 0.0, std::max(2.0 * pred.time, pred.time + 20.0), p, d,
                                IntegratorConfig{});
    const auto report = verify_tail(traj, pred);
    o.require(report.pass(), "M = " + std::to_string(pred.cutoff) + ", T = " + fmt("%.3f", pred.time) +
                                 ", max tail " + fmt("%.2e", report.max_tail_after_deadline) + " over " +
                                 std::to_string(report.samples_checked) + " samples");
    return o;
}

// ---------------------------------------------------------------- 6

Outcome contraction() {
    Outcome o;
    const std::size_t n = 128;
    const auto cfg = IntegratorConfig::reference();
    {
        auto d = reference_driving(n);
        d.g2 = DrivingField::none(n);
        const ModelParams p{1.0, 2.0, NonlinearitySpec::none()};
        const auto r = contraction_rate(p, d, {random_state(n, 1.0, 9, 1), random_state(n, 1.0, 9, 2)}, 10.0, cfg);
        o.require(std::abs(-r.fitted_rate - 2.0) <= 0.01 * 2.0, "linear rate " + fmt("%.6f", -r.fitted_rate));
    }
    for (double gamma : {2.0, 5.0}) {
        const ModelParams p{1.0, gamma, NonlinearitySpec::cubic()};
        const auto d = reference_driving(n);
        const double k = predict_absorbing(p, d, 0.0).radius;
        const auto r = contraction_rate(p, d, {random_state(n, 0.5 * k, 9, 1), random_state(n, 0.5 * k, 9, 2)}, 20.0, cfg);
        o.require(r.pass, "cubic gamma=" + fmt("%g", gamma) + " rate " + fmt("%.4f", -r.fitted_rate) +
                              " vs predicted " + fmt("%.4f", r.predicted_rate));
    }
    return o;
}

// ---------------------------------------------------------------- 7

Outcome breather() {
    Outcome o;
    const std::size_t n = 128;
    const auto p = breather_model();
    const auto d = breather_driving(n);
    const auto check = check_strong_damping(p, d);
    o.require(check.satisfied, "strong damping " + fmt("%.4f", check.lhs) + " > " + fmt("%.4f", check.rhs));
    const auto a = find_breather(p, d, LatticeState(n));
    const double theory = check.theoretical_ratio();
    o.require(!a.ratio_measured || a.contraction_ratio <= 1.05 * theory,
              "ratio " + (a.ratio_measured ? fmt("%.3e", a.contraction_ratio) : std::string("below noise")) +
                  " vs " + fmt("%.3e", theory) + " in " + std::to_string(a.iterations) + " iterations");
    o.require(a.periodicity_residual <= 1e-9, "periodicity residual " + fmt("%.2e", a.periodicity_residual));
    const auto b = find_breather(p, d, random_state(n, 0.9 * check.radius, 9, 4));
    const auto c = find_breather(p, d, gaussian_state(n, 0.5 * check.radius, 3.0));
    const double spread = std::max({distance(a.state0, b.state0), distance(a.state0, c.state0), distance(b.state0, c.state0)});
    o.require(spread <= 1e-9, "seed spread " + fmt("%.2e", spread));

    const std::size_t m = 8;
    const double g = 0.3, gamma = 1.0;
    BreatherOptions opts;
    opts.tol = 1e-12;
    const DrivingSpec site{{SpatialProfile::single_site(m, g), TemporalLaw::constant(1.0)}, DrivingField::none(m)};
    const auto fixed = find_breather(ModelParams{0.0, gamma, NonlinearitySpec::none()}, site, LatticeState(m), opts);
    const double err = std::abs(fixed.state0.at_site(0) - Complex(0.0, -g / gamma));
    o.require(err <= 1e-10, "single-site fixed point error " + fmt("%.2e", err));
    return o;
}

// ---------------------------------------------------------------- 8

PointCloud circle(std::size_t n) {
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    PointCloud cloud(2);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * std::numbers::pi * std::fmod(golden * static_cast<double>(i), 1.0);
        const double q[2] = {std::cos(a), std::sin(a)};
        cloud.add(q);
    }
    return cloud;
}

PointCloud disc(std::size_t n) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointCloud cloud(2);
    while (cloud.size() < n) {
        const double q[2] = {u(rng), u(rng)};
        if (q[0] * q[0] + q[1] * q[1] <= 1.0) cloud.add(q);
    }
    return cloud;
}

Outcome dimension() {
    Outcome o;
    const auto c = correlation_dimension(circle(2000));
    o.require(std::abs(c.slope - 1.0) <= 0.1, "circle " + fmt("%.3f", c.slope));
    const auto d = correlation_dimension(disc(2500));
    o.require(std::abs(d.slope - 2.0) <= 0.15, "disc " + fmt("%.3f", d.slope));

    std::ostringstream out, err;
    const std::string config = std::string(DNLS_SOURCE_DIR) + "/configs/dimension.json";
    const int code = run_command({"dimension", "--config", config}, out, err);
    if (code != exit_pass && code != exit_check_failed) {
        o.require(false, "attractor run: " + err.str());
        return o;
    }
    const auto j = Json::parse(out.str()).at("measured");
    const double est = j.at("dimension").get<double>();
    const double width = j.at("ci_high").get<double>() - j.at("ci_low").get<double>();
    o.require(std::isfinite(est) && width < 0.5,
              "attractor " + fmt("%.3f", est) + " with CI width " + fmt("%.3f", width));
    return o;
}

// ---------------------------------------------------------------- 9

Outcome mutations() {
    Outcome o;
    const std::size_t n = 128;
    const auto p = reference_model();
    const auto d = reference_driving(n);
    const double k = predict_absorbing(p, d, 0.0).radius;

    {
        auto strong = d;
        strong.g1.profile = SpatialProfile::exponential(n, 4.0 * unit_exp_amplitude, 1.0);
        const auto pred = predict_absorbing(p, d, 10.0 * k);
        const auto traj = integrate(random_state(n, 10.0 * k, 9, 7), 0.0, 5.0 * pred.entry_time, p, strong,
                                    IntegratorConfig{});
        o.require(!verify_absorbing(traj, pred).pass(), "absorbing rejects 4x driving");
    }
    {
        const auto pred = predict_tail(1e-4, 10.0 * k, p, d);
        auto traj = integrate(random_state(n, 10.0 * k, 9, 7), 0.0, pred.time + 5.0, p, d, IntegratorConfig{});
        const std::size_t last = traj.size() - 1;
        std::vector<Complex> v(traj.states[last].values().begin(), traj.states[last].values().end());
        v[n / 2 + 20] += std::sqrt(2.0e-4);
        traj.states[last] = LatticeState(std::move(v));
        o.require(!verify_tail(traj, pred).pass(), "tail rejects an inflated far site");
    }
    {
        auto traj = integrate(random_state(n, 3.0, 9, 7), 0.0, 2.0, p, d, IntegratorConfig::reference().with_stride(0.01));
        traj.states[1] = scaled(traj.states[1], 1.1);
        traj.recompute();
        o.require(!monitor_dissipation(traj, p, d, 1e-11).pass(), "dissipation rejects a 10% norm jump");
    }
    {
        const auto bp = breather_model();
        const auto bd = breather_driving(64);
        auto sol = find_breather(bp, bd, LatticeState(64));
        std::vector<Complex> v(sol.state0.values().begin(), sol.state0.values().end());
        v[32] *= 1.1;
        sol.state0 = LatticeState(std::move(v));
        o.require(!verify_breather(sol, bp, bd, 8).periodic, "breather periodicity rejects a perturbed site");
    }
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "operator suite", 1.0, operators},
        {2, "oracle integration", 5.0, oracles},
        {3, "dissipation and a-priori bound", 30.0, bounds},
        {4, "absorbing ball", 60.0, absorbing},
        {5, "tail estimate", 60.0, tail},
        {6, "contraction", 60.0, contraction},
        {7, "breather", 120.0, breather},
        {8, "dimension estimator", 300.0, dimension},
        {9, "mutation tests", 300.0, mutations},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome.require(false, std::string("exception: ") + e.what());
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        outcome.require(seconds < c.limit_seconds, "runtime " + fmt("%.2f", seconds) + " s < " + fmt("%g", c.limit_seconds) + " s");
        if (!outcome.pass) ++failures;
        std::printf("%s criterion %d (%s): %s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}

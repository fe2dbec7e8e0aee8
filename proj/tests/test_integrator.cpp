#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace dnls;
using Catch::Approx;
using testing_support::affine_solution;
using testing_support::dft_linear_flow;
using testing_support::naive_distance;
using testing_support::random_vector;
using testing_support::to_vector;

namespace {

// Single-site affine problem psi' = -gamma psi - i g on a lattice without coupling.
struct AffineCase {
    std::size_t sites = 5;
    double gamma = 1.3;
    double g = 0.8;
    Complex psi0{0.4, -0.9};

    ModelParams params() const { return {0.0, gamma, NonlinearitySpec::none()}; }
    DrivingSpec driving() const {
        return {{SpatialProfile::single_site(sites, g), TemporalLaw::constant(1.0)}, DrivingField::none(sites)};
    }
    LatticeState initial() const {
        std::vector<Complex> v(sites);
        v[sites / 2] = psi0;
        return LatticeState(v);
    }
    double max_error(const Trajectory& traj) const {
        double worst = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            auto expected = std::vector<Complex>(sites);
            expected[sites / 2] = affine_solution(psi0, g, gamma, traj.times[k]);
            worst = std::max(worst, naive_distance(to_vector(traj.states[k]), expected));
        }
        return worst;
    }
};

double dft_error(const IntegratorConfig& config, double kappa = 1.0, double gamma = 0.0, double t = 1.0) {
    std::mt19937_64 rng(31);
    const auto v = random_vector(64, rng);
    const LatticeState psi0(v, BoundaryCondition::periodic);
    const auto out = evolve(psi0, 0.0, t, ModelParams{kappa, gamma, NonlinearitySpec::none()}, DrivingSpec::none(64), config);
    return naive_distance(to_vector(out), dft_linear_flow(v, kappa, gamma, t)) / l2_norm(psi0);
}

} // namespace

TEST_CASE("integrator configuration validation") {
    IntegratorConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK_NOTHROW(IntegratorConfig::reference().validate());
    auto bad = c;
    bad.atol = 1e-6;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = c;
    bad.dt_init = 1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = c;
    bad.dt_min = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = c;
    bad.sample_stride = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = c;
    bad.rtol = -1.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    CHECK(to_string(DenseOutput::step_endpoint) == "step_endpoint");
    CHECK(parse_dense_output("hermite") == DenseOutput::hermite);
    CHECK_THROWS_AS(parse_dense_output("linear"), DomainError);
}

TEST_CASE("single step examples") {
    const auto cfg = IntegratorConfig::reference();
    SECTION("zero state without driving stays zero with zero error") {
        const auto r = step(LatticeState(16), 0.0, 0.1, testing_support::reference_model(), DrivingSpec::none(16), cfg);
        CHECK(r.accepted);
        CHECK(r.error == 0.0);
        CHECK(l2_norm(r.state) == 0.0);
        CHECK(r.dt_next == Approx(std::min(0.5, cfg.dt_max)));
    }
    SECTION("pure decay matches the exponential") {
        IntegratorConfig c;
        c.rtol = 1e-8;
        c.atol = 1e-12;
        const auto r = step(LatticeState::unit(5, 0), 0.0, 0.1, ModelParams{0.0, 1.0, NonlinearitySpec::none()},
                            DrivingSpec::none(5), c);
        REQUIRE(r.accepted);
        CHECK(std::abs(r.state.at_site(0) - std::exp(-0.1)) <= 10.0 * c.rtol);
        CHECK(r.dt_next > 0.1);
        CHECK(r.dt_next <= 0.5);
    }
    SECTION("large error rejects and shrinks the step") {
        const ModelParams p{50.0, 0.0, NonlinearitySpec::none()};
        std::mt19937_64 rng(32);
        const LatticeState psi(random_vector(32, rng));
        IntegratorConfig c;
        const auto r = step(psi, 0.0, 0.25, p, DrivingSpec::none(32), c);
        CHECK_FALSE(r.accepted);
        CHECK(r.state == psi);
        CHECK(r.dt_next == Approx(0.2 * 0.25));
    }
    SECTION("rejection below dt_min raises a stiffness error carrying time and norm") {
        const ModelParams p{50.0, 0.0, NonlinearitySpec::none()};
        const auto psi = LatticeState::unit(32, 0);
        IntegratorConfig c;
        c.dt_min = 0.2;
        c.dt_init = 0.25;
        try {
            (void)step(psi, 1.5, 0.25, p, DrivingSpec::none(32), c);
            FAIL("expected a stiffness error");
        } catch (const StiffnessError& e) {
            CHECK(e.time() == 1.5);
            CHECK(e.norm() == 1.0);
        }
    }
    CHECK_THROWS_AS(step(LatticeState(5), 0.0, 1.0, ModelParams{}, DrivingSpec::none(5), IntegratorConfig{}), DomainError);
}

TEST_CASE("integrate against the affine single-site oracle") {
    const AffineCase ac;
    for (auto mode : {DenseOutput::hermite, DenseOutput::step_endpoint}) {
        auto c = IntegratorConfig::reference();
        c.dense_output = mode;
        const auto traj = integrate(ac.initial(), 0.0, 10.0, ac.params(), ac.driving(), c);
        CHECK(traj.size() == 101);
        CHECK(ac.max_error(traj) <= 1e-8);
    }
}

TEST_CASE("integrate against the DFT oracle") {
    const auto c = IntegratorConfig::reference();
    CHECK(dft_error(c) <= 1e-8);
    CHECK(dft_error(c, -2.5, 0.3, 2.0) <= 1e-8);
}

TEST_CASE("halving the tolerances halves the error") {
    for (double rtol : {1e-6, 1e-7}) {
        IntegratorConfig c;
        c.rtol = rtol;
        c.atol = rtol * 1e-2;
        auto h = c;
        h.rtol /= 2.0;
        h.atol /= 2.0;
        const double e1 = dft_error(c, 1.0, 0.0, 5.0);
        const double e2 = dft_error(h, 1.0, 0.0, 5.0);
        INFO("rtol " << rtol << ": " << e1 << " -> " << e2);
        CHECK(e2 * 2.0 <= e1);
    }
}

TEST_CASE("undriven evolution decays at the damping rate") {
    std::mt19937_64 rng(33);
    const LatticeState psi0(random_vector(64, rng, 0.3));
    const double r0 = l2_norm(psi0);
    for (int sign : {1, -1}) {
        const ModelParams p{1.0, 0.5, NonlinearitySpec::cubic(sign)};
        const auto traj = integrate(psi0, 0.0, 10.0, p, DrivingSpec::none(64), IntegratorConfig::reference());
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double t = traj.times[k];
            CHECK(traj.norms[k] <= r0 * std::exp(-0.5 * t / 2.0) * (1.0 + 1e-6));
            // The conservative terms preserve the norm, so the decay is exactly e^{-gamma t}.
            CHECK(traj.norms[k] == Approx(r0 * std::exp(-0.5 * t)).epsilon(1e-8));
        }
    }
}

TEST_CASE("trajectory sampling contract") {
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(32);
    std::mt19937_64 rng(34);
    const LatticeState psi0(random_vector(32, rng));
    SECTION("t1 == t0 yields the input as the only sample") {
        const auto traj = integrate(psi0, 2.0, 2.0, p, d, IntegratorConfig{});
        REQUIRE(traj.size() == 1);
        CHECK(traj.times[0] == 2.0);
        CHECK(traj.states[0] == psi0);
    }
    SECTION("samples fall on the stride and end exactly at t1") {
        const auto traj = integrate(psi0, 0.5, 3.27, p, d, IntegratorConfig{}.with_stride(0.25));
        REQUIRE(traj.size() == 13);
        for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
            CHECK(traj.times[k] == Approx(0.5 + 0.25 * static_cast<double>(k)));
            CHECK(traj.times[k + 1] > traj.times[k]);
        }
        CHECK(traj.times.back() == 3.27);
        CHECK(traj.states.front() == psi0);
        for (std::size_t k = 0; k < traj.size(); ++k)
            CHECK(traj.norms[k] == Approx(l2_norm(traj.states[k])).epsilon(1e-12));
        CHECK(traj.stats.accepted > 0);
        CHECK(traj.stats.rhs_evaluations == 1 + 6 * (traj.stats.accepted + traj.stats.rejected));
    }
    SECTION("append enforces strictly increasing times") {
        Trajectory traj;
        traj.append(0.0, psi0);
        CHECK_THROWS_AS(traj.append(0.0, psi0), DomainError);
        traj.recompute(3);
        REQUIRE(traj.tail.size() == 1);
        CHECK(traj.tail[0] == Approx(tail_mass(psi0, 3)));
    }
    CHECK_THROWS_AS(integrate(psi0, 1.0, 0.0, p, d, IntegratorConfig{}), DomainError);
    CHECK_THROWS_AS(integrate(LatticeState(16), 0.0, 1.0, p, d, IntegratorConfig{}), DomainError);
}

TEST_CASE("dense output modes agree") {
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(64);
    std::mt19937_64 rng(35);
    const LatticeState psi0(random_vector(64, rng, 0.3));
    auto a = IntegratorConfig::reference().with_stride(0.1);
    auto b = a;
    b.dense_output = DenseOutput::step_endpoint;
    const auto ta = integrate(psi0, 0.0, 5.0, p, d, a);
    const auto tb = integrate(psi0, 0.0, 5.0, p, d, b);
    REQUIRE(ta.size() == tb.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < ta.size(); ++k) worst = std::max(worst, distance(ta.states[k], tb.states[k]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("integration is bit-for-bit reproducible") {
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(64);
    std::mt19937_64 rng(36);
    const LatticeState psi0(random_vector(64, rng));
    const auto c = IntegratorConfig{};
    const auto a = integrate(psi0, 0.0, 5.0, p, d, c);
    const auto b = integrate(psi0, 0.0, 5.0, p, d, c);
    CHECK(a.times == b.times);
    CHECK(a.states == b.states);
    CHECK(a.stats == b.stats);
}

TEST_CASE("finite differences of the trajectory match the right-hand side") {
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(32);
    std::mt19937_64 rng(37);
    const LatticeState psi0(random_vector(32, rng, 0.5));
    const double h = 1e-3;
    auto c = IntegratorConfig::reference().with_stride(h);
    c.dense_output = DenseOutput::step_endpoint;
    const auto traj = integrate(psi0, 0.0, 1.0 + h, p, d, c);
    const std::size_t mid = 1000;
    REQUIRE(traj.times[mid] == Approx(1.0));
    const auto f = rhs(traj.states[mid], traj.times[mid], p, d);
    std::vector<Complex> fd(32);
    for (std::size_t i = 0; i < fd.size(); ++i) fd[i] = (traj.states[mid + 1][i] - traj.states[mid - 1][i]) / (2.0 * h);
    CHECK(naive_distance(fd, to_vector(f)) <= 1e-5 * (1.0 + l2_norm(f)));
}

TEST_CASE("the flow commutes with hull translation") {
    // U^{T(h) g}(t, t0) = U^g(t + h, t0 + h)
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(32);
    std::mt19937_64 rng(38);
    const LatticeState psi0(random_vector(32, rng, 0.5));
    const auto c = IntegratorConfig::reference();
    const double h = 0.9;
    const auto shifted = evolve(psi0, 0.0, 3.0, p, translate(d, h), c);
    const auto original = evolve(psi0, h, 3.0 + h, p, d, c);
    CHECK(distance(shifted, original) <= 1e-9);
}

TEST_CASE("step ceiling heuristic") {
    const auto p = testing_support::reference_model();
    const auto d = testing_support::reference_driving(16);
    CHECK(suggested_dt_max(p, d, 2.0) == Approx(3.0 / (4.0 + 1.5 * 4.0 + 2.0 + 0.25)));
    CHECK(suggested_dt_max(ModelParams{0.0, 0.0, NonlinearitySpec::none()}, DrivingSpec::none(16), 1.0) == 1.0);
}

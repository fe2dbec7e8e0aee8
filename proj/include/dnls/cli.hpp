#ifndef DNLS_CLI_HPP
#define DNLS_CLI_HPP

// Command-line front end: one scenario per invocation.
//
// Exit codes: 0 pass, 1 bound check failed, 2 usage or configuration
// error, 3 numerical failure.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace dnls {

enum ExitCode : int { exit_pass = 0, exit_check_failed = 1, exit_usage = 2, exit_numerical = 3 };

struct CommandOptions {
    std::string config;
    std::string out;
    std::string json;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool verbose = false;
};

namespace cli {

struct Context {
    ScenarioConfig config;
    CommandOptions options;
    std::ostream& out;
    std::ostream& err;

    unsigned threads() const { return resolve_threads(options.threads); }

    void log(const std::string& message) const {
        if (options.verbose) err << "[dnls] " << message << '\n';
    }

    template <class Writer>
    void write_file(const std::string& path, Writer&& writer) const {
        std::ofstream f(path);
        if (!f) throw ConfigError("cannot open output file '" + path + "'");
        writer(f);
        if (!f) throw ConfigError("failed writing output file '" + path + "'");
        log("wrote " + path);
    }

    // Report JSON goes to --json if given, else to stdout.
    int finish(const Json& report, bool pass) const {
        if (!options.json.empty()) {
            write_file(options.json, [&](std::ostream& f) { f << dump(report); });
            out << (pass ? "PASS" : "FAIL") << '\n';
        } else {
            out << dump(report);
        }
        return pass ? exit_pass : exit_check_failed;
    }
};

// Initial state rescaled to norm r (the zero state is kept as is).
inline LatticeState state_with_radius(const ScenarioConfig& c, double r) {
    LatticeState s = c.initial_state();
    const double norm = l2_norm(s);
    if (norm > 0.0) {
        std::vector<Complex> v(s.values().begin(), s.values().end());
        for (auto& z : v) z *= r / norm;
        s = LatticeState(std::move(v), s.bc());
    }
    return s;
}

inline std::size_t support_width(const ScenarioConfig& c) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(c.initial.width), 1, c.sites);
}

inline int simulate(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    ctx.log("integrating t in [" + std::to_string(s.t0) + ", " + std::to_string(s.t1) + "]");
    const auto traj = integrate(c.initial_state(), s.t0, s.t1, c.model, c.driving, c.integrator);
    if (!ctx.options.out.empty()) ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_trajectory_csv(f, traj); });
    return ctx.finish(trajectory_summary(traj), true);
}

inline int verify_bounds(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    require_effective_damping(effective_damping(c.model, c.driving));
    const auto traj = integrate(c.initial_state(), s.t0, s.t1, c.model, c.driving, c.integrator);
    const auto dissipation = monitor_dissipation(traj, c.model, c.driving, c.integrator.rtol);
    const auto apriori = verify_apriori(traj, c.model, c.driving);
    ctx.log("dissipation violations: " + std::to_string(dissipation.violations.size()) +
            ", a-priori violations: " + std::to_string(apriori.violations.size()));
    if (!ctx.options.out.empty()) ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_norms_csv(f, traj); });
    const bool pass = dissipation.pass() && apriori.pass();
    return ctx.finish({{"dissipation", to_json(dissipation)}, {"apriori", to_json(apriori)}, {"pass", pass}}, pass);
}

inline int absorbing(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    const auto prediction = predict_absorbing(c.model, c.driving, s.r);
    const double span = std::max(s.horizon, 5.0 * prediction.entry_time);
    ctx.log("K = " + std::to_string(prediction.radius) + ", T_entry = " + std::to_string(prediction.entry_time));
    const auto traj = integrate(state_with_radius(c, s.r), s.t0, s.t0 + span, c.model, c.driving, c.integrator);
    const auto report = verify_absorbing(traj, prediction);
    if (!ctx.options.out.empty()) ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_norms_csv(f, traj); });
    return ctx.finish(to_json(report), report.pass());
}

inline int tail(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    const auto prediction = predict_tail(s.xi, s.r, c.model, c.driving);
    ctx.log("M = " + std::to_string(prediction.cutoff) + ", T = " + std::to_string(prediction.time));
    auto traj = integrate(state_with_radius(c, s.r), s.t0, s.t0 + prediction.time + s.horizon, c.model, c.driving,
                          c.integrator);
    traj.recompute(prediction.cutoff);
    const auto report = verify_tail(traj, prediction);
    if (!ctx.options.out.empty()) ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_norms_csv(f, traj); });
    return ctx.finish(to_json(report), report.pass());
}

inline int contraction(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    if (s.seeds.size() != 2) throw ConfigError("contraction needs exactly two seeds");
    const double k = predict_absorbing(c.model, c.driving, 0.0).radius;
    const double radius = s.seed_radius * (k > 0.0 ? k : 1.0);
    const std::array<LatticeState, 2> seeds{random_state(c.sites, radius, support_width(c), s.seeds[0], c.bc),
                                            random_state(c.sites, radius, support_width(c), s.seeds[1], c.bc)};
    ContractionOptions options;
    options.threads = ctx.threads();
    const auto report = contraction_rate(c.model, c.driving, seeds, s.horizon, c.integrator, options);
    ctx.log("fitted slope " + std::to_string(report.fitted_rate) + ", predicted rate " +
            std::to_string(report.predicted_rate));
    return ctx.finish(to_json(report), report.pass);
}

inline int continuity(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    const LatticeState theta = c.initial_state();
    const auto direction = random_state(c.sites, s.theta_offset, support_width(c), s.seeds.empty() ? 1 : s.seeds[0], c.bc);
    std::vector<Complex> v(theta.values().begin(), theta.values().end());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += direction[i];
    const LatticeState theta_n(std::move(v), c.bc);
    const DrivingSpec perturbed = s.perturbed_driving.value_or(c.driving);
    const auto report = continuity_gap(c.model, c.driving, perturbed, theta, theta_n, s.horizon, c.integrator,
                                       ctx.threads());
    if (!ctx.options.out.empty())
        ctx.write_file(ctx.options.out, [&](std::ostream& f) {
            f << "t,measured,bound\n";
            for (std::size_t i = 0; i < report.times.size(); ++i)
                f << format_float(report.times[i]) << ',' << format_float(report.measured[i]) << ','
                  << format_float(report.bound[i]) << '\n';
        });
    return ctx.finish(to_json(report), report.pass);
}

// Period of the Poincare section: the common driving period, else the
// shortest period among the quasiperiodic frequencies of g1.
inline double section_period(const ScenarioConfig& c) {
    if (c.scenario.section_period > 0.0) return c.scenario.section_period;
    if (const auto p = common_period(c.driving)) return *p;
    double omega = 0.0;
    for (const auto& h : c.driving.g1.law.terms()) omega = std::max(omega, std::abs(h.frequency));
    if (omega == 0.0) throw ConfigError("cannot derive a section period; set scenario.section_period");
    return 2.0 * std::numbers::pi / omega;
}

inline int dimension(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    const double period = section_period(c);
    const LatticeState initial = c.initial_state();
    double transient = s.transient;
    if (transient <= 0.0) {
        const auto p = predict_absorbing(c.model, c.driving, l2_norm(initial));
        transient = p.entry_time + 20.0 * period;
    }
    ctx.log("section period " + std::to_string(period) + ", transient " + std::to_string(transient) + ", " +
            std::to_string(s.points) + " points");
    const auto section = sample_section(initial, s.t0, transient, period, s.points, c.model, c.driving, c.integrator);
    DimensionOptions options;
    options.theiler_window = s.theiler;
    options.threads = ctx.threads();
    options.min_points = std::min<std::size_t>(options.min_points, s.points);
    const auto estimate = correlation_dimension(PointCloud::from_states(section), {}, options);
    if (!ctx.options.out.empty())
        ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_correlation_csv(f, estimate); });
    auto report = to_json(estimate, s.max_ci_width);
    const bool pass = report["pass"].get<bool>();
    return ctx.finish(report, pass);
}

inline int breather(const Context& ctx) {
    const auto& c = ctx.config;
    const auto& s = c.scenario;
    const auto check = check_strong_damping(c.model, c.driving);
    ctx.log("R_u = " + std::to_string(check.radius) + ", theoretical ratio " + std::to_string(check.theoretical_ratio()));
    BreatherOptions options;
    options.tol = s.tol;
    options.t0 = s.t0;
    options.integrator = c.integrator;
    const auto solution = find_breather(c.model, c.driving, c.initial_state(), options);
    const auto report = verify_breather(solution, c.model, c.driving, s.phases, s.tol, c.integrator);
    if (!ctx.options.out.empty())
        ctx.write_file(ctx.options.out, [&](std::ostream& f) { write_profile_csv(f, solution.state0); });
    Json j = to_json(solution);
    j["strong_damping"] = to_json(check);
    j["verification"] = to_json(report);
    j["pass"] = report.pass();
    return ctx.finish(j, report.pass());
}

inline int dispatch(const std::string& name, const Context& ctx) {
    static const std::map<std::string, int (*)(const Context&)> table{
        {"simulate", simulate},       {"verify-bounds", verify_bounds}, {"absorbing", absorbing},
        {"tail", tail},               {"contraction", contraction},     {"continuity", continuity},
        {"dimension", dimension},     {"breather", breather}};
    return table.at(name)(ctx);
}

} // namespace cli

inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    CLI::App app{"Damped driven DNLS lattice: simulation and attractor diagnostics", "dnls"};
    app.require_subcommand(1, 1);
    CommandOptions options;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"simulate", "integrate a trajectory and write it as CSV"},
        {"verify-bounds", "check the energy dissipation inequality and the a-priori bound"},
        {"absorbing", "check entry into and confinement to the absorbing ball"},
        {"tail", "check the uniform tail estimate"},
        {"contraction", "fit the decay rate of the distance between two trajectories"},
        {"continuity", "compare trajectory gaps with the continuity bound"},
        {"dimension", "estimate the correlation dimension of the attractor"},
        {"breather", "compute and verify the periodic breather"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config, "scenario JSON file")->required();
        sub->add_option("--out", options.out, "CSV output path");
        sub->add_option("--json", options.json, "JSON report path (default: stdout)");
        sub->add_option("--threads", options.threads, "worker threads (default: DNLS_THREADS or all cores)");
        sub->add_option("--seed", options.seed, "override the random seeds of the scenario");
        sub->add_flag("--verbose", options.verbose, "progress messages on stderr");
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_pass;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_pass;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    const auto subs = app.get_subcommands();
    const std::string name = subs.front()->get_name();
    options.seed_given = subs.front()->count("--seed") > 0;

    try {
        ScenarioConfig config = load_scenario(options.config);
        if (options.seed_given) {
            config.initial.seed = options.seed;
            for (std::size_t k = 0; k < config.scenario.seeds.size(); ++k) config.scenario.seeds[k] = options.seed + k;
        }
        cli::Context ctx{std::move(config), options, out, err};
        ctx.log("running " + name + " with " + std::to_string(ctx.threads()) + " thread(s)");
        return cli::dispatch(name, ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const PreconditionError& e) {
        err << "precondition failed: " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return exit_usage;
    } catch (const StiffnessError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const ConvergenceError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_numerical;
    }
}

inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
    return run_command(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace dnls

#endif

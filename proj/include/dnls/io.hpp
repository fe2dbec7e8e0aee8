#ifndef DNLS_IO_HPP
#define DNLS_IO_HPP

// Scenario configuration (versioned JSON schema), report serialization and
// CSV output. Complex numbers are two-element [re, im] arrays; CSV floats
// carry 17 significant digits.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "breather.hpp"
#include "diagnostics.hpp"
#include "dimension.hpp"
#include "driving.hpp"
#include "errors.hpp"
#include "integrator.hpp"
#include "lattice.hpp"
#include "monitor.hpp"
#include "states.hpp"

namespace dnls {

using Json = nlohmann::json;

inline constexpr const char* scenario_schema = "dnls-scenario";
inline constexpr int scenario_version = 1;

enum class InitialKind { zero, random, gaussian, values };

struct InitialCondition {
    InitialKind kind = InitialKind::zero;
    double radius = 0.0;
    double width = 5.0;        // support sites (random) or gaussian width
    std::uint64_t seed = 1;
    std::vector<Complex> values;

    friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

// Parameters of the individual diagnostics; unused ones keep their defaults.
struct ScenarioParams {
    double t0 = 0.0;
    double t1 = 50.0;
    double r = 1.0;                 // initial radius for absorbing/tail predictions
    double xi = 1e-4;
    double horizon = 10.0;
    double tol = 1e-10;
    std::vector<std::uint64_t> seeds{1, 2};
    double seed_radius = 0.5;       // contraction/breather seeds, fraction of the ball radius
    double theta_offset = 1e-3;     // continuity: |theta_n - theta|
    std::optional<DrivingSpec> perturbed_driving;
    std::size_t points = 2000;
    std::size_t theiler = 10;
    double transient = 0.0;         // 0 => automatic
    double section_period = 0.0;    // 0 => derived from the driving
    double max_ci_width = 0.5;
    std::size_t phases = 8;

    friend bool operator==(const ScenarioParams&, const ScenarioParams&) = default;
};

struct ScenarioConfig {
    ModelParams model;
    std::size_t sites = 256;
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    DrivingSpec driving = DrivingSpec::none(256);
    IntegratorConfig integrator;
    InitialCondition initial;
    ScenarioParams scenario;

    LatticeState initial_state() const {
        switch (initial.kind) {
        case InitialKind::zero:
            return LatticeState(sites, bc);
        case InitialKind::random:
            return random_state(sites, initial.radius, static_cast<std::size_t>(initial.width), initial.seed, bc);
        case InitialKind::gaussian:
            return gaussian_state(sites, initial.radius, initial.width, bc);
        case InitialKind::values:
            return LatticeState(initial.values, bc);
        }
        return LatticeState(sites, bc);
    }

    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

namespace detail {

inline Json complex_array(std::span<const Complex> v) {
    Json a = Json::array();
    for (const auto& z : v) a.push_back(Json::array({z.real(), z.imag()}));
    return a;
}

inline std::vector<Complex> parse_complex_array(const Json& j) {
    if (!j.is_array()) throw ConfigError("expected an array of [re, im] pairs");
    std::vector<Complex> v;
    for (const auto& e : j) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw ConfigError("complex numbers must be [re, im] arrays");
        v.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return v;
}

inline void allow_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

} // namespace detail

// ---------------------------------------------------------------- driving

inline Json to_json(const SpatialProfile& p) {
    switch (p.kind()) {
    case ProfileKind::exponential:
        return {{"kind", "exponential"}, {"amplitude", p.amplitude()}, {"rate", p.rate()}};
    case ProfileKind::gaussian:
        return {{"kind", "gaussian"}, {"amplitude", p.amplitude()}, {"width", p.width()}};
    case ProfileKind::single_site:
        return {{"kind", "single_site"}, {"amplitude", p.amplitude()}, {"site", p.site()}};
    case ProfileKind::table:
        return {{"kind", "table"}, {"values", detail::complex_array(p.values())}};
    }
    return {};
}

inline SpatialProfile profile_from_json(const Json& j, std::size_t sites) {
    const std::string where = "profile";
    const auto kind = detail::get<std::string>(j, "kind", where);
    try {
        if (kind == "exponential") {
            detail::allow_keys(j, {"kind", "amplitude", "rate"}, where);
            return SpatialProfile::exponential(sites, detail::get<double>(j, "amplitude", where),
                                               detail::get<double>(j, "rate", where));
        }
        if (kind == "gaussian") {
            detail::allow_keys(j, {"kind", "amplitude", "width"}, where);
            return SpatialProfile::gaussian(sites, detail::get<double>(j, "amplitude", where),
                                            detail::get<double>(j, "width", where));
        }
        if (kind == "single_site") {
            detail::allow_keys(j, {"kind", "amplitude", "site"}, where);
            return SpatialProfile::single_site(sites, detail::get<double>(j, "amplitude", where),
                                               detail::get<long>(j, "site", where));
        }
        if (kind == "table") {
            detail::allow_keys(j, {"kind", "values"}, where);
            auto values = detail::parse_complex_array(j.at("values"));
            if (values.size() != sites) throw ConfigError("profile table length differs from lattice size");
            return SpatialProfile::table(std::move(values));
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid profile: ") + e.what());
    }
    throw ConfigError("unknown profile kind '" + kind + "'");
}

inline Json to_json(const TemporalLaw& law) {
    Json j;
    if (law.kind() == TemporalKind::periodic) {
        Json harmonics = Json::array();
        for (const auto& h : law.terms()) harmonics.push_back(Json::array({h.amplitude, h.phase}));
        j = {{"kind", "periodic"}, {"period", *law.period()}, {"mean", law.mean()}, {"harmonics", harmonics}};
    } else {
        Json terms = Json::array();
        for (const auto& h : law.terms())
            terms.push_back({{"frequency", h.frequency}, {"amplitude", h.amplitude}, {"phase", h.phase}});
        j = {{"kind", law.kind() == TemporalKind::quasiperiodic ? "quasiperiodic" : "almost_periodic"},
             {"mean", law.mean()},
             {"terms", terms}};
    }
    j["shift"] = law.shift();
    return j;
}

inline TemporalLaw law_from_json(const Json& j) {
    const std::string where = "law";
    const auto kind = detail::get<std::string>(j, "kind", where);
    const double shift = detail::get_or<double>(j, "shift", 0.0, where);
    const double mean = detail::get_or<double>(j, "mean", 0.0, where);
    try {
        if (kind == "periodic") {
            detail::allow_keys(j, {"kind", "period", "mean", "harmonics", "shift"}, where);
            std::vector<std::pair<double, double>> harmonics;
            if (j.contains("harmonics")) {
                for (const auto& h : j.at("harmonics")) {
                    if (!h.is_array() || h.size() != 2) throw ConfigError("harmonics are [amplitude, phase] pairs");
                    harmonics.emplace_back(h[0].get<double>(), h[1].get<double>());
                }
            }
            return TemporalLaw::periodic(detail::get<double>(j, "period", where), mean, harmonics).shifted(shift);
        }
        if (kind == "quasiperiodic" || kind == "almost_periodic") {
            detail::allow_keys(j, {"kind", "mean", "terms", "shift"}, where);
            std::vector<Harmonic> terms;
            for (const auto& t : j.at("terms")) {
                detail::allow_keys(t, {"frequency", "amplitude", "phase"}, "law term");
                terms.push_back({detail::get<double>(t, "frequency", "law term"),
                                 detail::get<double>(t, "amplitude", "law term"),
                                 detail::get_or<double>(t, "phase", 0.0, "law term")});
            }
            auto law = kind == "quasiperiodic" ? TemporalLaw::quasiperiodic(mean, std::move(terms))
                                               : TemporalLaw::almost_periodic(mean, std::move(terms));
            return law.shifted(shift);
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid temporal law: ") + e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid temporal law: ") + e.what());
    }
    throw ConfigError("unknown temporal law kind '" + kind + "'");
}

inline Json to_json(const DrivingField& f) { return {{"profile", to_json(f.profile)}, {"law", to_json(f.law)}}; }

inline DrivingField field_from_json(const Json& j, std::size_t sites) {
    detail::allow_keys(j, {"profile", "law"}, "driving field");
    if (!j.contains("profile") || !j.contains("law")) throw ConfigError("driving field needs profile and law");
    return {profile_from_json(j.at("profile"), sites), law_from_json(j.at("law"))};
}

inline Json to_json(const DrivingSpec& d) { return {{"g1", to_json(d.g1)}, {"g2", to_json(d.g2)}}; }

inline DrivingSpec driving_from_json(const Json& j, std::size_t sites) {
    detail::allow_keys(j, {"g1", "g2"}, "driving");
    DrivingSpec d = DrivingSpec::none(sites);
    if (j.contains("g1")) d.g1 = field_from_json(j.at("g1"), sites);
    if (j.contains("g2")) d.g2 = field_from_json(j.at("g2"), sites);
    return d;
}

// ---------------------------------------------------------------- scenario

inline std::string to_string(InitialKind k) {
    switch (k) {
    case InitialKind::zero: return "zero";
    case InitialKind::random: return "random";
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::values: return "values";
    }
    return "zero";
}

inline Json to_json(const ScenarioConfig& c) {
    const auto& nl = c.model.nonlinearity;
    Json j;
    j["schema"] = scenario_schema;
    j["version"] = scenario_version;
    j["model"] = {{"kappa", c.model.kappa},
                  {"gamma", c.model.gamma},
                  {"nonlinearity", {{"sigma", nl.sigma}, {"sign", nl.sign}, {"a", nl.a}, {"b", nl.b}}}};
    j["lattice"] = {{"sites", c.sites}, {"bc", std::string(to_string(c.bc))}};
    j["driving"] = to_json(c.driving);
    const auto& ic = c.integrator;
    j["integrator"] = {{"rtol", ic.rtol},       {"atol", ic.atol},
                       {"dt_init", ic.dt_init}, {"dt_min", ic.dt_min},
                       {"dt_max", ic.dt_max},   {"sample_stride", ic.sample_stride},
                       {"dense_output", std::string(to_string(ic.dense_output))},
                       {"max_steps", ic.max_steps}};
    Json init = {{"kind", to_string(c.initial.kind)},
                 {"radius", c.initial.radius},
                 {"width", c.initial.width},
                 {"seed", c.initial.seed}};
    if (c.initial.kind == InitialKind::values) init["values"] = detail::complex_array(c.initial.values);
    j["initial"] = init;
    const auto& s = c.scenario;
    j["scenario"] = {{"t0", s.t0},
                     {"t1", s.t1},
                     {"r", s.r},
                     {"xi", s.xi},
                     {"horizon", s.horizon},
                     {"tol", s.tol},
                     {"seeds", s.seeds},
                     {"seed_radius", s.seed_radius},
                     {"theta_offset", s.theta_offset},
                     {"points", s.points},
                     {"theiler", s.theiler},
                     {"transient", s.transient},
                     {"section_period", s.section_period},
                     {"max_ci_width", s.max_ci_width},
                     {"phases", s.phases}};
    if (s.perturbed_driving) j["scenario"]["perturbed_driving"] = to_json(*s.perturbed_driving);
    return j;
}

inline void ScenarioConfig::validate() const {
    try {
        model.validate();
        integrator.validate();
        driving.validate();
        if (sites < LatticeState::min_sites) throw ConfigError("lattice needs at least 3 sites");
        if (driving.sites() != sites) throw ConfigError("driving realized on a different lattice size");
        if (scenario.t1 < scenario.t0) throw ConfigError("scenario.t1 must not precede t0");
        if (!(scenario.xi > 0.0)) throw ConfigError("scenario.xi must be positive");
        if (!(scenario.r >= 0.0)) throw ConfigError("scenario.r must be nonnegative");
        if (!(scenario.horizon >= 0.0)) throw ConfigError("scenario.horizon must be nonnegative");
        if (!(scenario.tol > 0.0)) throw ConfigError("scenario.tol must be positive");
        if (!(initial.radius >= 0.0)) throw ConfigError("initial.radius must be nonnegative");
        if (initial.kind == InitialKind::values && initial.values.size() != sites)
            throw ConfigError("initial.values length differs from lattice size");
        if (scenario.perturbed_driving && scenario.perturbed_driving->sites() != sites)
            throw ConfigError("perturbed driving realized on a different lattice size");
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

inline ScenarioConfig scenario_from_json(const Json& j) {
    detail::allow_keys(j, {"schema", "version", "model", "lattice", "driving", "integrator", "initial", "scenario"},
                       "config");
    if (detail::get<std::string>(j, "schema", "config") != scenario_schema)
        throw ConfigError("config schema must be '" + std::string(scenario_schema) + "'");
    if (detail::get<int>(j, "version", "config") != scenario_version)
        throw ConfigError("unsupported config version (expected " + std::to_string(scenario_version) + ")");
    ScenarioConfig c;
    try {
        const Json& lat = j.at("lattice");
        detail::allow_keys(lat, {"sites", "bc"}, "lattice");
        c.sites = detail::get<std::size_t>(lat, "sites", "lattice");
        c.bc = parse_boundary(detail::get_or<std::string>(lat, "bc", "dirichlet", "lattice"));
        if (c.sites < LatticeState::min_sites) throw ConfigError("lattice needs at least 3 sites");

        const Json& m = j.at("model");
        detail::allow_keys(m, {"kappa", "gamma", "nonlinearity"}, "model");
        c.model.kappa = detail::get<double>(m, "kappa", "model");
        c.model.gamma = detail::get<double>(m, "gamma", "model");
        const Json& nl = m.at("nonlinearity");
        detail::allow_keys(nl, {"sigma", "sign", "a", "b"}, "nonlinearity");
        const double sigma = detail::get<double>(nl, "sigma", "nonlinearity");
        const int sign = detail::get<int>(nl, "sign", "nonlinearity");
        c.model.nonlinearity = sign == 0 ? NonlinearitySpec::none() : NonlinearitySpec::power(sigma, sign);
        c.model.nonlinearity.sigma = sigma;
        c.model.nonlinearity.a = detail::get_or<double>(nl, "a", c.model.nonlinearity.a, "nonlinearity");
        c.model.nonlinearity.b = detail::get_or<double>(nl, "b", c.model.nonlinearity.b, "nonlinearity");

        c.driving = j.contains("driving") ? driving_from_json(j.at("driving"), c.sites) : DrivingSpec::none(c.sites);

        if (j.contains("integrator")) {
            const Json& ic = j.at("integrator");
            const std::string w = "integrator";
            detail::allow_keys(ic, {"rtol", "atol", "dt_init", "dt_min", "dt_max", "sample_stride", "dense_output",
                                    "max_steps"},
                               w);
            auto& cfg = c.integrator;
            cfg.rtol = detail::get_or<double>(ic, "rtol", cfg.rtol, w);
            cfg.atol = detail::get_or<double>(ic, "atol", cfg.atol, w);
            cfg.dt_init = detail::get_or<double>(ic, "dt_init", cfg.dt_init, w);
            cfg.dt_min = detail::get_or<double>(ic, "dt_min", cfg.dt_min, w);
            cfg.dt_max = detail::get_or<double>(ic, "dt_max", cfg.dt_max, w);
            cfg.sample_stride = detail::get_or<double>(ic, "sample_stride", cfg.sample_stride, w);
            cfg.dense_output = parse_dense_output(detail::get_or<std::string>(ic, "dense_output", "hermite", w));
            cfg.max_steps = detail::get_or<long>(ic, "max_steps", cfg.max_steps, w);
        }

        if (j.contains("initial")) {
            const Json& in = j.at("initial");
            const std::string w = "initial";
            detail::allow_keys(in, {"kind", "radius", "width", "seed", "values"}, w);
            const auto kind = detail::get_or<std::string>(in, "kind", "zero", w);
            if (kind == "zero") c.initial.kind = InitialKind::zero;
            else if (kind == "random") c.initial.kind = InitialKind::random;
            else if (kind == "gaussian") c.initial.kind = InitialKind::gaussian;
            else if (kind == "values") c.initial.kind = InitialKind::values;
            else throw ConfigError("unknown initial kind '" + kind + "'");
            c.initial.radius = detail::get_or<double>(in, "radius", 0.0, w);
            c.initial.width = detail::get_or<double>(in, "width", 5.0, w);
            c.initial.seed = detail::get_or<std::uint64_t>(in, "seed", 1, w);
            if (in.contains("values")) c.initial.values = detail::parse_complex_array(in.at("values"));
        }

        if (j.contains("scenario")) {
            const Json& s = j.at("scenario");
            const std::string w = "scenario";
            detail::allow_keys(s, {"t0", "t1", "r", "xi", "horizon", "tol", "seeds", "seed_radius", "theta_offset",
                                   "perturbed_driving", "points", "theiler", "transient", "section_period",
                                   "max_ci_width", "phases"},
                               w);
            auto& p = c.scenario;
            p.t0 = detail::get_or<double>(s, "t0", p.t0, w);
            p.t1 = detail::get_or<double>(s, "t1", p.t1, w);
            p.r = detail::get_or<double>(s, "r", p.r, w);
            p.xi = detail::get_or<double>(s, "xi", p.xi, w);
            p.horizon = detail::get_or<double>(s, "horizon", p.horizon, w);
            p.tol = detail::get_or<double>(s, "tol", p.tol, w);
            p.seeds = detail::get_or<std::vector<std::uint64_t>>(s, "seeds", p.seeds, w);
            p.seed_radius = detail::get_or<double>(s, "seed_radius", p.seed_radius, w);
            p.theta_offset = detail::get_or<double>(s, "theta_offset", p.theta_offset, w);
            if (s.contains("perturbed_driving"))
                p.perturbed_driving = driving_from_json(s.at("perturbed_driving"), c.sites);
            p.points = detail::get_or<std::size_t>(s, "points", p.points, w);
            p.theiler = detail::get_or<std::size_t>(s, "theiler", p.theiler, w);
            p.transient = detail::get_or<double>(s, "transient", p.transient, w);
            p.section_period = detail::get_or<double>(s, "section_period", p.section_period, w);
            p.max_ci_width = detail::get_or<double>(s, "max_ci_width", p.max_ci_width, w);
            p.phases = detail::get_or<std::size_t>(s, "phases", p.phases, w);
        }
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return scenario_from_json(j);
}

inline ScenarioConfig parse_scenario(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return scenario_from_json(j);
}

// ---------------------------------------------------------------- reports

inline Json to_json(const StepStats& s) {
    return {{"accepted", s.accepted},
            {"rejected", s.rejected},
            {"rhs_evaluations", s.rhs_evaluations},
            {"smallest_dt", s.accepted ? s.smallest_dt : 0.0},
            {"largest_dt", s.largest_dt}};
}

inline Json trajectory_summary(const Trajectory& traj) {
    Json j = {{"samples", traj.size()}, {"times", traj.times}, {"norms", traj.norms}, {"steps", to_json(traj.stats)}};
    if (traj.tail_cutoff) {
        j["tail_cutoff"] = *traj.tail_cutoff;
        j["tail"] = traj.tail;
    }
    return j;
}

inline Json to_json(const DissipationReport& r) {
    Json worst = Json::array();
    for (std::size_t k = 0; k < r.violations.size() && k < 20; ++k) {
        const auto& v = r.violations[k];
        worst.push_back({{"t", v.time}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"slack", v.slack}, {"margin", v.margin()}});
    }
    return {{"prediction", {{"effective_damping", r.effective_damping}}},
            {"measured", {{"intervals", r.intervals_checked}, {"worst_margin", r.worst_margin},
                          {"violations", r.violations.size()}, {"first_violations", worst}}},
            {"slack", "10 rtol (1 + |psi|^2)"},
            {"pass", r.pass()}};
}

inline Json to_json(const AprioriReport& r) {
    return {{"prediction", {{"effective_damping", r.effective_damping}, {"asymptotic_radius", r.asymptotic_radius}}},
            {"measured", {{"samples", r.samples_checked}, {"worst_margin", r.worst_margin},
                          {"violations", r.violations.size()}}},
            {"slack", "1e-6 (1 + |psi(t0)|^2)"},
            {"pass", r.pass()}};
}

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json to_json(const AbsorbingReport& r) {
    const auto& p = r.prediction;
    return {{"prediction", {{"effective_damping", p.gamma_eff}, {"g1_sup", p.g1_sup}, {"radius", p.radius},
                            {"initial_radius", p.initial_radius}, {"entry_time", p.entry_time}}},
            {"measured", {{"first_entry", optional_number(r.first_entry)},
                          {"first_exit", optional_number(r.first_exit)},
                          {"violations_after_deadline", r.violations_after_deadline},
                          {"max_norm_after_deadline", r.max_norm_after_deadline}}},
            {"slack", r.tolerance},
            {"pass", r.pass()}};
}

inline Json to_json(const TailReport& r) {
    const auto& p = r.prediction;
    return {{"prediction", {{"xi", p.xi}, {"initial_radius", p.initial_radius}, {"effective_damping", p.gamma_eff},
                            {"time", p.time}, {"cutoff", p.cutoff}, {"driving_tail", p.driving_tail}}},
            {"measured", {{"samples", r.samples_checked}, {"violations", r.violations},
                          {"max_tail_after_deadline", r.max_tail_after_deadline},
                          {"first_violation", optional_number(r.first_violation)}}},
            {"slack", 0.0},
            {"pass", r.pass()}};
}

inline Json to_json(const ContractionReport& r) {
    return {{"prediction", {{"rate", r.predicted_rate}, {"radius", r.radius}}},
            {"measured", {{"rate", -r.fitted_rate}, {"slope", r.fitted_rate}, {"r_squared", r.fit.r_squared},
                          {"fit_start", r.fit_start}, {"fit_end", r.fit_end}, {"points", r.fit.points},
                          {"initial_distance", r.initial_distance}}},
            {"slack", r.slack},
            {"pass", r.pass}};
}

inline Json to_json(const ContinuityReport& r) {
    return {{"prediction", {{"growth_rate", r.growth_rate}, {"lipschitz", r.lipschitz}, {"radius", r.radius},
                            {"radius_certified", r.radius_certified}, {"initial_gap", r.initial_gap},
                            {"g1_gap", r.g1_gap}, {"g2_gap", r.g2_gap}, {"bound", r.bound}}},
            {"measured", {{"times", r.times}, {"gap", r.measured}, {"max_ratio", r.max_ratio}}},
            {"slack", "10 rtol (1 + R)"},
            {"pass", r.pass}};
}

inline Json to_json(const DimensionEstimate& e, double max_ci_width) {
    const bool finite = std::isfinite(e.slope) && std::isfinite(e.ci_low) && std::isfinite(e.ci_high);
    return {{"prediction", {{"finite_dimension", true}, {"max_ci_width", max_ci_width}}},
            {"measured", {{"dimension", e.slope}, {"ci_low", e.ci_low}, {"ci_high", e.ci_high},
                          {"fit_lower", e.fit_lower}, {"fit_upper", e.fit_upper}, {"fit_points", e.fit_points},
                          {"pairs", e.pairs}, {"degenerate", e.degenerate}}},
            {"slack", 0.0},
            {"pass", finite && e.ci_width() < max_ci_width}};
}

inline Json to_json(const std::optional<LocalizationFit>& f) {
    if (!f) return nullptr;
    return {{"rate", f->rate}, {"r_squared", f->r_squared}, {"points", f->points},
            {"first_site", f->first_site}, {"last_site", f->last_site}};
}

inline Json to_json(const BreatherSolution& s) {
    return {{"state0", detail::complex_array(s.state0.values())},
            {"sites", s.state0.size()},
            {"t0", s.t0},
            {"period", s.period},
            {"periodicity_residual", s.periodicity_residual},
            {"localization", to_json(s.localization)},
            {"iterations", s.iterations},
            {"contraction_ratio", s.contraction_ratio},
            {"ratio_measured", s.ratio_measured},
            {"theoretical_ratio", s.theoretical_ratio},
            {"residuals", s.residuals}};
}

inline Json to_json(const BreatherReport& r) {
    return {{"phase_times", r.phase_times},
            {"phase_residuals", r.phase_residuals},
            {"max_residual", r.max_residual},
            {"residual_limit", r.residual_limit},
            {"periodic", r.periodic},
            {"envelope_monotone", r.envelope_monotone},
            {"localization", to_json(r.localization)},
            {"localization_required", r.localization_required},
            {"localized", r.localized},
            {"pass", r.pass()}};
}

inline Json to_json(const StrongDampingCheck& c) {
    return {{"lhs", c.lhs}, {"rhs", c.rhs}, {"radius", c.radius}, {"period", c.period},
            {"satisfied", c.satisfied}, {"theoretical_ratio", c.theoretical_ratio()}};
}

// ---------------------------------------------------------------- CSV

inline std::string format_float(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Header t,re_0,im_0,...; one row per sample, columns by array index.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    os << 't';
    for (std::size_t i = 0; i < n; ++i) os << ",re_" << i << ",im_" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_float(traj.times[k]);
        for (const auto& z : traj.states[k].values()) os << ',' << format_float(z.real()) << ',' << format_float(z.imag());
        os << '\n';
    }
}

inline void write_norms_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,norm" << (traj.tail_cutoff ? ",tail" : "") << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << format_float(traj.times[k]) << ',' << format_float(traj.norms[k]);
        if (traj.tail_cutoff) os << ',' << format_float(traj.tail[k]);
        os << '\n';
    }
}

inline void write_correlation_csv(std::ostream& os, const DimensionEstimate& e) {
    os << "eps,C\n";
    for (std::size_t k = 0; k < e.radii.size(); ++k)
        os << format_float(e.radii[k]) << ',' << format_float(e.correlation[k]) << '\n';
}

// Amplitude profile: site,re,im,abs.
inline void write_profile_csv(std::ostream& os, const LatticeState& s) {
    os << "site,re,im,abs\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << s.site_of(i) << ',' << format_float(s[i].real()) << ',' << format_float(s[i].imag()) << ','
           << format_float(std::abs(s[i])) << '\n';
}

} // namespace dnls

#endif

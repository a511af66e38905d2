#include "thermofem/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "thermofem/errors.hpp"

namespace thermofem {

namespace {

using nlohmann::json;

std::string join_path(const std::string& base, const std::string& key) {
    return base + "/" + key;
}

/// Checked view of a JSON object: rejects unknown keys up front.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed)
        : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(where() + ": expected an object");
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) throw ConfigError(where() + ": unknown key '" + key + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    const json& raw(const std::string& key) const { return j_.at(key); }
    std::string path(const std::string& key) const { return join_path(path_, key); }

    double number(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
        return v.get<double>();
    }

    double positive(const std::string& key, double fallback) const {
        const double v = number(key, fallback);
        if (!(v > 0.0)) throw ConfigError(path(key) + ": must be positive");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
            throw ConfigError(path(key) + ": expected a non-negative integer");
        return v.get<std::size_t>();
    }

    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(path(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_array()) throw ConfigError(path(key) + ": expected an array");
        std::vector<std::size_t> out;
        for (const auto& e : v) {
            if (!e.is_number_integer() || e.get<long long>() < 0)
                throw ConfigError(path(key) + ": expected non-negative integers");
            out.push_back(e.get<std::size_t>());
        }
        return out;
    }

    std::string where() const { return path_.empty() ? "/" : path_; }

private:
    const json& j_;
    std::string path_;
};

template <typename F>
auto enum_value(const Section& s, const std::string& key, const std::string& fallback, F parse) {
    const std::string v = s.text(key, fallback);
    try {
        return parse(v);
    } catch (const InvalidParameter& e) {
        throw ConfigError(s.path(key) + ": " + e.what());
    }
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

AcousticModel parse_model(const json& j, const std::string& path, AcousticModel m) {
    const Section s(j, path,
                    {"speed_law", "speed_coefficients", "ambient_temperature", "frequency",
                     "attenuation_per_hz", "density", "b_over_2a"});
    if (s.has("speed_law") && s.has("speed_coefficients"))
        throw ConfigError(path + ": give either speed_law or speed_coefficients");
    if (s.has("speed_law")) {
        const std::string law = s.text("speed_law", "");
        if (law == "quadratic")
            m.speed = quadratic_liver_law();
        else if (law == "quintic")
            m.speed = quintic_liver_law();
        else
            throw ConfigError(s.path("speed_law") + ": expected 'quadratic' or 'quintic'");
    }
    if (s.has("speed_coefficients")) {
        const auto& v = s.raw("speed_coefficients");
        if (!v.is_array() || v.empty())
            throw ConfigError(s.path("speed_coefficients") + ": expected a non-empty array");
        m.speed.coefficients.clear();
        for (const auto& c : v) {
            if (!c.is_number()) throw ConfigError(s.path("speed_coefficients") + ": expected numbers");
            m.speed.coefficients.push_back(c.get<double>());
        }
    }
    m.speed.ambient_temperature = s.number("ambient_temperature", m.speed.ambient_temperature);
    m.frequency = s.positive("frequency", m.frequency);
    m.attenuation_per_hz = s.number("attenuation_per_hz", m.attenuation_per_hz);
    if (m.attenuation_per_hz < 0.0) throw ConfigError(s.path("attenuation_per_hz") + ": must be >= 0");
    m.density = s.positive("density", m.density);
    m.b_over_2a = s.number("b_over_2a", m.b_over_2a);
    return m;
}

HeatParams parse_heat(const json& j, const std::string& path, HeatParams h) {
    const Section s(j, path, {"kappa", "nu", "tissue"});
    if (s.has("tissue")) {
        if (s.has("kappa") || s.has("nu"))
            throw ConfigError(path + ": give either tissue constants or kappa/nu");
        const Section t(s.raw("tissue"), s.path("tissue"), {"kappa_a", "rho_a", "c_a", "rho_b", "c_b"});
        TissueConstants c;
        c.kappa_a = t.positive("kappa_a", c.kappa_a);
        c.rho_a = t.positive("rho_a", c.rho_a);
        c.c_a = t.positive("c_a", c.c_a);
        c.rho_b = t.positive("rho_b", c.rho_b);
        c.c_b = t.positive("c_b", c.c_b);
        return derived_heat_params(c);
    }
    h.kappa = s.positive("kappa", h.kappa);
    h.nu = s.number("nu", h.nu);
    if (h.nu < 0.0) throw ConfigError(s.path("nu") + ": must be >= 0");
    return h;
}

FixedPointConfig parse_fixed_point(const json& j, const std::string& path) {
    const Section s(j, path, {"tol", "max_iter"});
    FixedPointConfig fp;
    fp.tol = s.positive("tol", fp.tol);
    fp.max_iter = s.count("max_iter", fp.max_iter);
    if (fp.max_iter == 0) throw ConfigError(s.path("max_iter") + ": must be positive");
    return fp;
}

SolverMethod parse_method(const std::string& m) {
    if (m == "auto") return SolverMethod::Auto;
    if (m == "cg") return SolverMethod::ConjugateGradient;
    if (m == "bicgstab") return SolverMethod::BiCGStab;
    if (m == "lu" || m == "dense-lu") return SolverMethod::DenseLU;
    throw InvalidParameter("expected auto, cg, bicgstab or lu");
}

SolveOptions parse_linear(const json& j, const std::string& path) {
    const Section s(j, path, {"tol", "max_iter", "method"});
    SolveOptions o;
    o.tol = s.positive("tol", o.tol);
    o.max_iter = s.count("max_iter", o.max_iter);
    if (o.max_iter == 0) throw ConfigError(s.path("max_iter") + ": must be positive");
    o.method = enum_value(s, "method", "auto", parse_method);
    return o;
}

ManufacturedPair parse_pair(const json& j, const std::string& path) {
    const Section s(j, path, {"a1", "a2", "lambda1", "lambda2"});
    ManufacturedPair p;
    p.a1 = s.number("a1", p.a1);
    p.a2 = s.number("a2", p.a2);
    p.lambda1 = s.number("lambda1", p.lambda1);
    p.lambda2 = s.number("lambda2", p.lambda2);
    return p;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json linear_json(const SolveOptions& o) {
    return {{"tol", o.tol}, {"max_iter", o.max_iter}, {"method", to_string(o.method)}};
}

json model_json(const AcousticModel& m) {
    return {{"speed_coefficients", m.speed.coefficients},
            {"ambient_temperature", m.speed.ambient_temperature},
            {"frequency", m.frequency},
            {"attenuation_per_hz", m.attenuation_per_hz},
            {"density", m.density},
            {"b_over_2a", m.b_over_2a}};
}

}  // namespace

MmsRunConfig parse_mms_config(std::string_view text) {
    const json j = parse_json(text);
    const Section s(j, "",
                    {"name", "variant", "scheme", "degree", "mesh_sizes", "tau", "final_time",
                     "projection", "manufactured", "model", "heat", "fixed_point", "linear_solver",
                     "jobs", "output_dir"});
    MmsRunConfig c;
    auto& st = c.study;
    c.name = s.text("name", c.name);
    if (c.name.empty()) throw ConfigError("/name: must not be empty");
    st.variant.tag = enum_value(s, "variant", "westervelt", parse_wave_variant);
    st.scheme = enum_value(s, "scheme", "euler", parse_scheme);
    st.degree = static_cast<int>(s.count("degree", 1));
    st.mesh_sizes = s.counts("mesh_sizes", st.mesh_sizes);
    st.tau = s.positive("tau", st.tau);
    st.final_time = s.positive("final_time", st.final_time);
    st.projection = enum_value(s, "projection", "ritz", parse_projection);
    if (s.has("manufactured")) st.pair = parse_pair(s.raw("manufactured"), "/manufactured");
    if (s.has("model")) st.model = parse_model(s.raw("model"), "/model", st.model);
    if (s.has("heat")) st.heat = parse_heat(s.raw("heat"), "/heat", st.heat);
    if (s.has("fixed_point")) st.fixed_point = parse_fixed_point(s.raw("fixed_point"), "/fixed_point");
    if (s.has("linear_solver")) st.linear = parse_linear(s.raw("linear_solver"), "/linear_solver");
    st.jobs = s.count("jobs", 1);
    c.output_dir = s.text("output_dir", "results/" + c.name);
    st.validate();
    return c;
}

ScenarioConfig parse_scenario_config(std::string_view text) {
    const json j = parse_json(text);
    const Section s(j, "",
                    {"name", "example", "variant", "scheme", "degree", "mesh", "tau", "final_time",
                     "model", "heat", "amplitude", "projection", "snapshots", "formats",
                     "fixed_point", "linear_solver", "output_dir"});
    const ExampleKind kind = enum_value(s, "example", "initial_excitation", parse_example);
    ScenarioConfig c = kind == ExampleKind::InitialExcitation ? ScenarioConfig::example2()
                                                              : ScenarioConfig::example3();
    c.name = s.text("name", c.name);
    if (c.name.empty()) throw ConfigError("/name: must not be empty");
    c.variant.tag = enum_value(s, "variant", to_string(c.variant.tag), parse_wave_variant);
    c.scheme = enum_value(s, "scheme", to_string(c.scheme), parse_scheme);
    c.degree = static_cast<int>(s.count("degree", 1));
    if (s.has("mesh")) {
        const Section m(s.raw("mesh"), "/mesh", {"focused_h", "file"});
        if (m.has("focused_h") && m.has("file"))
            throw ConfigError("/mesh: give either focused_h or file");
        c.mesh_h = m.positive("focused_h", c.mesh_h);
        c.mesh_file = m.text("file", "");
    }
    c.tau = s.positive("tau", c.tau);
    c.final_time = s.positive("final_time", c.final_time);
    if (s.has("model")) c.model = parse_model(s.raw("model"), "/model", c.model);
    if (s.has("heat")) c.heat = parse_heat(s.raw("heat"), "/heat", c.heat);
    c.amplitude = s.number("amplitude", c.amplitude);
    c.projection = enum_value(s, "projection", "nodal", parse_projection);
    c.snapshots = s.counts("snapshots", c.snapshots);
    if (s.has("formats")) {
        const auto& v = s.raw("formats");
        if (!v.is_array()) throw ConfigError("/formats: expected an array");
        c.formats.clear();
        for (const auto& f : v) {
            if (!f.is_string()) throw ConfigError("/formats: expected strings");
            try {
                c.formats.push_back(parse_snapshot_format(f.get<std::string>()));
            } catch (const InvalidParameter& e) {
                throw ConfigError(std::string("/formats: ") + e.what());
            }
        }
    }
    if (s.has("fixed_point")) c.fixed_point = parse_fixed_point(s.raw("fixed_point"), "/fixed_point");
    if (s.has("linear_solver")) c.linear = parse_linear(s.raw("linear_solver"), "/linear_solver");
    c.output_dir = s.text("output_dir", "results/" + c.name);
    if (c.projection == InitialProjection::Ritz && kind == ExampleKind::InitialExcitation)
        throw ConfigError("/projection: the initial excitation has no gradient; use 'nodal'");
    c.validate();
    return c;
}

MmsRunConfig load_mms_config(const std::filesystem::path& path) {
    return parse_mms_config(slurp(path));
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    return parse_scenario_config(slurp(path));
}

std::string describe(const MmsRunConfig& c) {
    const auto& st = c.study;
    json j = {{"name", c.name},
              {"variant", to_string(st.variant.tag)},
              {"scheme", to_string(st.scheme)},
              {"degree", st.degree},
              {"mesh_sizes", st.mesh_sizes},
              {"tau", st.tau},
              {"final_time", st.final_time},
              {"projection", to_string(st.projection)},
              {"manufactured",
               {{"a1", st.pair.a1}, {"a2", st.pair.a2}, {"lambda1", st.pair.lambda1},
                {"lambda2", st.pair.lambda2}}},
              {"model", model_json(st.model)},
              {"heat", {{"kappa", st.heat.kappa}, {"nu", st.heat.nu}}},
              {"fixed_point", {{"tol", st.fixed_point.tol}, {"max_iter", st.fixed_point.max_iter}}},
              {"linear_solver", linear_json(st.linear)},
              {"jobs", st.jobs},
              {"output_dir", c.output_dir.string()}};
    return j.dump(2);
}

std::string describe(const ScenarioConfig& c) {
    std::vector<std::string> formats;
    for (auto f : c.formats) formats.push_back(to_string(f));
    json j = {{"name", c.name},
              {"example", to_string(c.example)},
              {"variant", to_string(c.variant.tag)},
              {"scheme", to_string(c.scheme)},
              {"degree", c.degree},
              {"mesh", c.mesh_file.empty() ? json{{"focused_h", c.mesh_h}}
                                           : json{{"file", c.mesh_file.string()}}},
              {"tau", c.tau},
              {"final_time", c.final_time},
              {"model", model_json(c.model)},
              {"heat", {{"kappa", c.heat.kappa}, {"nu", c.heat.nu}}},
              {"amplitude", c.amplitude},
              {"projection", to_string(c.projection)},
              {"snapshots", c.snapshots},
              {"formats", formats},
              {"fixed_point", {{"tol", c.fixed_point.tol}, {"max_iter", c.fixed_point.max_iter}}},
              {"linear_solver", linear_json(c.linear)},
              {"output_dir", c.output_dir.string()}};
    return j.dump(2);
}

std::filesystem::path resolve_output_dir(const std::filesystem::path& configured,
                                         const std::string& name) {
    const char* env = std::getenv("THERMOFEM_OUTPUT_DIR");
    if (env && *env) return std::filesystem::path(env) / name;
    return configured;
}

}  // namespace thermofem

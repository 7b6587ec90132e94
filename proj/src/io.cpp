#include "rpspt/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

namespace fs = std::filesystem;

Vec vec_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParameterError(what + " must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParameterError(what + " must be an array of numbers");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

double number(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw ParameterError("missing field '" + key + "'");
    if (!j[key].is_number()) throw ParameterError("field '" + key + "' must be a number");
    return j[key].get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

std::string string_field(const Json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_string()) throw ParameterError("missing string field '" + key + "'");
    return j[key].get<std::string>();
}

// Literal JSON integers parse as unsigned only when they do not fit int64.
bool non_negative_integer(const Json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::uint64_t seed_field(const Json& j, std::uint64_t fallback) {
    if (!j.contains("seed")) return fallback;
    if (!non_negative_integer(j["seed"])) throw ParameterError("seed must be a non-negative integer");
    return j["seed"].get<std::uint64_t>();
}

ScalarFunction from_log(std::function<double(const Vec&)> psi, VecFn dpsi, MatFn d2psi) {
    return {[=](const Vec& x) { return std::exp(psi(x)); },
            [=](const Vec& x) { return Vec(std::exp(psi(x)) * dpsi(x)); },
            [=](const Vec& x) {
                Vec g = dpsi(x);
                return Mat(std::exp(psi(x)) * (d2psi(x) + g * g.transpose()));
            }};
}

}  // namespace

Json load_json(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ParameterError("cannot open " + filename);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        // Byte offset to line number.
        std::string text = ss.str();
        std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ParseError(filename + ": invalid JSON", line);
    }
}

void write_json(const std::string& filename, const Json& j) {
    std::ofstream out(filename);
    if (!out) throw ParseError("cannot write " + filename, 0);
    out << j.dump(2) << "\n";
}

Json to_json(const DiffusionSpec& s) {
    Json j;
    j["kind"] = DiffusionSpec::kind_name(s.kind);
    j["d"] = s.d;
    j["gamma"] = s.gamma;
    j["C"] = s.C;
    switch (s.kind) {
        case DiffusionSpec::Kind::VolStabilized: j["alpha"] = s.alpha; break;
        case DiffusionSpec::Kind::Polynomial:
            j["p"] = s.p;
            j["q"] = s.q;
            j["r"] = s.r;
            break;
        case DiffusionSpec::Kind::Custom: {
            Json rows = Json::array();
            for (Eigen::Index i = 0; i < s.B.rows(); ++i) rows.push_back(vec_to_json(s.B.row(i).transpose()));
            j["B"] = rows;
            break;
        }
    }
    return j;
}

DiffusionSpec spec_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("spec must be an object");
    auto kind = DiffusionSpec::parse_kind(string_field(j, "kind"));
    double gamma = number(j, "gamma"), C = number_or(j, "C", 0.0);
    switch (kind) {
        case DiffusionSpec::Kind::VolStabilized:
            return vol_stabilized_spec(number(j, "alpha"), gamma, C, static_cast<std::size_t>(number_or(j, "d", 3)));
        case DiffusionSpec::Kind::Polynomial: return polynomial_spec(number(j, "p"), number(j, "q"), number(j, "r"), gamma, C);
        case DiffusionSpec::Kind::Custom: {
            if (!j.contains("B") || !j["B"].is_array()) throw ParameterError("custom spec needs a B matrix");
            std::size_t d = j["B"].size();
            Mat B(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
            for (std::size_t i = 0; i < d; ++i) {
                Vec row = vec_from_json(j["B"][i], "B row");
                if (static_cast<std::size_t>(row.size()) != d) throw ParameterError("B must be square");
                B.row(static_cast<Eigen::Index>(i)) = row.transpose();
            }
            return custom_spec(B, gamma, C);
        }
    }
    throw ParameterError("unknown spec kind");
}

Json to_json(const SimulationConfig& c) {
    Json j;
    j["step"] = c.step;
    j["horizon"] = c.horizon;
    j["paths"] = c.paths;
    j["seed"] = c.seed;
    j["epsilon"] = c.epsilon;
    j["initial"] = c.initial ? vec_to_json(*c.initial) : Json("uniform");
    return j;
}

SimulationConfig simulation_from_json(const Json& j) {
    SimulationConfig c;
    c.step = number_or(j, "step", c.step);
    c.horizon = number_or(j, "horizon", c.horizon);
    if (j.contains("paths")) {
        if (!non_negative_integer(j["paths"]) || j["paths"].get<std::size_t>() == 0) throw ParameterError("paths must be a positive integer");
        c.paths = j["paths"].get<std::size_t>();
    }
    c.seed = seed_field(j, c.seed);
    c.epsilon = number_or(j, "epsilon", c.epsilon);
    if (j.contains("initial")) {
        if (j["initial"].is_string()) {
            if (j["initial"].get<std::string>() != "uniform") throw ParameterError("initial must be 'uniform' or a point");
            c.initial.reset();
        } else {
            c.initial = vec_from_json(j["initial"], "initial");
        }
    }
    return c;
}

Json to_json(const Figure1Config& c) {
    Json j;
    j["spec"] = {{"kind", "polynomial"}, {"p", c.p}, {"q", c.q}, {"r", c.r}, {"gamma", c.gamma}, {"C", c.C}};
    Json sim = to_json(c.sim);
    for (auto& [k, v] : sim.items()) j[k] = v;
    return j;
}

Figure1Config figure1_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("config must be an object");
    Figure1Config c;
    if (j.contains("spec")) {
        const Json& s = j["spec"];
        if (s.contains("kind") && string_field(s, "kind") != "polynomial")
            throw ParameterError("figure1 needs a polynomial spec");
        c.p = number_or(s, "p", c.p);
        c.q = number_or(s, "q", c.q);
        c.r = number_or(s, "r", c.r);
        c.gamma = number_or(s, "gamma", c.gamma);
        c.C = number_or(s, "C", c.C);
    }
    SimulationConfig defaults = Figure1Config::default_sim();
    Json sim = to_json(defaults);
    for (const char* k : {"step", "horizon", "paths", "seed", "epsilon", "initial"})
        if (j.contains(k)) sim[k] = j[k];
    c.sim = simulation_from_json(sim);
    c.spec();  // validates the boundary condition
    return c;
}

Json to_json(const FunctionFamily& f) {
    Json j;
    j["kind"] = FunctionFamily::kind_name(f.kind());
    j["d"] = f.dim();
    j["basis"] = f.basis().describe();
    Json rows = Json::array();
    for (const Vec& c : f.coefficients()) rows.push_back(vec_to_json(c));
    j["coefficients"] = rows;
    j["K"] = f.K();
    j["alpha"] = f.alpha();
    if (f.kind() == FunctionFamily::Kind::ControlledEquation) j["xi0"] = vec_to_json(f.xi0());
    return j;
}

FunctionFamily family_from_json(const Json& j) {
    if (!j.is_object()) throw ParameterError("family must be an object");
    auto kind = FunctionFamily::parse_kind(string_field(j, "kind"));
    std::size_t d = static_cast<std::size_t>(number(j, "d"));
    if (!j.contains("coefficients") || !j["coefficients"].is_array())
        throw ParameterError("family needs a coefficients array");
    std::vector<Vec> coeffs;
    for (const auto& row : j["coefficients"]) coeffs.push_back(vec_from_json(row, "coefficient row"));
    FunctionFamily f(kind, d, std::move(coeffs), number(j, "K"), number_or(j, "alpha", 1.0));
    if (j.contains("basis") && string_field(j, "basis") != f.basis().describe())
        throw ParameterError("basis '" + string_field(j, "basis") + "' does not match " + f.basis().describe());
    if (j.contains("xi0")) f.set_xi0(vec_from_json(j["xi0"], "xi0"));
    return f;
}

ScalarFunction generating_function_from_json(const Json& j, std::size_t d) {
    std::string type = string_field(j, "type");
    if (type == "entropy") {
        double c = number_or(j, "c", 1.0);
        return from_log([c](const Vec& x) { return -c * (x.array() * x.array().log()).sum(); },
                        [c](const Vec& x) { return Vec(-c * (x.array().log() + 1.0).matrix()); },
                        [c](const Vec& x) { return Mat(Vec(-c * x.cwiseInverse()).asDiagonal()); });
    }
    if (type == "log-affine") {
        Vec v = vec_from_json(j["v"], "v");
        if (static_cast<std::size_t>(v.size()) != d) throw ParameterError("v has the wrong dimension");
        return from_log([v](const Vec& x) { return v.dot(x); }, [v](const Vec&) { return v; },
                        [d](const Vec&) { return Mat(Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))); });
    }
    if (type == "constant") {
        double c = number(j, "value");
        if (!(c > 0)) throw ParameterError("constant G must be positive");
        double lc = std::log(c);
        return from_log([lc](const Vec&) { return lc; }, [d](const Vec&) { return Vec(Vec::Zero(static_cast<Eigen::Index>(d))); },
                        [d](const Vec&) { return Mat(Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d))); });
    }
    if (type == "quadratic") {
        Vec th = vec_from_json(j["theta"], "theta");
        FunctionFamily fam(FunctionFamily::Kind::Generated, d, {th}, 1e300);
        QuadraticBasis B{d};
        return from_log([th, B](const Vec& x) { return th.dot(B.value(x)); },
                        [fam, th](const Vec& x) { return fam.F(th, x); }, [fam, th](const Vec& x) { return fam.DF(th, x); });
    }
    throw ParameterError("unknown generating function type '" + type + "'");
}

PortfolioRecipe portfolio_from_json(const Json& j, std::size_t d) {
    if (!j.is_object()) throw ParameterError("portfolio spec must be an object");
    PortfolioRecipe r;
    r.kind = string_field(j, "kind");
    if (r.kind == "market") {
        r.build = [](const Market& m) { return market_portfolio(m); };
    } else if (r.kind == "constant") {
        Vec w = vec_from_json(j["weights"], "weights");
        if (static_cast<std::size_t>(w.size()) != d) throw ParameterError("weights have the wrong dimension");
        r.build = [w](const Market& m) { return constant_portfolio(m, w); };
    } else if (r.kind == "controlled") {
        Vec th = vec_from_json(j["theta"], "theta");
        FunctionFamily fam(FunctionFamily::Kind::Controlled, d, {th}, 1e300);
        r.build = [fam](const Market& m) { return fam.member(0, m); };
    } else if (r.kind == "generated") {
        if (!j.contains("G")) throw ParameterError("generated portfolio needs G");
        ScalarFunction G = generating_function_from_json(j["G"], d);
        r.G = G;
        r.build = [G](const Market& m) { return functionally_generated(G, m); };
    } else {
        throw ParameterError("unknown portfolio kind '" + r.kind + "'");
    }
    return r;
}

LiftKind parse_lift_kind(const std::string& s) {
    if (s == "left-point") return LiftKind::LeftPoint;
    if (s == "geometric") return LiftKind::Geometric;
    throw ParameterError("unknown lift kind '" + s + "' (left-point or geometric)");
}

void write_mc_result(const std::string& csv_file, const std::string& sidecar_file, const MCResult& result,
                     const Json& config) {
    {
        std::ofstream out(csv_file);
        if (!out) throw ParseError("cannot write " + csv_file, 0);
        result.write_csv(out);
    }
    Json side;
    side["config"] = config;
    side["nodes"] = result.grid.size();
    Json curves = Json::array();
    for (const auto& c : result.curves) curves.push_back(c.name);
    side["curves"] = curves;
    Json scalars = Json::object();
    for (const auto& [k, v] : result.scalars) scalars[k] = v;
    side["scalars"] = scalars;
    side["version"] = kToolVersion;
    write_json(sidecar_file, side);
}

std::string sibling_path(const std::string& file, const std::string& suffix) {
    fs::path p(file);
    if (p.has_extension()) p.replace_extension();
    return p.string() + suffix;
}

std::string default_output(const std::string& name) {
    const char* dir = std::getenv("RPSPT_OUT_DIR");
    if (dir && *dir) return (fs::path(dir) / name).string();
    return name;
}

Json RunManifest::to_json() const {
    Json j;
    j["command"] = command;
    j["config"] = config;
    j["seed"] = seed;
    j["version"] = version;
    j["outputs"] = outputs;
    j["seconds"] = seconds;
    return j;
}

void RunManifest::write(const std::string& filename) const {
    for (const auto& o : outputs)
        if (!fs::exists(o)) throw ParameterError("listed output " + o + " was not written");
    write_json(filename, to_json());
}

}  // namespace rpspt

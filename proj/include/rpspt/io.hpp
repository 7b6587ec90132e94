#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rpspt/experiments.hpp"
#include "rpspt/market.hpp"
#include "rpspt/models.hpp"
#include "rpspt/universal.hpp"

namespace rpspt {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

// Parses a JSON file; syntax errors become ParseError with the line number.
Json load_json(const std::string& filename);
void write_json(const std::string& filename, const Json& j);

Json to_json(const DiffusionSpec& spec);
DiffusionSpec spec_from_json(const Json& j);

// {step, horizon, paths, seed, epsilon, initial: "uniform" | [x1, ...]}
Json to_json(const SimulationConfig& c);
SimulationConfig simulation_from_json(const Json& j);

// {spec: {kind: polynomial, p, q, r, gamma, C}, step, horizon, paths, seed, epsilon, initial}
Json to_json(const Figure1Config& c);
Figure1Config figure1_from_json(const Json& j);

// {kind, basis, coefficients: [[...], ...], K, alpha, xi0?}
Json to_json(const FunctionFamily& f);
FunctionFamily family_from_json(const Json& j);

// Portfolio spec:
//   {kind: market} | {kind: constant, weights} | {kind: controlled, theta}
//   {kind: generated, G: {type: entropy, c} | {type: log-affine, v} | {type: constant, value} | {type: quadratic, theta}}
// Generated specs also return their G.
struct PortfolioRecipe {
    std::string kind;
    std::optional<ScalarFunction> G;
    std::function<PortfolioPath(const Market&)> build;
};
PortfolioRecipe portfolio_from_json(const Json& j, std::size_t d);
ScalarFunction generating_function_from_json(const Json& j, std::size_t d);

LiftKind parse_lift_kind(const std::string& s);

// CSV plus a JSON sidecar echoing `config` and the scalar outputs.
void write_mc_result(const std::string& csv_file, const std::string& sidecar_file, const MCResult& result,
                     const Json& config);

// Replaces the extension of `file` (or appends) with `suffix`, e.g. ".json".
std::string sibling_path(const std::string& file, const std::string& suffix);
// `name` inside RPSPT_OUT_DIR when set, else the working directory.
std::string default_output(const std::string& name);

struct RunManifest {
    std::string command;
    Json config;
    std::uint64_t seed = 0;
    std::string version = kToolVersion;
    std::vector<std::string> outputs;
    double seconds = 0;

    Json to_json() const;
    // Throws if a listed output is missing.
    void write(const std::string& filename) const;
};

}  // namespace rpspt

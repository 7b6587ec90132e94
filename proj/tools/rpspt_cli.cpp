// Command-line front end: lift, wealth, universal and figure1.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rpspt/errors.hpp"
#include "rpspt/experiments.hpp"
#include "rpspt/identities.hpp"
#include "rpspt/io.hpp"
#include "rpspt/lift.hpp"
#include "rpspt/market.hpp"
#include "rpspt/universal.hpp"

using namespace rpspt;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
};

std::ofstream open_out(const std::string& file) {
    std::ofstream out(file);
    if (!out) throw ParameterError("cannot write " + file);
    return out;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParameterError("bad number '" + item + "' in list");
        }
    }
    if (out.empty()) throw ParameterError("empty list");
    return out;
}

// Prefix of `path` ending at the node t = T.
SampledPath truncate(const SampledPath& path, std::optional<double> T) {
    if (!T) return path;
    std::size_t end = path.grid().index_of(*T);
    if (end == 0) throw ParameterError("horizon must be positive");
    std::vector<std::size_t> idx(end + 1);
    for (std::size_t k = 0; k <= end; ++k) idx[k] = k;
    return path.restrict(path.grid().select(idx));
}

// Every `stride`-th node plus the last one.
TimeGrid strided(const TimeGrid& g, std::size_t stride) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < g.size(); k += stride) idx.push_back(k);
    if (idx.back() != g.size() - 1) idx.push_back(g.size() - 1);
    return g.select(idx);
}

void finish(RunManifest& m, const std::string& manifest_file, std::chrono::steady_clock::time_point start) {
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m.write(manifest_file);
    for (const auto& o : m.outputs) std::cout << "wrote " << o << "\n";
}

struct LiftArgs {
    std::string input, out;
    int levels = 5;
    double p = kDefaultP;
};

void cmd_lift(const LiftArgs& a, const Common& c) {
    auto start = std::chrono::steady_clock::now();
    std::uint64_t seed = c.seed.value_or(1);
    SampledPath path = read_path_csv(a.input);
    if (a.levels < 2 || a.levels > 30) throw ParameterError("--levels must lie in [2, 30]");
    std::size_t steps = path.size() - 1;
    std::size_t coarse_stride = std::size_t{1} << (a.levels - 1);
    if (steps % coarse_stride != 0)
        throw GridAlignmentError("input has " + std::to_string(steps) + " steps, not a multiple of 2^" +
                                 std::to_string(a.levels - 1));
    int finest = static_cast<int>(std::lround(std::log2(static_cast<double>(steps))));
    std::vector<TimeGrid> grids;
    std::vector<int> ids;
    for (int j = a.levels - 1; j >= 0; --j) {
        grids.push_back(strided(path.grid(), std::size_t{1} << j));
        ids.push_back(finest - j);
    }
    PartitionSequence parts(grids, ids);
    RieReport rie = rie_diagnostic(path, parts, a.p);

    {
        std::ofstream out = open_out(a.out);
        rie.gaps.write_csv(out);
        if (!rie.converged()) out << "WARN,fitted," << format_double(rie.gaps.fitted_factor()) << "\n";
    }
    std::string summary = sibling_path(a.out, "_summary.csv");
    {
        std::ofstream out = open_out(summary);
        out << "level,nodes,chen_residual";
        for (std::size_t i = 0; i < path.dim(); ++i) out << ",bracket_" << i + 1;
        out << "\n";
        for (std::size_t l = 0; l < parts.size(); ++l) {
            RoughLift lift = RoughLift::left_point(path.restrict(parts[l]), a.p);
            Mat br = bracket_values(lift).mat(lift.size() - 1);
            out << parts.level_id(l) << ',' << lift.size() << ','
                << format_double(max_chen_residual(lift, 1000, seed));
            for (Eigen::Index i = 0; i < br.rows(); ++i) out << ',' << format_double(br(i, i));
            out << "\n";
        }
    }
    RunManifest m;
    m.command = "lift";
    m.config = {{"input", a.input}, {"levels", a.levels}, {"p", a.p}, {"out", a.out}};
    m.seed = seed;
    m.outputs = {a.out, summary};
    finish(m, sibling_path(a.out, ".manifest.json"), start);
    if (!rie.converged())
        std::cerr << "warning: gap shrink factor " << rie.gaps.fitted_factor() << " above " << rie.gaps.threshold
                  << "\n";
}

struct WealthArgs {
    std::string market, portfolio, out, lift = "left-point";
    std::optional<double> T;
    double p = kDefaultP;
};

void cmd_wealth(const WealthArgs& a, const Common& c) {
    auto start = std::chrono::steady_clock::now();
    SampledPath prices = truncate(read_path_csv(a.market), a.T);
    Market market = market_weights(prices, parse_lift_kind(a.lift), a.p);
    Json spec = load_json(a.portfolio);
    PortfolioRecipe recipe = portfolio_from_json(spec, market.dim());
    WealthRecord rec = wealth(recipe.build(market), market);
    {
        std::ofstream out = open_out(a.out);
        rec.write_csv(out);
    }
    RunManifest m;
    m.command = "wealth";
    m.config = {{"market", a.market}, {"portfolio", spec}, {"lift", a.lift}, {"p", a.p}, {"out", a.out}};
    if (a.T) m.config["T"] = *a.T;
    m.seed = c.seed.value_or(0);
    m.outputs = {a.out};
    if (recipe.G) {
        MasterFormulaSides sides = master_formula_sides(*recipe.G, market);
        std::string master = sibling_path(a.out, "_master.csv");
        {
            std::ofstream out = open_out(master);
            out << "t,lhs,rhs\n";
            for (std::size_t k = 0; k < sides.lhs.size(); ++k)
                out << format_double(sides.lhs.time(k)) << ',' << format_double(sides.lhs(k, 0)) << ','
                    << format_double(sides.rhs(k, 0)) << "\n";
        }
        int finest = static_cast<int>(std::lround(std::log2(static_cast<double>(market.size() - 1))));
        PartitionSequence parts({strided(market.grid(), 2), market.grid()}, {finest - 1, finest});
        ConvergenceReport rep = master_formula_check(*recipe.G, market, parts);
        std::string report = sibling_path(a.out, "_master_report.csv");
        {
            std::ofstream out = open_out(report);
            rep.write_csv(out);
        }
        m.outputs.push_back(master);
        m.outputs.push_back(report);
    }
    finish(m, sibling_path(a.out, ".manifest.json"), start);
}

struct UniversalArgs {
    std::string market, family, out, measure = "uniform", tgrid, lift = "left-point";
    double p = kDefaultP;
};

void cmd_universal(const UniversalArgs& a, const Common& c) {
    auto start = std::chrono::steady_clock::now();
    SampledPath prices = read_path_csv(a.market);
    Market market = market_weights(prices, parse_lift_kind(a.lift), a.p);
    Json fj = load_json(a.family);
    FunctionFamily family = family_from_json(fj);
    if (family.size() == 0) throw ParameterError("family is empty");
    if (family.dim() != market.dim()) throw ParameterError("family dimension does not match the market");
    family.validate();
    std::vector<double> w;
    if (a.measure == "uniform") {
        w.assign(family.size(), 1.0 / static_cast<double>(family.size()));
    } else if (a.measure == "weights") {
        if (!fj.contains("weights") || !fj["weights"].is_array())
            throw ParameterError("--measure weights needs a weights array in the family file");
        for (const auto& v : fj["weights"]) {
            if (!v.is_number()) throw ParameterError("weights must be numbers");
            w.push_back(v.get<double>());
        }
    } else {
        throw ParameterError("unknown measure '" + a.measure + "' (uniform or weights)");
    }
    std::vector<double> horizons = a.tgrid.empty() ? std::vector<double>{market.grid().horizon()} : parse_list(a.tgrid);
    CoverTrajectory cover = cover_gap_trajectory(family, w, market, horizons);
    {
        std::ofstream out = open_out(a.out);
        cover.write_csv(out);
    }
    RunManifest m;
    m.command = "universal";
    m.config = {{"market", a.market}, {"family", fj}, {"measure", a.measure}, {"T_grid", horizons},
                {"lift", a.lift}, {"p", a.p}, {"out", a.out}};
    m.seed = c.seed.value_or(0);
    m.outputs = {a.out};
    finish(m, sibling_path(a.out, ".manifest.json"), start);
}

struct Figure1Args {
    std::string config, out;
};

void cmd_figure1(const Figure1Args& a, const Common& c) {
    auto start = std::chrono::steady_clock::now();
    Figure1Config cfg = figure1_from_json(a.config.empty() ? Json::object() : load_json(a.config));
    if (c.seed) cfg.sim.seed = *c.seed;
    Figure1Result res = figure1_experiment(cfg);
    std::string sidecar = sibling_path(a.out, ".json");
    Json echo = to_json(cfg);
    write_mc_result(a.out, sidecar, res.curves, echo);
    RunManifest m;
    m.command = "figure1";
    m.config = echo;
    m.seed = cfg.sim.seed;
    m.outputs = {a.out, sidecar};
    finish(m, sibling_path(a.out, ".manifest.json"), start);
    std::cout << "alpha* = " << res.alpha.value << ", terminal gap = " << res.terminal_gap << " (stderr "
              << res.terminal_gap_se << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise portfolio experiments"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--seed", common.seed, "Override the seed of every random component");

    LiftArgs la;
    la.out = default_output("lift_report.csv");
    auto* lift = app.add_subcommand("lift", "Left-point lift and Riemann-sum convergence report");
    lift->add_option("--input", la.input, "Path CSV (t,x1,...,xd)")->required();
    lift->add_option("--levels", la.levels, "Number of dyadic levels ending at the input grid");
    lift->add_option("--p", la.p, "Variation exponent in (2,3)");
    lift->add_option("--out", la.out, "Report CSV");

    WealthArgs wa;
    wa.out = default_output("wealth.csv");
    auto* wealth_cmd = app.add_subcommand("wealth", "Pathwise wealth of a portfolio");
    wealth_cmd->add_option("--market", wa.market, "Price CSV")->required();
    wealth_cmd->add_option("--portfolio", wa.portfolio, "Portfolio JSON")->required();
    wealth_cmd->add_option("--T", wa.T, "Horizon; must be a grid node");
    wealth_cmd->add_option("--lift", wa.lift, "left-point or geometric");
    wealth_cmd->add_option("--p", wa.p, "Variation exponent in (2,3)");
    wealth_cmd->add_option("--out", wa.out, "Wealth CSV");

    UniversalArgs ua;
    ua.out = default_output("cover.csv");
    auto* universal = app.add_subcommand("universal", "Universal portfolio and Cover gap trajectory");
    universal->add_option("--market", ua.market, "Price CSV")->required();
    universal->add_option("--family", ua.family, "Family JSON")->required();
    universal->add_option("--measure", ua.measure, "uniform or weights (read from the family file)");
    universal->add_option("--T-grid", ua.tgrid, "Comma-separated horizons; default the last node");
    universal->add_option("--lift", ua.lift, "left-point or geometric");
    universal->add_option("--p", ua.p, "Variation exponent in (2,3)");
    universal->add_option("--out", ua.out, "Cover CSV");

    Figure1Args fa;
    fa.out = default_output("figure1.csv");
    auto* fig = app.add_subcommand("figure1", "Log-optimal against alpha-optimal expected log wealth");
    fig->add_option("--config", fa.config, "Figure JSON; defaults when omitted");
    fig->add_option("--out", fa.out, "Curves CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*lift) cmd_lift(la, common);
        if (*wealth_cmd) cmd_wealth(wa, common);
        if (*universal) cmd_universal(ua, common);
        if (*fig) cmd_figure1(fa, common);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.numerical() ? 3 : 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

#include "rpspt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rpspt/errors.hpp"

namespace rpspt {

SimulationConfig Figure1Config::default_sim() {
    SimulationConfig s;
    s.step = 1e-3;
    s.horizon = 10.0;
    s.paths = 2000;
    s.seed = 20240501;
    s.initial = Vec::Constant(3, 1.0 / 3);
    return s;
}

Figure1Result figure1_experiment(const Figure1Config& config) {
    DiffusionSpec spec = config.spec();
    PathSimulator sim(spec, config.sim);
    AlphaStarAccumulator acc(spec.B);
    for (std::size_t i = 0; i < config.sim.paths; ++i) acc.add(sim.path(i));
    Figure1Result res;
    res.alpha = acc.result();

    std::size_t n = sim.grid().size();
    MeanAccumulator opt(n), approx(n), diff(n);
    PortfolioMap log_opt = [&](const Vec& m) { return log_optimal_portfolio(spec, m); };
    double a = res.alpha.value, g = spec.gamma;
    PortfolioMap alpha_opt = [a, g](const Vec& m) { return vol_stabilized_portfolio(a, g, m); };
    std::vector<double> dv(n);
    for (std::size_t i = 0; i < config.sim.paths; ++i) {
        SampledPath mu = sim.path(i);
        SampledPath x = euler_log_wealth(mu, log_opt);
        SampledPath y = euler_log_wealth(mu, alpha_opt);
        for (std::size_t k = 0; k < n; ++k) dv[k] = x(k, 0) - y(k, 0);
        opt.add(x);
        approx.add(y);
        diff.add(dv);
    }
    res.curves.grid = sim.grid();
    res.curves.curves.push_back({"log-optimal", opt.mean(), opt.se()});
    res.curves.curves.push_back({"alpha-optimal", approx.mean(), approx.se()});
    res.curves.curves.push_back({"difference", diff.mean(), diff.se()});
    const auto& dm = res.curves.curves.back().mean;
    const auto& ds = res.curves.curves.back().se;
    res.min_gap_se = std::numeric_limits<double>::infinity();
    res.dominance = true;
    for (std::size_t k = 1; k < n; ++k) {
        res.dominance = res.dominance && dm[k] >= -ds[k];
        if (ds[k] > 0) res.min_gap_se = std::min(res.min_gap_se, dm[k] / ds[k]);
    }
    res.terminal_gap = dm.back();
    res.terminal_gap_se = ds.back();
    res.terminal_significant = res.terminal_gap >= 2 * res.terminal_gap_se;
    res.curves.scalars = {{"alpha_star", res.alpha.value},
                          {"alpha_star_denominator", res.alpha.denominator},
                          {"alpha_star_denominator_stderr", res.alpha.denominator_stderr},
                          {"terminal_gap", res.terminal_gap},
                          {"terminal_gap_stderr", res.terminal_gap_se},
                          {"min_gap_in_stderr", res.min_gap_se}};
    return res;
}

SimulationConfig ErgodicConfig::default_sim() {
    SimulationConfig s;
    s.step = 1e-3;
    s.horizon = 200.0;
    s.paths = 4;
    s.seed = 20240502;
    s.initial = Vec::Constant(3, 1.0 / 3);
    return s;
}

FunctionFamily ErgodicConfig::default_family() {
    QuadraticBasis B{3};
    std::vector<Vec> coeffs;
    for (double a : {-8.0, -4.0, 0.0})
        for (double b : {-4.0, 0.0, 4.0}) {
            Vec th = Vec::Zero(static_cast<Eigen::Index>(3 * B.size()));
            for (std::size_t i = 0; i < 3; ++i) {
                th[static_cast<Eigen::Index>(i * B.size() + B.linear_index(i))] = a;
                th[static_cast<Eigen::Index>(i * B.size() + B.quadratic_index(i, i))] = b;
            }
            coeffs.push_back(th);
        }
    return FunctionFamily(FunctionFamily::Kind::Controlled, 3, std::move(coeffs), 20.0);
}

ErgodicReport ergodic_growth_rate(const ErgodicConfig& config) {
    if (config.horizons.empty()) throw ParameterError("ergodic run needs at least one horizon");
    config.family.validate();
    PathSimulator sim(config.spec, config.sim);
    const TimeGrid& g = sim.grid();
    double ratio = std::round(config.obs_step / config.sim.step);
    if (!(ratio >= 1) || std::abs(ratio * config.sim.step - config.obs_step) > 1e-9)
        throw ParameterError("observation step must be a multiple of the simulation step");
    std::size_t stride = static_cast<std::size_t>(ratio);
    std::vector<std::size_t> obs_idx;
    for (std::size_t k = 0; k < g.size(); k += stride) obs_idx.push_back(k);
    if (obs_idx.back() != g.size() - 1) throw ParameterError("horizon must be a multiple of the observation step");
    TimeGrid obs = g.select(obs_idx);
    std::vector<std::size_t> hidx;
    for (double T : config.horizons) hidx.push_back(g.index_of(T));
    for (double T : config.horizons) obs.index_of(T);

    ErgodicReport rep;
    rep.horizons = config.horizons;
    std::size_t H = config.horizons.size();
    std::vector<double> uniform(config.family.size(), 1.0 / static_cast<double>(config.family.size()));
    PortfolioMap log_opt = [&](const Vec& m) { return log_optimal_portfolio(config.spec, m); };
    for (std::size_t i = 0; i < config.sim.paths; ++i) {
        SampledPath mu = sim.path(i);
        SampledPath half = half_growth_integral(config.spec, mu);
        SampledPath lv = euler_log_wealth(mu, log_opt);
        Market m = market_from_weights(mu.restrict(obs));
        ErgodicPath ep;
        ep.cover = cover_gap_trajectory(config.family, uniform, m, config.horizons);
        for (std::size_t h = 0; h < H; ++h) {
            double T = config.horizons[h];
            ep.L_hat.push_back(half(hidx[h], 0) / T);
            ep.rate_log_optimal.push_back(lv(hidx[h], 0) / T);
            ep.rate_universal.push_back(ep.cover.rows[h].log_vuniversal / T);
        }
        rep.paths.push_back(std::move(ep));
    }
    double n = static_cast<double>(rep.paths.size());
    rep.L_hat.assign(H, 0.0);
    rep.rate_log_optimal.assign(H, 0.0);
    rep.rate_universal.assign(H, 0.0);
    rep.gap_scaled.assign(H, 0.0);
    for (const auto& ep : rep.paths)
        for (std::size_t h = 0; h < H; ++h) {
            rep.L_hat[h] += ep.L_hat[h] / n;
            rep.rate_log_optimal[h] += ep.rate_log_optimal[h] / n;
            rep.rate_universal[h] += ep.rate_universal[h] / n;
            rep.gap_scaled[h] += ep.cover.rows[h].gap_scaled / n;
        }
    rep.terminal_relative_gap = std::abs(rep.rate_log_optimal.back() - rep.L_hat.back()) / std::abs(rep.L_hat.back());
    rep.cover_gap_lower = rep.gap_scaled.back() < rep.gap_scaled.front();
    rep.universal_gap_shrinks = true;
    for (std::size_t h = 1; h < H; ++h)
        rep.universal_gap_shrinks = rep.universal_gap_shrinks &&
                                    rep.rate_log_optimal[h] - rep.rate_universal[h] <=
                                        rep.rate_log_optimal[h - 1] - rep.rate_universal[h - 1];
    return rep;
}

}  // namespace rpspt

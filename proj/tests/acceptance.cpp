// Acceptance gate: one PASS/FAIL line per criterion. The exit code is nonzero only when a
// criterion fails that is not listed as known-unattainable in the README.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "rpspt/experiments.hpp"
#include "rpspt/identities.hpp"
#include "rpspt/io.hpp"
#include "rpspt/universal.hpp"

using namespace rpspt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    // Set when the failure is the documented one the construction cannot reach.
    bool known_unattainable = false;
};

struct Criterion {
    std::string name;
    double time_limit;  // seconds; 0 means none stated
    std::function<Outcome()> run;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double timed(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return seconds_since(t0);
}

Market gbm_market(std::size_t steps, std::uint64_t seed) { return market_weights(fixtures::gbm_prices(3, steps, 1.0, seed)); }
Market zero_bracket_market(std::size_t steps) {
    return market_from_weights(fixtures::smooth_weights(steps, 4.0), LiftKind::Geometric);
}

ConvergenceReport over_levels(const PartitionSequence& ps, const std::function<double(std::size_t)>& gap) {
    ConvergenceReport rep;
    for (std::size_t l = 0; l < ps.size(); ++l) rep.add(ps.level_id(l), ps[l].mesh(), gap(l));
    return rep;
}

std::string verdict(const ConvergenceReport& r) {
    return "fitted factor " + fmt(r.fitted_factor()) + ", max level ratio " + fmt(r.max_ratio());
}

// ---------------------------------------------------------------------------

Outcome chen_exactness() {
    SampledPath x = fixtures::brownian(2, 1 << 14, 1.0, 101);
    double worst = 0, slowest = 0;
    auto check = [&](const std::function<RoughLift()>& make, std::uint64_t seed) {
        std::optional<RoughLift> L;
        slowest = std::max(slowest, timed([&] { L.emplace(make()); }));
        worst = std::max(worst, max_chen_residual(*L, 1000, seed));
    };
    check([&] { return RoughLift::left_point(x); }, 1);
    check([&] { return RoughLift::geometric(x); }, 2);
    check([&] { return lift_via_left_point(x, PartitionSequence::dyadic(x.grid(), 10, 14)).lift; }, 3);
    LiftPtr base = share(RoughLift::left_point(x));
    check([&] { return canonical_lift(ControlledPath::of_function(
                    base, [](const Vec& v) { return Vec{{std::sin(v[0]), v[0] * v[1]}}; },
                    [](const Vec& v) { Mat m(2, 2); m << std::cos(v[0]), 0.0, v[1], v[0]; return m; })); },
          4);
    Market m = gbm_market(1 << 14, 5);
    worst = std::max({worst, max_chen_residual(m.price_lift(), 1000, 6), max_chen_residual(m.weights_lift(), 1000, 7)});
    return {worst <= 1e-12 && slowest < 1.0,
            "max residual " + fmt(worst) + " over 6 lifts, slowest lift " + fmt(slowest) + " s at 16385 nodes"};
}

Outcome bracket_consistency() {
    // The partition-sum representation belongs to left-point lifts; the geometric lift has
    // zero bracket by construction and enters the identity check only.
    std::vector<std::pair<RoughLift, bool>> lifts;
    lifts.emplace_back(RoughLift::left_point(fixtures::brownian(2, 4096, 1.0, 21)), true);
    lifts.emplace_back(RoughLift::left_point(fixtures::gbm_prices(3, 4096, 1.0, 22)), true);
    lifts.emplace_back(RoughLift::left_point(fixtures::smooth_weights(4096)), true);
    lifts.emplace_back(RoughLift::left_point(SampledPath::constant(TimeGrid::uniform(1, 512), Vec::Ones(2))), true);
    lifts.emplace_back(RoughLift::geometric(fixtures::brownian(3, 2048, 1.0, 23)), false);
    double id = 0, ps = 0, geo = 0;
    for (auto& [L, left_point] : lifts) {
        BracketPath b = bracket(L, 1000, 9);
        id = std::max(id, b.identity_residual);
        if (left_point)
            ps = std::max(ps, b.partition_sum_gap);
        else
            geo = std::max(geo, b.values.mat(L.size() - 1).cwiseAbs().maxCoeff());
    }
    return {id <= 1e-12 && ps <= 1e-10 && geo <= 1e-12,
            "identity residual " + fmt(id) + " over 5 fixtures, partition-sum gap " + fmt(ps) +
                " over 4 left-point fixtures, geometric bracket " + fmt(geo)};
}

Outcome riemann_sum_equivalence() {
    SampledPath x = fixtures::brownian(2, 1 << 16, 1.0, 7);
    RieReport r = rie_diagnostic(x, PartitionSequence::dyadic(x.grid(), 9, 13));
    return {r.converged(), "levels 9-13: " + verdict(r.gaps) + ", kappa " + fmt(r.kappa)};
}

Outcome appendix_identities() {
    std::ostringstream d;
    bool ok = true;

    // Associativity: exact on degenerate integrands, shrinking otherwise.
    SampledPath x = fixtures::brownian(2, 1 << 13, 1.0, 29);
    LiftPtr L = share(RoughLift::left_point(x));
    auto member = [](LiftPtr lift, double a, double b) {
        return ControlledPath::of_function(
            lift, [=](const Vec& v) { return Vec{{std::sin(a * v[0]), std::cos(b * v[1])}}; },
            [=](const Vec& v) {
                Mat m = Mat::Zero(2, 2);
                m(0, 0) = a * std::cos(a * v[0]);
                m(1, 1) = -b * std::sin(b * v[1]);
                return m;
            });
    };
    ControlledPath F = member(L, 1.0, 0.5), G = member(L, 2.0, 1.0);
    ControlledPath Y = ControlledPath::of_function(
        L, [](const Vec& v) { return Vec::Constant(1, std::exp(0.5 * v[1])); },
        [](const Vec& v) { Mat m(1, 2); m << 0.0, 0.5 * std::exp(0.5 * v[1]); return m; });
    double assoc_exact = associativity_check(ControlledPath::constant(L, Vec::Ones(1)), F, G);
    ConvergenceReport assoc = over_levels(PartitionSequence::dyadic(x.grid(), 6, 12), [&](std::size_t l) {
        return associativity_gap(Y, F, G, PartitionSequence::dyadic(x.grid(), 6, 12)[l]);
    });
    ok = ok && assoc_exact <= 1e-10 && assoc.converged();
    d << "associativity exact " << fmt(assoc_exact) << " / " << verdict(assoc);

    // Fubini for a five-member mixture.
    std::vector<ControlledPath> five;
    for (int i = 0; i < 5; ++i) five.push_back(member(L, 0.5 + i, 1.5 - 0.2 * i));
    double fubini = mixture_integral_check(DiscreteMeasure<ControlledPath>{five, {0.1, 0.3, 0.2, 0.15, 0.25}}, *L);
    ok = ok && fubini <= 1e-10;
    d << "; Fubini " << fmt(fubini);

    // Product remainder R^{FG} = F R^G + R^F G + F_{s,t} G_{s,t} with F = G = identity.
    ControlledPath I = ControlledPath::identity(L);
    ControlledPath P = product(I, I);
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> node(0, L->size() - 1);
    double prod = 0;
    for (int it = 0; it < 1000; ++it) {
        std::size_t s = node(rng), t = node(rng);
        if (s > t) std::swap(s, t);
        Vec rhs = 2 * I.remainder(s, t).cwiseProduct(I.value().vec(s)) +
                  I.value().increment(s, t).cwiseProduct(I.value().increment(s, t));
        prod = std::max(prod, (P.remainder(s, t) - rhs).cwiseAbs().maxCoeff());
    }
    ok = ok && prod <= 1e-12;
    d << "; product remainder " << fmt(prod);

    // Bracket of int K dS against int K (x) K d[S].
    SampledPath x14 = fixtures::brownian(2, 1 << 14, 1.0, 23);
    LiftPtr L14 = share(RoughLift::left_point(x14));
    auto ps = PartitionSequence::dyadic(x14.grid(), 7, 14);
    ControlledPath K = ControlledPath::of_function(
        L14, [](const Vec& v) { return Vec{{std::sin(v[0]), v[0] * v[1]}}; },
        [](const Vec& v) { Mat m(2, 2); m << std::cos(v[0]), 0.0, v[1], v[0]; return m; });
    ConvergenceReport iso = over_levels(ps, [&](std::size_t l) {
        LiftPtr sub = share(L14->restrict(ps[l]));
        ControlledPath Kl = K.restrict(sub);
        std::size_t n = sub->size();
        std::vector<double> zd(n * 2);
        for (std::size_t k = 0; k < n; ++k) {
            zd[2 * k] = Kl.value()(k, 0);
            zd[2 * k + 1] = Kl.value()(k, 1);
        }
        ControlledPath Z(sub, compensated_integral(Kl, *sub), MatrixPath(sub->grid(), 1, 2, std::move(zd)));
        double lhs = bracket_values(canonical_lift(Z)).mat(n - 1)(0, 0);
        MatrixPath B = bracket_values(*sub);
        double rhs = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            Vec kk = Kl.value().vec(k);
            rhs += kk.dot((B.mat(k + 1) - B.mat(k)) * kk);
        }
        return std::abs(lhs - rhs);
    });
    ok = ok && iso.converged();
    d << "; isometry " << verdict(iso);

    // Rough exponential residual.
    SampledPath x1 = fixtures::brownian(1, 1 << 14, 1.0, 31);
    RoughLift L1 = RoughLift::left_point(x1);
    auto ps1 = PartitionSequence::dyadic(x1.grid(), 7, 14);
    ConvergenceReport rexp = over_levels(ps1, [&](std::size_t l) { return rough_exponential(L1.restrict(ps1[l])).residual; });
    ok = ok && rexp.converged();
    d << "; exponential " << verdict(rexp);
    return {ok, d.str()};
}

Outcome master_formula() {
    Market m = gbm_market(1 << 14, 18);
    ConvergenceReport rep = master_formula_check(fixtures::entropy_like(), m, PartitionSequence::dyadic(m.grid(), 7, 14));
    double constant = master_formula_sides(fixtures::constant_fn(2.0), m).gap;
    // Zero bracket: the drift term vanishes, so rhs = log G(mu_t)/G(mu_0) for any G, and the
    // two sides coincide for log-affine G. Curved G keeps an O(mesh^2) quadrature gap.
    Market z = zero_bracket_market(3000);
    double affine = master_formula_sides(fixtures::log_affine(Vec{{1.0, -2.0, 0.5}}), z).gap;
    ScalarFunction G = fixtures::entropy_like();
    MasterFormulaSides ent = master_formula_sides(G, z);
    double drift = 0;
    for (std::size_t k = 0; k < z.size(); ++k)
        drift = std::max(drift, std::abs(ent.rhs(k, 0) - std::log(G.f(z.weights().vec(k)) / G.f(z.weights().vec(0)))));
    return {rep.converged() && constant <= 1e-10 && affine <= 1e-10 && drift <= 1e-10,
            "entropy-like " + verdict(rep) + "; constant G gap " + fmt(constant) + "; zero bracket: log-affine gap " +
                fmt(affine) + ", drift term " + fmt(drift) + ", entropy-like quadrature gap " + fmt(ent.gap)};
}

Outcome nontriviality() {
    const double lambda = 0.45;
    const std::size_t n = 10, cells = 1000000;
    // Midpoint quadrature of mu^2 d mu^1 with the closed-form derivative of the path.
    double oracle = 0;
    const double two_pi = 2 * std::numbers::pi, dt = two_pi * n / cells;
    for (std::size_t j = 0; j < cells; ++j) {
        double t = (static_cast<double>(j) + 0.5) * dt;
        double k = std::floor(t / two_pi) + 1, u = t - (k - 1) * two_pi;
        double a = std::pow(k, -lambda) / 3;
        oracle += (1 + a * std::sin(u)) / 3 * (a * std::sin(u) / 3) * dt;
    }
    double closed = nontriviality_value(lambda, n);
    std::vector<double> rel;
    for (std::size_t npp : {256u, 1024u}) {
        SampledPath mu = nontriviality_path(lambda, n, npp);
        double v = left_point_sum(mu.component(1), mu.component(0), mu.grid())(mu.size() - 1, 0);
        rel.push_back(std::abs(v - oracle) / oracle);
    }
    return {rel[0] <= 0.01 && rel[1] <= 0.001 && std::abs(oracle - closed) <= 1e-6 * closed,
            "closed form " + fmt(closed) + ", oracle " + fmt(oracle) + ", relative error " + fmt(rel[0]) +
                " at 256/period, " + fmt(rel[1]) + " at 1024/period"};
}

Outcome mixture_identity() {
    Market m = gbm_market(2048, 6);
    QuadraticBasis B{3};
    std::vector<Vec> coeffs;
    for (double a : {-1.0, 0.0, 1.0})
        for (double b : {-1.0, 0.0, 1.0}) {
            Vec th = Vec::Zero(static_cast<Eigen::Index>(3 * B.size()));
            for (std::size_t i = 0; i < 3; ++i) {
                th[static_cast<Eigen::Index>(i * B.size() + B.linear_index(i))] = a;
                th[static_cast<Eigen::Index>(i * B.size() + B.quadratic_index(i, i))] = b;
            }
            coeffs.push_back(th);
        }
    FunctionFamily fam(FunctionFamily::Kind::Controlled, 3, coeffs, 10.0);
    double gap = mixture_wealth_identity(DiscreteMeasure<PortfolioPath>::uniform(fam.members(m)), m);
    return {gap <= 1e-10, "9 members, max |V^nu - sum w V| = " + fmt(gap)};
}

Outcome gradient_bound() {
    Market m = zero_bracket_market(4096);
    const double K = 1.0;
    auto fn = [](std::function<double(const Vec&)> f, VecFn g, MatFn h) { return ScalarFunction{f, g, h}; };
    Vec v{{0.5, -0.3, 0.2}};
    std::vector<ScalarFunction> pots = {
        fixtures::constant_fn(2.0),
        fn([=](const Vec& x) { return v.dot(x); }, [=](const Vec&) { return v; },
           [](const Vec&) { return Mat(Mat::Zero(3, 3)); }),
        fn([](const Vec& x) { return 0.5 * x.squaredNorm(); }, [](const Vec& x) { return x; },
           [](const Vec&) { return Mat(Mat::Identity(3, 3)); }),
        fn([](const Vec& x) { return 0.3 * std::sin(2 * x[0]) + 0.2 * std::cos(3 * x[1]); },
           [](const Vec& x) { return Vec{{0.6 * std::cos(2 * x[0]), -0.6 * std::sin(3 * x[1]), 0.0}}; },
           [](const Vec& x) {
               Mat h = Mat::Zero(3, 3);
               h(0, 0) = -1.2 * std::sin(2 * x[0]);
               h(1, 1) = -1.8 * std::cos(3 * x[1]);
               return h;
           }),
        fn([](const Vec& x) { return std::log(1 + x.squaredNorm()); },
           [](const Vec& x) { return Vec(2 * x / (1 + x.squaredNorm())); },
           [](const Vec& x) {
               double s = 1 + x.squaredNorm();
               return Mat(2 * Mat::Identity(3, 3) / s - 4 * x * x.transpose() / (s * s));
           }),
    };
    double worst = -1e300;
    bool all = true;
    for (const auto& f : pots) {
        GradientBoundReport r = gradient_bound_check(f, K, m);
        worst = std::max(worst, r.sup_logV);
        all = all && r.within_bound;
    }
    // Non-gradient witness F = (x2, 0, 0), |F| <= 1, on 20 periods of the oscillating path.
    Market w = market_from_weights(nontriviality_path(0.45, 20, 1024), LiftKind::Geometric);
    SampledPath lv = controlled_log_wealth([](const Vec& x) { return Vec{{x[1], 0.0, 0.0}}; },
                                           [](const Vec&) {
                                               Mat m = Mat::Zero(3, 3);
                                               m(0, 1) = 1.0;
                                               return m;
                                           },
                                           w);
    double sup_w = *std::max_element(lv.data().begin(), lv.data().end());
    bool witness = sup_w > 2 * K;
    Outcome o;
    o.pass = all && witness;
    o.detail = "5 potentials sup log V " + fmt(worst) + " <= 2K + 1e-6: " + (all ? "yes" : "no") +
               "; witness sup log V " + fmt(sup_w) + " (closed form " + fmt(nontriviality_value(0.45, 20)) +
               ") vs 2K = " + fmt(2 * K);
    o.known_unattainable = all && !witness;
    return o;
}

Outcome lambda_solver() {
    DiffusionSpec vs = vol_stabilized_spec(1.0, 0.5, 2.0);
    DiffusionSpec ps = polynomial_spec(0.15, 0.3, 0.2, 0.25, 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    auto centered = [](const Vec& a) { return Vec(a.array() - a.mean()); };
    double worst = 0;
    bool witness = true;
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        Vec x{{u(rng), u(rng), u(rng)}};
        x /= x.sum();
        for (const DiffusionSpec* s : {&vs, &ps}) {
            Vec a = solve_lambda(s->B, s->gamma, s->C, x);
            worst = std::max(worst, (centered(a) - centered(s->lambda(x))).cwiseAbs().maxCoeff());
        }
        // d lambda^1 / d x_3 = r / (gamma x_1) while d lambda^3 / d x_1 = 0.
        double d13 = ps.r / (ps.gamma * x[0]), d31 = 0.0;
        Vec e1 = Vec::Unit(3, 0) * h, e3 = Vec::Unit(3, 2) * h;
        double fd13 = (ps.lambda(x + e3)[0] - ps.lambda(x - e3)[0]) / (2 * h);
        double fd31 = (ps.lambda(x + e1)[2] - ps.lambda(x - e1)[2]) / (2 * h);
        witness = witness && d13 != d31 && std::abs(fd13 - d13) <= 1e-6 * d13 && fd31 == d31;
    }
    return {worst <= 1e-8 && witness,
            "max residual (modulo constants) " + fmt(worst) + " over 100 points x 2 specs; witness inequality " +
                (witness ? "holds" : "fails")};
}

Outcome alpha_star_recovery() {
    std::ostringstream d;
    bool ok = true;
    for (double alpha : {0.5, 1.0}) {
        DiffusionSpec spec = vol_stabilized_spec(alpha, 0.5);
        SimulationConfig s;
        s.step = 1e-3;
        s.horizon = 5.0;
        s.paths = 2000;
        s.seed = alpha == 0.5 ? 505 : 510;
        PathSimulator sim(spec, s);
        AlphaStarAccumulator acc(spec.B);
        for (std::size_t i = 0; i < s.paths; ++i) acc.add(sim.path(i));
        AlphaStar a = acc.result();
        ok = ok && std::abs(a.value - alpha) <= 0.1;
        d << (alpha == 0.5 ? "" : "; ") << "alpha " << alpha << " -> " << fmt(a.value);
    }
    return {ok, d.str() + " (2000 paths, T = 5)"};
}

Outcome figure1_dominance() {
    Figure1Result r = figure1_experiment(Figure1Config{});
    return {r.dominance && r.terminal_significant,
            "alpha* " + fmt(r.alpha.value) + ", min gap " + fmt(r.min_gap_se) + " stderr, terminal gap " +
                fmt(r.terminal_gap) + " (" + fmt(r.terminal_gap / r.terminal_gap_se) + " stderr)"};
}

Outcome ergodic_trend() {
    ErgodicReport r = ergodic_growth_rate(ErgodicConfig{});
    return {r.terminal_relative_gap <= 0.15 && r.cover_gap_lower,
            "T = 200: rate " + fmt(r.rate_log_optimal.back()) + " vs L-hat " + fmt(r.L_hat.back()) + " (relative " +
                fmt(r.terminal_relative_gap) + "); scaled Cover gap " + fmt(r.gap_scaled.front()) + " at T = 25, " +
                fmt(r.gap_scaled.back()) + " at T = 200; " + std::to_string(r.paths.size()) + " paths"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    fs::path dir = fs::temp_directory_path() / "rpspt_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto at = [&](const std::string& n) { return (dir / n).string(); };
    write_path_csv(at("bm.csv"), fixtures::brownian(2, 1 << 13, 1.0, 7));
    write_path_csv(at("prices.csv"), fixtures::gbm_prices(3, 2048, 1.0, 8));
    std::ofstream(at("entropy.json")) << R"({"kind": "generated", "G": {"type": "entropy", "c": 1}})";
    write_json(at("family.json"), to_json(ErgodicConfig::default_family()));
    std::ofstream(at("fig_config.json")) << R"({"paths": 100, "horizon": 1.0})";
    struct Case {
        std::string args;
        std::vector<std::string> outputs;
    };
    std::vector<Case> cases = {
        {"lift --input " + at("bm.csv") + " --levels 5 --out " + at("lift.csv"), {"lift.csv", "lift_summary.csv"}},
        {"wealth --market " + at("prices.csv") + " --portfolio " + at("entropy.json") + " --out " + at("w.csv"),
         {"w.csv", "w_master.csv", "w_master_report.csv"}},
        {"universal --market " + at("prices.csv") + " --family " + at("family.json") + " --T-grid 0.25,0.5,1 --out " +
             at("cover.csv"),
         {"cover.csv"}},
        {"figure1 --config " + at("fig_config.json") + " --seed 99 --out " + at("fig.csv"), {"fig.csv", "fig.json"}},
    };
    std::size_t files = 0;
    for (const auto& c : cases) {
        std::vector<std::string> first;
        for (int rep = 0; rep < 2; ++rep) {
            for (const auto& o : c.outputs) fs::remove(at(o));
            std::string cmd = std::string(RPSPT_CLI_PATH) + " " + c.args + " > /dev/null 2>&1";
            int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "command failed: " + c.args};
            for (std::size_t i = 0; i < c.outputs.size(); ++i) {
                std::string text = slurp(at(c.outputs[i]));
                if (text.empty()) return {false, "empty output " + c.outputs[i]};
                if (rep == 0)
                    first.push_back(text);
                else if (text != first[i])
                    return {false, c.outputs[i] + " differs between reruns"};
            }
        }
        files += c.outputs.size();
    }
    return {true, "4 commands, " + std::to_string(files) + " output files byte-identical across reruns"};
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {"chen-exactness", 0, chen_exactness},
        {"bracket-consistency", 0, bracket_consistency},
        {"riemann-sum-equivalence", 30, riemann_sum_equivalence},
        {"appendix-identities", 60, appendix_identities},
        {"master-formula", 0, master_formula},
        {"nontriviality-value", 5, nontriviality},
        {"mixture-wealth-identity", 0, mixture_identity},
        {"gradient-bound", 0, gradient_bound},
        {"lambda-solver", 0, lambda_solver},
        {"alpha-star-recovery", 180, alpha_star_recovery},
        {"figure1-dominance", 300, figure1_dominance},
        {"ergodic-trend", 600, ergodic_trend},
        {"determinism", 0, determinism},
    };
    int unexpected = 0, known = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = seconds_since(t0);
        std::string timing = fmt(secs) + " s";
        if (c.time_limit > 0) {
            timing += " (limit " + fmt(c.time_limit) + " s)";
            if (secs >= c.time_limit) {
                o.pass = false;
                o.known_unattainable = false;
            }
        }
        std::string tag = o.pass ? "PASS" : "FAIL";
        std::cout << tag << " " << c.name << ": " << o.detail << " [" << timing << "]";
        if (!o.pass && o.known_unattainable) std::cout << " [known-unattainable, see README]";
        std::cout << std::endl;
        if (!o.pass) (o.known_unattainable ? known : unexpected)++;
    }
    std::cout << criteria.size() - static_cast<std::size_t>(unexpected + known) << "/" << criteria.size()
              << " criteria pass; " << known << " known-unattainable, " << unexpected << " unexpected failures"
              << std::endl;
    return unexpected == 0 ? 0 : 1;
}

#pragma once

#include <vector>

#include "rpspt/models.hpp"
#include "rpspt/universal.hpp"

namespace rpspt {

struct Figure1Config {
    double p = 0.15, q = 0.3, r = 0.2;
    double gamma = 0.25;
    double C = 0.0;
    SimulationConfig sim = default_sim();

    static SimulationConfig default_sim();
    DiffusionSpec spec() const { return polynomial_spec(p, q, r, gamma, C); }
};

struct Figure1Result {
    // Curves "log-optimal", "alpha-optimal" and their paired "difference".
    MCResult curves;
    AlphaStar alpha;
    // Smallest difference mean / difference stderr over the grid (t > 0).
    double min_gap_se = 0;
    double terminal_gap = 0;
    double terminal_gap_se = 0;
    bool dominance = false;
    bool terminal_significant = false;
};

// Two passes over the same paths: alpha* from the polynomial B, then both wealth curves.
Figure1Result figure1_experiment(const Figure1Config& config);

struct ErgodicConfig {
    DiffusionSpec spec = vol_stabilized_spec(1.0, 0.5);
    SimulationConfig sim = default_sim();
    FunctionFamily family = default_family();
    // Sub-sampling step for the universal portfolio and the growth clock.
    double obs_step = 0.02;
    std::vector<double> horizons{25.0, 50.0, 100.0, 200.0};

    static SimulationConfig default_sim();
    // F^i = a x_i + b x_i^2, a in {-8, -4, 0}, b in {-4, 0, 4}.
    static FunctionFamily default_family();
};

struct ErgodicPath {
    // (1/T) 1/2 int lambda^T c lambda, (1/T) log V-hat and (1/T) log V^nu per horizon.
    std::vector<double> L_hat;
    std::vector<double> rate_log_optimal;
    std::vector<double> rate_universal;
    CoverTrajectory cover;
};

struct ErgodicReport {
    std::vector<double> horizons;
    std::vector<ErgodicPath> paths;
    // Ensemble means per horizon.
    std::vector<double> L_hat, rate_log_optimal, rate_universal, gap_scaled;
    // |rate_log_optimal - L_hat| / |L_hat| at the last horizon.
    double terminal_relative_gap = 0;
    // Mean scaled Cover gap lower at the last horizon than at the first.
    bool cover_gap_lower = false;
    // Log-optimal minus universal rate, non-increasing across horizons.
    bool universal_gap_shrinks = false;
};

ErgodicReport ergodic_growth_rate(const ErgodicConfig& config);

}  // namespace rpspt

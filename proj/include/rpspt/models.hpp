#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpspt/path.hpp"

namespace rpspt {

// c(x) = gamma (diag x - x x^T)
Mat diffusion_matrix(const Vec& x, double gamma);

// Market weights diffusion with covariance c and drift c(x) lambda(x) = B x.
struct DiffusionSpec {
    enum class Kind { VolStabilized, Polynomial, Custom };

    Kind kind = Kind::Custom;
    std::size_t d = 0;
    double gamma = 0;
    double C = 0;
    double alpha = 0;
    double p = 0, q = 0, r = 0;
    Mat B;
    // Closed-form lambda including C; empty for custom specs.
    std::function<Vec(const Vec&)> lambda_closed;

    Mat c(const Vec& x) const { return diffusion_matrix(x, gamma); }
    // Closed form when available, else the least-squares solve.
    Vec lambda(const Vec& x) const;
    // Throws ParameterError naming the violated inequality.
    void validate() const;

    static std::string kind_name(Kind k);
    static Kind parse_kind(const std::string& s);
};

// B^{ij} = (1+alpha)/2 (1 - d delta_ij), lambda^i = (1+alpha)/(2 gamma x^i) + C.
DiffusionSpec vol_stabilized_spec(double alpha, double gamma, double C = 0.0, std::size_t d = 3);
// d = 3, B = [[-p, q, r], [p, -q, 0], [0, 0, -r]].
DiffusionSpec polynomial_spec(double p, double q, double r, double gamma, double C = 0.0);
DiffusionSpec custom_spec(Mat B, double gamma, double C = 0.0);

// Least squares c(x) lambda = B x on the complement of 1, plus C 1.
Vec solve_lambda(const Mat& B, double gamma, double C, const Vec& x);

// pi^i = mu^i (lambda^i + 1 - mu . lambda)
Vec log_optimal_portfolio(const DiffusionSpec& spec, const Vec& mu);
// pi^i = kappa + mu^i (1 - d kappa), kappa = (1+alpha)/(2 gamma): log-optimal for the vol-stabilized spec.
Vec vol_stabilized_portfolio(double alpha, double gamma, const Vec& mu);

struct SimulationConfig {
    double step = 1e-3;
    double horizon = 1.0;
    std::size_t paths = 1;
    std::uint64_t seed = 0;
    double epsilon = 1e-4;
    // Fixed start; empty draws a uniform interior point per path.
    std::optional<Vec> initial;

    std::size_t steps() const;
    TimeGrid grid() const { return TimeGrid::uniform(horizon, steps()); }
    void validate(std::size_t d) const;
};

// Euler-Maruyama weights paths, one independent RNG stream per (seed, path index).
class PathSimulator {
public:
    PathSimulator(DiffusionSpec spec, SimulationConfig config);

    const DiffusionSpec& spec() const { return spec_; }
    const SimulationConfig& config() const { return config_; }
    const TimeGrid& grid() const { return grid_; }
    SampledPath path(std::size_t index) const;

private:
    DiffusionSpec spec_;
    SimulationConfig config_;
    TimeGrid grid_;
};

std::vector<SampledPath> simulate_market_weights(const DiffusionSpec& spec, const SimulationConfig& config);

// Renormalize to sum 1, then clamp into [eps, 1 - eps] moving mass proportionally.
void project_to_simplex(Vec& x, double eps);

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

using PortfolioMap = std::function<Vec(const Vec&)>;

// Relative log wealth on the path grid: sum of h.dmu - (h.dmu)^2 / 2 with h = pi(mu)/mu at the left node.
SampledPath euler_log_wealth(const SampledPath& mu, const PortfolioMap& pi);

// Left-point running integral of 1/2 lambda^T c lambda.
SampledPath half_growth_integral(const DiffusionSpec& spec, const SampledPath& mu);

// Running mean and standard error per grid node, fixed summation order.
class MeanAccumulator {
public:
    explicit MeanAccumulator(std::size_t nodes = 0) : sum_(nodes, 0.0), sq_(nodes, 0.0) {}
    void add(const SampledPath& path);
    void add(const std::vector<double>& values);
    std::size_t count() const { return n_; }
    std::vector<double> mean() const;
    std::vector<double> se() const;

private:
    std::vector<double> sum_, sq_;
    std::size_t n_ = 0;
};

struct MCCurve {
    std::string name;
    std::vector<double> mean;
    std::vector<double> se;
};

struct MCResult {
    TimeGrid grid;
    std::vector<MCCurve> curves;
    // Named scalar outputs (alpha*, gaps in standard errors, ...).
    std::vector<std::pair<std::string, double>> scalars;

    const MCCurve& curve(const std::string& name) const;
    double scalar(const std::string& name) const;
    // t,curve,mean,stderr
    void write_csv(std::ostream& out) const;
};

// Integrals for alpha* along one path: int (1/mu)^T B mu ds and int sum 1/mu^i ds - d^2 T.
struct AlphaStarTerms {
    double numerator = 0;
    double denominator = 0;
};
AlphaStarTerms alpha_star_terms(const SampledPath& mu, const Mat& B);

struct AlphaStar {
    double value = 0;
    double numerator = 0;
    double denominator = 0;
    double denominator_stderr = 0;
    std::size_t paths = 0;
};
class AlphaStarAccumulator {
public:
    explicit AlphaStarAccumulator(Mat B) : B_(std::move(B)) {}
    void add(const SampledPath& mu);
    // Throws IllPosedError when the denominator is within 2 standard errors of 0.
    AlphaStar result() const;

private:
    Mat B_;
    std::vector<double> num_, den_;
};
AlphaStar alpha_star(const std::vector<SampledPath>& ensemble, const Mat& B);

// Curves "half_integral" (1/2 int lambda^T c lambda) and "log_wealth" (pathwise log V-hat) with the
// scalars "terminal_route_gap_se" and "max_route_gap_se", |difference| in paired standard errors at T and
// over the grid. The realized-square wealth step is biased by O(dt) against the integral.
MCResult expected_log_optimal(const DiffusionSpec& spec, const SimulationConfig& config);

struct StructureReport {
    std::vector<double> integral;
    std::size_t non_finite = 0;
};
// int_0^T lambda^T c lambda ds per path.
StructureReport structure_condition_report(const DiffusionSpec& spec, const std::vector<SampledPath>& ensemble);

}  // namespace rpspt

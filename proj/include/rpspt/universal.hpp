#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpspt/market.hpp"
#include "rpspt/pvariation.hpp"

namespace rpspt {

// Basis [1, x_i, x_i x_j (i <= j)] on R^d.
struct QuadraticBasis {
    std::size_t d = 0;
    std::size_t size() const { return 1 + d + d * (d + 1) / 2; }
    std::size_t linear_index(std::size_t i) const { return 1 + i; }
    // Index of x_i x_j, any order.
    std::size_t quadratic_index(std::size_t i, std::size_t j) const;
    Vec value(const Vec& x) const;
    // size() x d
    Mat gradient(const Vec& x) const;
    // Hessian of basis function b, d x d; constant in x.
    Mat hessian(std::size_t b) const;
    std::string describe() const;
};

// Matrix-valued vector field f: R^d -> R^{d x d} with Df[j] = d f / d y^j.
struct VectorField {
    std::function<Mat(const Vec&)> f;
    std::function<std::vector<Mat>(const Vec&)> Df;
};

// Finite grid of coefficient vectors over the quadratic basis.
//   controlled:          F^i(x) = theta[i*nb + b] phi_b(x)
//   generated:           log G(x) = theta . phi(x)
//   controlled-equation: f^{ia}(y) = theta[(i*d + a)*nb + b] phi_b(y), started at xi0
class FunctionFamily {
public:
    enum class Kind { Controlled, Generated, ControlledEquation };

    FunctionFamily(Kind kind, std::size_t d, std::vector<Vec> coefficients, double K, double alpha = 1.0);

    Kind kind() const { return kind_; }
    std::size_t dim() const { return basis_.d; }
    const QuadraticBasis& basis() const { return basis_; }
    const std::vector<Vec>& coefficients() const { return coeffs_; }
    std::size_t size() const { return coeffs_.size(); }
    std::size_t coefficient_length() const;
    double K() const { return K_; }
    double alpha() const { return alpha_; }
    const Vec& xi0() const { return xi0_; }
    void set_xi0(const Vec& xi0);

    // F and DF of the controlled form (generated: F = grad log G).
    Vec F(const Vec& theta, const Vec& x) const;
    Mat DF(const Vec& theta, const Vec& x) const;
    double G(const Vec& theta, const Vec& x) const;
    VectorField field(const Vec& theta) const;

    // Max of value, first and second derivative sup norms on the sample mesh.
    double c2_proxy(const Vec& theta) const;
    // Throws ParameterError when a member breaks the cap (or G < 1/K for generated).
    void validate() const;

    PortfolioPath portfolio(const Vec& theta, const Market& market) const;
    PortfolioPath member(std::size_t i, const Market& market) const { return portfolio(coeffs_[i], market); }
    std::vector<PortfolioPath> members(const Market& market) const;

    static std::string kind_name(Kind k);
    static Kind parse_kind(const std::string& s);

private:
    Kind kind_;
    QuadraticBasis basis_;
    std::vector<Vec> coeffs_;
    double K_, alpha_;
    Vec xi0_;
};

// Points of the closed simplex with coordinates in multiples of 1/(per_axis - 1).
std::vector<Vec> simplex_mesh(std::size_t d, std::size_t per_axis = 21);

// Relative wealth by the second-order step
// V_{k+1} = V_k (1 + h.dmu + sum (h'^{ia} + h^i h^a) M^{ai}), h = pi/mu; returned as log V.
SampledPath log_wealth_recursion(const PortfolioPath& pi, const Market& market);

struct UniversalResult {
    PortfolioPath portfolio;
    // log V of each member from the shared recursion.
    std::vector<SampledPath> member_log_wealth;
    // log sum_i w_i V_i
    SampledPath mixture_log_wealth;
};

// pi^nu = sum w_i V_i pi_i / sum w_i V_i with the matching derivative.
UniversalResult universal_portfolio(const DiscreteMeasure<PortfolioPath>& m, const Market& market);
UniversalResult universal_portfolio(const FunctionFamily& family, const std::vector<double>& weights,
                                    const Market& market);
// max_t |V^{pi^nu}_t - sum_i w_i V^i_t| with V^{pi^nu} from the recursion.
double mixture_wealth_identity(const DiscreteMeasure<PortfolioPath>& m, const Market& market);

struct Retrospective {
    std::size_t index = 0;
    Vec theta;
    double log_value = 0;
    bool refined = false;
};
// Argmax of log V_T over members, ties to the lowest index; `refine` runs one
// coordinate-descent pass with step halving that stays within the K cap.
Retrospective best_retrospective(const FunctionFamily& family, const Market& market, double T, bool refine = false);

struct ClockValues {
    double T = 0;
    double mu_pvar = 0;
    double area_pvar = 0;
    double bracket_trace = 0;
    double xi = 0;
    double lambda = 0;
};
ClockValues growth_clock(const Market& market, double T);
// Same values at each requested node, sharing one prefix pass.
std::vector<ClockValues> growth_clock_series(const Market& market, const std::vector<std::size_t>& nodes);

struct CoverRow {
    double T = 0;
    double log_vstar = 0;
    double log_vuniversal = 0;
    double lambda = 0;
    double gap_scaled = 0;
    std::size_t winner = 0;
};
struct CoverTrajectory {
    std::vector<CoverRow> rows;
    // Terminal below initial and negative least-squares slope.
    bool decreasing() const;
    void write_csv(std::ostream& out) const;
};
CoverTrajectory cover_gap_trajectory(const FunctionFamily& family, const std::vector<double>& weights,
                                     const Market& market, const std::vector<double>& horizons);

// Seminorm p_T = |h_0| + |h'_0| + ||h'||_{q',[0,T]} + ||R^h||_{r',[0,T]} for h = pi/mu,
// 1/r' = 1/p + 1/q'. The prefix form returns the value for every T node.
double seminorm(const PortfolioPath& pi, const Market& market, double T, double q_prime);
std::vector<double> seminorm_prefix(const ControlledPath& h, double q_prime);

struct MetricSchedule {
    ControlFunction c;
    double M = 0;
    double q = kDefaultP;
    double r = kDefaultP / 2;
    double q_prime = kDefaultP + 0.5;
    std::function<double(double)> beta = [](double N) { return N; };
};
// sup_N p_N(pi - phi) / (beta_N gamma_N) over integer horizons N (or T itself when T < 1).
double metric_d_beta(const PortfolioPath& pi, const PortfolioPath& phi, const Market& market, const MetricSchedule& s);

struct AdmissibilityReport {
    double initial = 0;
    double sup_deriv_ratio = 0;
    double sup_remainder_ratio = 0;
    std::size_t pairs = 0;
    bool admissible = false;
};
// All node pairs up to `all_pairs_limit` nodes, stratified starts beyond.
AdmissibilityReport admissibility_check(const PortfolioPath& pi, const Market& market, double M,
                                        const ControlFunction& c, double q = kDefaultP,
                                        std::size_t all_pairs_limit = 2000);
// Smallest scale C making every portfolio admissible for C * base.
double fit_control_scale(const std::vector<PortfolioPath>& pis, const Market& market, const ControlFunction& base,
                         double q = kDefaultP, std::size_t all_pairs_limit = 2000);

// Weights path on the 3-simplex with perturbation amplitude k^{-lambda}/3 in period k.
SampledPath nontriviality_path(double lambda, std::size_t periods, std::size_t nodes_per_period = 256,
                               double p = kDefaultP);
// (pi/81) sum_{k<=n} k^{-2 lambda}
double nontriviality_value(double lambda, std::size_t periods);

struct GradientBoundReport {
    SampledPath logV;
    double sup_logV = 0;
    // sup_t |log V_t - (f(mu_t) - f(mu_0))|
    double endpoint_gap = 0;
    double grad_sup = 0;
    bool within_bound = false;
};
// Requires a zero-bracket market and |grad f| <= K on the sample mesh.
GradientBoundReport gradient_bound_check(const ScalarFunction& f, double K, const Market& market);
// log V of pi^F without the gradient precondition, for non-gradient witnesses.
SampledPath controlled_log_wealth(const VecFn& F, const MatFn& DF, const Market& market);

// Y_{k+1} = Y_k + f(Y_k) dmu + sum_{j,a,b} d_j f^{ib} f^{ja} M^{ab}; pi = mu (Y + (1 - mu.Y) 1).
PortfolioPath controlled_equation_portfolio(const VectorField& f, const Vec& xi0, const Market& market);

}  // namespace rpspt

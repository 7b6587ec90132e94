#pragma once

#include <string>

#include "rpspt/controlled.hpp"
#include "rpspt/identities.hpp"

namespace rpspt {

// Weights below this abort market-side computations.
inline constexpr double kBoundaryWeight = 1e-10;

enum class LiftKind { LeftPoint, Geometric };

// Prices with their lift, the market weights with their own lift, the price bracket and the
// cumulative covariance a_{0,t}, whose cell increments are d[S]^{ij} / (S^i S^j) at the left node.
class Market {
public:
    // Price and weight lifts must live on the prices' grid.
    Market(SampledPath prices, LiftPtr price_lift, SampledPath weights, LiftPtr weights_lift);

    const SampledPath& prices() const { return prices_; }
    const RoughLift& price_lift() const { return *price_lift_; }
    const LiftPtr& price_lift_ptr() const { return price_lift_; }
    const SampledPath& weights() const { return weights_; }
    const RoughLift& weights_lift() const { return *weights_lift_; }
    const LiftPtr& weights_lift_ptr() const { return weights_lift_; }
    const MatrixPath& price_bracket() const { return bracket_; }
    const MatrixPath& covariance() const { return cov_; }
    Mat cov_cell(std::size_t k) const { return cov_.mat(k + 1) - cov_.mat(k); }

    const TimeGrid& grid() const { return prices_.grid(); }
    std::size_t size() const { return prices_.size(); }
    std::size_t dim() const { return prices_.dim(); }

    // W^mu_t = sum S_t / sum S_0.
    SampledPath market_wealth() const;
    // Same market observed on a sub-grid; lifts restrict exactly, the covariance is rebuilt.
    Market restrict(const TimeGrid& sub) const;

private:
    SampledPath prices_;
    LiftPtr price_lift_;
    SampledPath weights_;
    LiftPtr weights_lift_;
    MatrixPath bracket_;
    MatrixPath cov_;
};

// mu^i = S^i / sum_j S^j with both lifts of the requested kind.
Market market_weights(const SampledPath& prices, LiftKind kind = LiftKind::LeftPoint, double p = kDefaultP);
// A market quoted directly in weights: prices = mu, so W^mu = 1.
Market market_from_weights(const SampledPath& weights, LiftKind kind = LiftKind::LeftPoint, double p = kDefaultP);

struct PortfolioSpec {
    std::string kind;
    std::string label;
};

// Simplex-valued controlled path against the weights lift.
class PortfolioPath {
public:
    PortfolioPath(PortfolioSpec spec, ControlledPath values);

    const PortfolioSpec& spec() const { return spec_; }
    const ControlledPath& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    std::size_t dim() const { return values_.dim(); }
    PortfolioPath restrict(LiftPtr sub) const;

private:
    PortfolioSpec spec_;
    ControlledPath values_;
};

// Largest |sum_i pi^i - 1| over the nodes.
double simplex_residual(const SampledPath& pi);

PortfolioPath market_portfolio(const Market& market);
PortfolioPath constant_portfolio(const Market& market, const Vec& weights);
// pi^i = mu^i (F^i(mu) + 1 - mu . F(mu)).
PortfolioPath functionally_controlled(const VecFn& F, const MatFn& DF, const Market& market);
// F = grad log G.
PortfolioPath functionally_generated(const ScalarFunction& G, const Market& market);

// pi / mu as a controlled path against the weights lift.
ControlledPath relative_ratio(const PortfolioPath& pi, const Market& market);

// Cumulative tau^pi_{0,t}; cell (pi - e_i)^T a (pi - e_j) at the left node.
MatrixPath relative_covariance(const PortfolioPath& pi, const Market& market);
// Cumulative 1/2 (sum pi^i a^ii - sum pi^i pi^j a^ij).
SampledPath excess_growth(const PortfolioPath& pi, const Market& market);

struct WealthRecord {
    SampledPath W;
    SampledPath V;
    SampledPath logV;
    // log W = int_term - cov_term
    SampledPath int_term;
    SampledPath cov_term;
    void write_csv(std::ostream& out) const;
};

// Price route: log W = int pi/S dS - 1/2 sum int pi^i pi^j a^ij, V = W / W^mu.
WealthRecord wealth(const PortfolioPath& pi, const Market& market);
// Weights route: int pi/mu dmu - 1/2 sum int pi^i pi^j tau^mu_ij.
SampledPath log_relative_wealth(const PortfolioPath& pi, const Market& market);

struct MasterFormulaSides {
    SampledPath lhs;
    SampledPath rhs;
    double gap = 0;
};
// lhs = log V^{pi^G}; rhs = log G(mu_t)/G(mu_0) - 1/2 sum int (d_ij G / G) mu^i mu^j tau^mu_ij.
MasterFormulaSides master_formula_sides(const ScalarFunction& G, const Market& market);
// Sup gap of the two sides on every partition level.
ConvergenceReport master_formula_check(const ScalarFunction& G, const Market& market,
                                       const PartitionSequence& partitions);

}  // namespace rpspt

#include "rpspt/market.hpp"

#include <algorithm>
#include <cmath>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

using Idx = Eigen::Index;

LiftPtr make_lift(const SampledPath& x, LiftKind kind, double p) {
    return share(kind == LiftKind::Geometric ? RoughLift::geometric(x, p) : RoughLift::left_point(x, p));
}

void check_weights(const SampledPath& mu) {
    for (std::size_t k = 0; k < mu.size(); ++k) {
        double total = 0;
        for (std::size_t i = 0; i < mu.dim(); ++i) {
            if (!(mu(k, i) >= kBoundaryWeight))
                throw BoundaryError("market weight " + format_double(mu(k, i)) + " below the boundary floor at node " +
                                    std::to_string(k));
            total += mu(k, i);
        }
        if (std::abs(total - 1.0) > 1e-12) throw DomainError("market weights do not sum to 1 at node " + std::to_string(k));
    }
}

// Cumulative sum of the cells d[S]^{ij} / (S^i S^j) at the left node.
MatrixPath cumulative_covariance(const SampledPath& S, const MatrixPath& B) {
    std::size_t n = S.size(), d = S.dim(), dd = d * d;
    std::vector<double> out(n * dd, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double* b0 = B.flat().row(k);
        const double* b1 = B.flat().row(k + 1);
        const double* s = S.row(k);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                std::size_t e = i * d + j;
                out[(k + 1) * dd + e] = out[k * dd + e] + (b1[e] - b0[e]) / (s[i] * s[j]);
            }
    }
    return MatrixPath(S.grid(), d, d, std::move(out));
}

void check_portfolio_market(const PortfolioPath& pi, const Market& market) {
    if (pi.dim() != market.dim()) throw PortfolioError("portfolio and market differ in dimension");
    const RoughLift& ref = pi.values().lift();
    if (&ref != &market.weights_lift() && !ref.same_as(market.weights_lift()))
        throw ReferenceMismatchError("portfolio is not controlled against this market's weights");
}

// Running sum over cells of f(k, a_cell).
template <class F>
SampledPath cell_sum(const Market& market, F f) {
    std::vector<double> out(market.size(), 0.0);
    for (std::size_t k = 0; k + 1 < market.size(); ++k) out[k + 1] = out[k] + f(k, market.cov_cell(k));
    return SampledPath(market.grid(), 1, std::move(out));
}

// Columns pi - e_j.
Mat shifted_columns(const Vec& pi) {
    Idx d = pi.size();
    return pi * Vec::Ones(d).transpose() - Mat::Identity(d, d);
}

}  // namespace

Market::Market(SampledPath prices, LiftPtr price_lift, SampledPath weights, LiftPtr weights_lift)
    : prices_(std::move(prices)), price_lift_(std::move(price_lift)), weights_(std::move(weights)),
      weights_lift_(std::move(weights_lift)) {
    if (!price_lift_ || !weights_lift_) throw ParameterError("market needs both lifts");
    for (std::size_t k = 0; k < prices_.size(); ++k)
        for (std::size_t i = 0; i < prices_.dim(); ++i)
            if (!(prices_(k, i) > 0))
                throw DomainError("non-positive price " + format_double(prices_(k, i)) + " at node " + std::to_string(k));
    if (!weights_.grid().same_as(prices_.grid()) || !price_lift_->grid().same_as(prices_.grid()) ||
        !weights_lift_->grid().same_as(prices_.grid()))
        throw GridAlignmentError("market paths and lifts use different grids");
    if (weights_.dim() != prices_.dim() || price_lift_->dim() != prices_.dim() || weights_lift_->dim() != prices_.dim())
        throw ParameterError("market paths and lifts differ in dimension");
    check_weights(weights_);
    bracket_ = bracket_values(*price_lift_);
    cov_ = cumulative_covariance(prices_, bracket_);
}

SampledPath Market::market_wealth() const {
    std::vector<double> w(size());
    double s0 = prices_.vec(0).sum();
    for (std::size_t k = 0; k < size(); ++k) w[k] = prices_.vec(k).sum() / s0;
    return SampledPath(grid(), 1, std::move(w));
}

Market Market::restrict(const TimeGrid& sub) const {
    LiftPtr pl = share(price_lift_->restrict(sub));
    LiftPtr wl = price_lift_ == weights_lift_ ? pl : share(weights_lift_->restrict(sub));
    return Market(prices_.restrict(sub), std::move(pl), weights_.restrict(sub), std::move(wl));
}

Market market_weights(const SampledPath& prices, LiftKind kind, double p) {
    std::size_t n = prices.size(), d = prices.dim();
    std::vector<double> mu(n * d);
    for (std::size_t k = 0; k < n; ++k) {
        double total = 0;
        for (std::size_t i = 0; i < d; ++i) {
            if (!(prices(k, i) > 0))
                throw DomainError("non-positive price " + format_double(prices(k, i)) + " at node " + std::to_string(k));
            total += prices(k, i);
        }
        for (std::size_t i = 0; i < d; ++i) mu[k * d + i] = prices(k, i) / total;
    }
    SampledPath weights(prices.grid(), d, std::move(mu));
    LiftPtr pl = make_lift(prices, kind, p);
    LiftPtr wl = make_lift(weights, kind, p);
    return Market(prices, std::move(pl), std::move(weights), std::move(wl));
}

Market market_from_weights(const SampledPath& weights, LiftKind kind, double p) {
    LiftPtr l = make_lift(weights, kind, p);
    return Market(weights, l, weights, l);
}

PortfolioPath::PortfolioPath(PortfolioSpec spec, ControlledPath values) : spec_(std::move(spec)), values_(std::move(values)) {
    const SampledPath& v = values_.value();
    for (std::size_t k = 0; k < v.size(); ++k) {
        double total = 0, mass = 0;
        for (std::size_t i = 0; i < v.dim(); ++i) {
            total += v(k, i);
            mass += std::abs(v(k, i));
        }
        if (std::abs(total - 1.0) > 1e-12 * std::max(1.0, mass))
            throw PortfolioError("portfolio weights sum to " + format_double(total) + " at node " + std::to_string(k));
    }
}

PortfolioPath PortfolioPath::restrict(LiftPtr sub) const { return PortfolioPath(spec_, values_.restrict(std::move(sub))); }

double simplex_residual(const SampledPath& pi) {
    double worst = 0;
    for (std::size_t k = 0; k < pi.size(); ++k) worst = std::max(worst, std::abs(pi.vec(k).sum() - 1.0));
    return worst;
}

PortfolioPath market_portfolio(const Market& market) {
    return PortfolioPath({"market", "market"}, ControlledPath::identity(market.weights_lift_ptr()));
}

PortfolioPath constant_portfolio(const Market& market, const Vec& weights) {
    if (static_cast<std::size_t>(weights.size()) != market.dim())
        throw PortfolioError("constant portfolio has the wrong dimension");
    return PortfolioPath({"constant", "constant"}, ControlledPath::constant(market.weights_lift_ptr(), weights));
}

PortfolioPath functionally_controlled(const VecFn& F, const MatFn& DF, const Market& market) {
    auto value = [&](const Vec& x) {
        Vec f = F(x);
        return Vec(x.cwiseProduct(f + Vec::Constant(x.size(), 1.0 - x.dot(f))));
    };
    auto deriv = [&](const Vec& x) {
        Vec f = F(x);
        Mat J = DF(x);
        Idx d = x.size();
        // d_a pi^i = delta_ia (F^i + 1 - x.F) + x^i (d_a F^i - F^a - sum_k x^k d_a F^k)
        Vec xJ = J.transpose() * x;
        Mat out(d, d);
        for (Idx i = 0; i < d; ++i)
            for (Idx a = 0; a < d; ++a)
                out(i, a) = (i == a ? f[i] + 1.0 - x.dot(f) : 0.0) + x[i] * (J(i, a) - f[a] - xJ[a]);
        return out;
    };
    return PortfolioPath({"controlled", "functionally controlled"},
                         ControlledPath::of_function(market.weights_lift_ptr(), value, deriv));
}

PortfolioPath functionally_generated(const ScalarFunction& G, const Market& market) {
    auto positive = [&](const Vec& x) {
        double g = G.f(x);
        if (!(g > 0)) throw DomainError("generating function is not positive at a visited point");
        return g;
    };
    VecFn F = [&](const Vec& x) { return Vec(G.grad(x) / positive(x)); };
    MatFn DF = [&](const Vec& x) {
        double g = positive(x);
        Vec lg = G.grad(x) / g;
        return Mat(G.hess(x) / g - lg * lg.transpose());
    };
    PortfolioPath pi = functionally_controlled(F, DF, market);
    return PortfolioPath({"generated", "functionally generated"}, pi.values());
}

ControlledPath relative_ratio(const PortfolioPath& pi, const Market& market) {
    check_portfolio_market(pi, market);
    ControlledPath recip = ControlledPath::of_function(
        pi.values().ref(), [](const Vec& x) { return Vec(x.cwiseInverse()); },
        [](const Vec& x) { return Mat(Vec(-x.array().square().inverse()).asDiagonal()); });
    return product(pi.values(), recip);
}

MatrixPath relative_covariance(const PortfolioPath& pi, const Market& market) {
    check_portfolio_market(pi, market);
    std::size_t n = market.size(), d = market.dim(), dd = d * d;
    std::vector<double> out(n * dd, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Mat P = shifted_columns(pi.values().value().vec(k));
        Mat tau = P.transpose() * market.cov_cell(k) * P;
        for (std::size_t e = 0; e < dd; ++e) out[(k + 1) * dd + e] = out[k * dd + e] + tau.data()[e];
    }
    return MatrixPath(market.grid(), d, d, std::move(out));
}

SampledPath excess_growth(const PortfolioPath& pi, const Market& market) {
    check_portfolio_market(pi, market);
    const SampledPath& v = pi.values().value();
    return cell_sum(market, [&](std::size_t k, const Mat& a) {
        Vec p = v.vec(k);
        return 0.5 * (p.dot(a.diagonal()) - p.dot(a * p));
    });
}

void WealthRecord::write_csv(std::ostream& out) const {
    out << "t,W,V,logV,int_term,cov_term\n";
    for (std::size_t k = 0; k < W.size(); ++k)
        out << format_double(W.time(k)) << ',' << format_double(W(k, 0)) << ',' << format_double(V(k, 0)) << ','
            << format_double(logV(k, 0)) << ',' << format_double(int_term(k, 0)) << ',' << format_double(cov_term(k, 0))
            << '\n';
}

WealthRecord wealth(const PortfolioPath& pi, const Market& market) {
    check_portfolio_market(pi, market);
    std::size_t n = market.size(), d = market.dim();
    const SampledPath& S = market.prices();
    const SampledPath& mu = market.weights();
    const SampledPath& pv = pi.values().value();
    // h = pi / S against the price lift; pi' moves to prices through d mu^a / d S^j = (delta_aj - mu^a) / sum S.
    std::vector<double> hv(n * d), hd(n * d * d);
    for (std::size_t k = 0; k < n; ++k) {
        Vec s = S.vec(k), m = mu.vec(k), p = pv.vec(k);
        Mat J = (Mat::Identity(d, d) - m * Vec::Ones(d).transpose()) / s.sum();
        Mat dS = pi.values().deriv().mat(k) * J;
        for (std::size_t i = 0; i < d; ++i) {
            hv[k * d + i] = p[i] / s[i];
            for (std::size_t j = 0; j < d; ++j)
                hd[(k * d + i) * d + j] = dS(i, j) / s[i] - (i == j ? p[i] / (s[i] * s[i]) : 0.0);
        }
    }
    ControlledPath h(market.price_lift_ptr(), SampledPath(market.grid(), d, std::move(hv)),
                     MatrixPath(market.grid(), d, d, std::move(hd)));
    WealthRecord rec;
    rec.int_term = compensated_integral(h, market.price_lift());
    rec.cov_term = cell_sum(market, [&](std::size_t k, const Mat& a) {
        Vec p = pv.vec(k);
        return 0.5 * p.dot(a * p);
    });
    SampledPath wm = market.market_wealth();
    std::vector<double> W(n), V(n), L(n);
    for (std::size_t k = 0; k < n; ++k) {
        double lw = rec.int_term(k, 0) - rec.cov_term(k, 0);
        W[k] = std::exp(lw);
        L[k] = lw - std::log(wm(k, 0));
        V[k] = std::exp(L[k]);
    }
    rec.W = SampledPath(market.grid(), 1, std::move(W));
    rec.V = SampledPath(market.grid(), 1, std::move(V));
    rec.logV = SampledPath(market.grid(), 1, std::move(L));
    return rec;
}

SampledPath log_relative_wealth(const PortfolioPath& pi, const Market& market) {
    ControlledPath h = relative_ratio(pi, market);
    SampledPath I = compensated_integral(h, market.weights_lift());
    const SampledPath& mu = market.weights();
    const SampledPath& pv = pi.values().value();
    SampledPath corr = cell_sum(market, [&](std::size_t k, const Mat& a) {
        Mat P = shifted_columns(mu.vec(k));
        Vec p = pv.vec(k);
        return 0.5 * p.dot(P.transpose() * a * P * p);
    });
    std::vector<double> out(market.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = I(k, 0) - corr(k, 0);
    return SampledPath(market.grid(), 1, std::move(out));
}

MasterFormulaSides master_formula_sides(const ScalarFunction& G, const Market& market) {
    MasterFormulaSides res;
    res.lhs = log_relative_wealth(functionally_generated(G, market), market);
    const SampledPath& mu = market.weights();
    double logG0 = std::log(G.f(mu.vec(0)));
    SampledPath drift = cell_sum(market, [&](std::size_t k, const Mat& a) {
        Vec m = mu.vec(k);
        Mat P = shifted_columns(m);
        Mat tau = P.transpose() * a * P;
        Mat H = G.hess(m) / G.f(m);
        return 0.5 * (H.array() * (m * m.transpose()).array() * tau.array()).sum();
    });
    std::vector<double> rhs(market.size());
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        rhs[k] = std::log(G.f(mu.vec(k))) - logG0 - drift(k, 0);
        res.gap = std::max(res.gap, std::abs(rhs[k] - res.lhs(k, 0)));
    }
    res.rhs = SampledPath(market.grid(), 1, std::move(rhs));
    return res;
}

ConvergenceReport master_formula_check(const ScalarFunction& G, const Market& market,
                                       const PartitionSequence& partitions) {
    ConvergenceReport rep;
    for (std::size_t l = 0; l < partitions.size(); ++l)
        rep.add(partitions.level_id(l), partitions[l].mesh(), master_formula_sides(G, market.restrict(partitions[l])).gap);
    return rep;
}

}  // namespace rpspt

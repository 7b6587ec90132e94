#include "rpspt/universal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

using Idx = Eigen::Index;

double sup_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
double sup_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Sub-grid [0, t_end] of `grid`.
TimeGrid prefix_grid(const TimeGrid& grid, std::size_t end) {
    std::vector<double> t(grid.times().begin(), grid.times().begin() + static_cast<std::ptrdiff_t>(end + 1));
    return TimeGrid(std::move(t));
}

double log_sum_exp(const std::vector<double>& x) {
    double m = -std::numeric_limits<double>::infinity();
    for (double v : x) m = std::max(m, v);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

// Value and derivative of pi = mu (Y + (1 - mu.Y) 1) for Y with Y' = J.
void controlled_form(const Vec& mu, const Vec& Y, const Mat& J, double* val, double* der) {
    Idx d = mu.size();
    double s = 1.0 - mu.dot(Y);
    Vec muJ = J.transpose() * mu;
    for (Idx i = 0; i < d; ++i) {
        val[i] = mu[i] * (Y[i] + s);
        for (Idx a = 0; a < d; ++a) der[i * d + a] = (i == a ? Y[i] + s : 0.0) + mu[i] * (J(i, a) - Y[a] - muJ[a]);
    }
}

}  // namespace

Vec QuadraticBasis::value(const Vec& x) const {
    Vec out(static_cast<Idx>(size()));
    Idx b = 0;
    out[b++] = 1.0;
    for (std::size_t i = 0; i < d; ++i) out[b++] = x[static_cast<Idx>(i)];
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) out[b++] = x[static_cast<Idx>(i)] * x[static_cast<Idx>(j)];
    return out;
}

Mat QuadraticBasis::gradient(const Vec& x) const {
    Mat g = Mat::Zero(static_cast<Idx>(size()), static_cast<Idx>(d));
    Idx b = 1;
    for (std::size_t i = 0; i < d; ++i) g(b++, static_cast<Idx>(i)) = 1.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j, ++b) {
            g(b, static_cast<Idx>(i)) += x[static_cast<Idx>(j)];
            g(b, static_cast<Idx>(j)) += x[static_cast<Idx>(i)];
        }
    return g;
}

std::size_t QuadraticBasis::quadratic_index(std::size_t i, std::size_t j) const {
    if (i > j) std::swap(i, j);
    if (j >= d) throw ParameterError("basis index out of range");
    // Rows before i hold d, d-1, ..., d-i+1 entries.
    return 1 + d + i * d - i * (i - 1) / 2 + (j - i);
}

Mat QuadraticBasis::hessian(std::size_t b) const {
    Mat h = Mat::Zero(static_cast<Idx>(d), static_cast<Idx>(d));
    if (b < 1 + d) return h;
    std::size_t q = 1 + d;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j, ++q)
            if (q == b) {
                h(static_cast<Idx>(i), static_cast<Idx>(j)) += 1.0;
                h(static_cast<Idx>(j), static_cast<Idx>(i)) += 1.0;
                return h;
            }
    throw ParameterError("basis index out of range");
}

std::string QuadraticBasis::describe() const {
    std::string s = "1";
    for (std::size_t i = 0; i < d; ++i) s += ",x" + std::to_string(i + 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) s += ",x" + std::to_string(i + 1) + "*x" + std::to_string(j + 1);
    return s;
}

std::vector<Vec> simplex_mesh(std::size_t d, std::size_t per_axis) {
    if (d == 0 || per_axis < 2) throw ParameterError("simplex mesh needs d >= 1 and at least 2 points per axis");
    std::size_t m = per_axis - 1;
    std::vector<Vec> out;
    std::vector<std::size_t> parts(d, 0);
    // Enumerate compositions of m into d parts.
    auto rec = [&](auto&& self, std::size_t i, std::size_t left) -> void {
        if (i + 1 == d) {
            parts[i] = left;
            Vec x(static_cast<Idx>(d));
            for (std::size_t k = 0; k < d; ++k) x[static_cast<Idx>(k)] = static_cast<double>(parts[k]) / static_cast<double>(m);
            out.push_back(x);
            return;
        }
        for (std::size_t v = 0; v <= left; ++v) {
            parts[i] = v;
            self(self, i + 1, left - v);
        }
    };
    rec(rec, 0, m);
    return out;
}

FunctionFamily::FunctionFamily(Kind kind, std::size_t d, std::vector<Vec> coefficients, double K, double alpha)
    : kind_(kind), basis_{d}, coeffs_(std::move(coefficients)), K_(K), alpha_(alpha),
      xi0_(Vec::Constant(static_cast<Idx>(d), 1.0 / static_cast<double>(d))) {
    if (d == 0) throw ParameterError("family dimension must be positive");
    if (!(K > 0)) throw ParameterError("family cap K must be positive");
    for (const Vec& c : coeffs_)
        if (static_cast<std::size_t>(c.size()) != coefficient_length())
            throw ParameterError("coefficient vector has length " + std::to_string(c.size()) + ", expected " +
                                 std::to_string(coefficient_length()));
}

std::size_t FunctionFamily::coefficient_length() const {
    std::size_t nb = basis_.size(), d = basis_.d;
    switch (kind_) {
        case Kind::Controlled: return d * nb;
        case Kind::Generated: return nb;
        case Kind::ControlledEquation: return d * d * nb;
    }
    return 0;
}

void FunctionFamily::set_xi0(const Vec& xi0) {
    if (static_cast<std::size_t>(xi0.size()) != basis_.d) throw ParameterError("xi0 has the wrong dimension");
    xi0_ = xi0;
}

Vec FunctionFamily::F(const Vec& theta, const Vec& x) const {
    std::size_t nb = basis_.size(), d = basis_.d;
    if (kind_ == Kind::Generated) return basis_.gradient(x).transpose() * theta;
    if (kind_ != Kind::Controlled) throw ParameterError("controlled-equation members have no function F");
    Vec phi = basis_.value(x);
    Vec out(static_cast<Idx>(d));
    for (std::size_t i = 0; i < d; ++i) out[static_cast<Idx>(i)] = theta.segment(static_cast<Idx>(i * nb), static_cast<Idx>(nb)).dot(phi);
    return out;
}

Mat FunctionFamily::DF(const Vec& theta, const Vec& x) const {
    std::size_t nb = basis_.size(), d = basis_.d;
    if (kind_ == Kind::Generated) {
        Mat h = Mat::Zero(static_cast<Idx>(d), static_cast<Idx>(d));
        for (std::size_t b = 1 + d; b < nb; ++b) h += theta[static_cast<Idx>(b)] * basis_.hessian(b);
        return h;
    }
    if (kind_ != Kind::Controlled) throw ParameterError("controlled-equation members have no function F");
    Mat g = basis_.gradient(x);
    Mat out(static_cast<Idx>(d), static_cast<Idx>(d));
    for (std::size_t i = 0; i < d; ++i)
        out.row(static_cast<Idx>(i)) = theta.segment(static_cast<Idx>(i * nb), static_cast<Idx>(nb)).transpose() * g;
    return out;
}

double FunctionFamily::G(const Vec& theta, const Vec& x) const {
    if (kind_ != Kind::Generated) throw ParameterError("only generated families have G");
    return std::exp(theta.dot(basis_.value(x)));
}

VectorField FunctionFamily::field(const Vec& theta) const {
    if (kind_ != Kind::ControlledEquation) throw ParameterError("only controlled-equation families have a vector field");
    std::size_t nb = basis_.size(), d = basis_.d;
    QuadraticBasis basis = basis_;
    VectorField vf;
    vf.f = [=](const Vec& y) {
        Vec phi = basis.value(y);
        Mat out(static_cast<Idx>(d), static_cast<Idx>(d));
        for (std::size_t e = 0; e < d * d; ++e)
            out.data()[e] = theta.segment(static_cast<Idx>(e * nb), static_cast<Idx>(nb)).dot(phi);
        return out;
    };
    vf.Df = [=](const Vec& y) {
        Mat g = basis.gradient(y);
        std::vector<Mat> out(d, Mat(static_cast<Idx>(d), static_cast<Idx>(d)));
        for (std::size_t e = 0; e < d * d; ++e) {
            Vec row = g.transpose() * theta.segment(static_cast<Idx>(e * nb), static_cast<Idx>(nb));
            for (std::size_t j = 0; j < d; ++j) out[j].data()[e] = row[static_cast<Idx>(j)];
        }
        return out;
    };
    return vf;
}

double FunctionFamily::c2_proxy(const Vec& theta) const {
    std::size_t nb = basis_.size(), d = basis_.d;
    // Second derivatives of each component; constant for the quadratic basis.
    std::size_t comps = kind_ == Kind::Controlled ? d : kind_ == Kind::ControlledEquation ? d * d : 1;
    double second = 0;
    std::vector<Mat> H(comps, Mat::Zero(static_cast<Idx>(d), static_cast<Idx>(d)));
    for (std::size_t c = 0; c < comps; ++c) {
        for (std::size_t b = 1 + d; b < nb; ++b) H[c] += theta[static_cast<Idx>(c * nb + b)] * basis_.hessian(b);
        second = std::max(second, sup_abs(H[c]));
    }
    double worst = kind_ == Kind::Generated ? 0.0 : second;
    for (const Vec& x : simplex_mesh(d)) {
        Vec phi = basis_.value(x);
        Mat g = basis_.gradient(x);
        for (std::size_t c = 0; c < comps; ++c) {
            Vec th = theta.segment(static_cast<Idx>(c * nb), static_cast<Idx>(nb));
            double psi = th.dot(phi);
            Vec dpsi = g.transpose() * th;
            if (kind_ == Kind::Generated) {
                double G = std::exp(psi);
                worst = std::max({worst, G, G * sup_abs(dpsi), G * sup_abs(Mat(H[c] + dpsi * dpsi.transpose()))});
            } else {
                worst = std::max({worst, std::abs(psi), sup_abs(dpsi)});
            }
        }
    }
    return worst;
}

void FunctionFamily::validate() const {
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        double c = c2_proxy(coeffs_[i]);
        if (c > K_ * (1 + 1e-12))
            throw ParameterError("family member " + std::to_string(i) + " has C2 proxy " + format_double(c) +
                                 " above K = " + format_double(K_));
        if (kind_ == Kind::Generated)
            for (const Vec& x : simplex_mesh(basis_.d))
                if (G(coeffs_[i], x) < 1.0 / K_)
                    throw ParameterError("family member " + std::to_string(i) + " has G below 1/K");
    }
}

PortfolioPath FunctionFamily::portfolio(const Vec& theta, const Market& market) const {
    if (market.dim() != basis_.d) throw ParameterError("family and market differ in dimension");
    if (kind_ == Kind::ControlledEquation) return controlled_equation_portfolio(field(theta), xi0_, market);
    PortfolioPath pi = functionally_controlled([&](const Vec& x) { return F(theta, x); },
                                               [&](const Vec& x) { return DF(theta, x); }, market);
    return PortfolioPath({kind_name(kind_), "family member"}, pi.values());
}

std::vector<PortfolioPath> FunctionFamily::members(const Market& market) const {
    std::vector<PortfolioPath> out;
    out.reserve(coeffs_.size());
    for (const Vec& c : coeffs_) out.push_back(portfolio(c, market));
    return out;
}

std::string FunctionFamily::kind_name(Kind k) {
    switch (k) {
        case Kind::Controlled: return "controlled";
        case Kind::Generated: return "generated";
        case Kind::ControlledEquation: return "controlled-equation";
    }
    return "";
}

FunctionFamily::Kind FunctionFamily::parse_kind(const std::string& s) {
    if (s == "controlled") return Kind::Controlled;
    if (s == "generated") return Kind::Generated;
    if (s == "controlled-equation") return Kind::ControlledEquation;
    throw ParameterError("unknown family kind '" + s + "'");
}

SampledPath log_wealth_recursion(const PortfolioPath& pi, const Market& market) {
    ControlledPath h = relative_ratio(pi, market);
    const RoughLift& L = market.weights_lift();
    std::size_t n = market.size(), d = market.dim();
    std::vector<double> out(n, 0.0);
    Mat M(static_cast<Idx>(d), static_cast<Idx>(d));
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Vec hk = h.value().vec(k);
        L.area_into(k, k + 1, M.data());
        Mat D = h.deriv().mat(k) + hk * hk.transpose();
        double step = hk.dot(L.base().increment(k, k + 1)) + (D.array() * M.transpose().array()).sum();
        if (!(1.0 + step > 0))
            throw InstabilityError("wealth factor " + format_double(1.0 + step) + " is not positive at node " +
                                   std::to_string(k) + "; refine the grid");
        out[k + 1] = out[k] + std::log1p(step);
    }
    return SampledPath(market.grid(), 1, std::move(out));
}

UniversalResult universal_portfolio(const DiscreteMeasure<PortfolioPath>& m, const Market& market) {
    m.validate();
    std::size_t N = m.support.size(), n = market.size(), d = market.dim();
    std::vector<SampledPath> logV;
    std::vector<ControlledPath> ratios;
    for (const PortfolioPath& p : m.support) {
        logV.push_back(log_wealth_recursion(p, market));
        ratios.push_back(relative_ratio(p, market));
    }
    std::vector<double> mix(n);
    std::vector<double> val(n * d, 0.0), der(n * d * d, 0.0);
    std::vector<double> lw(N);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < N; ++i)
            lw[i] = m.weights[i] > 0 ? std::log(m.weights[i]) + logV[i](k, 0) : -std::numeric_limits<double>::infinity();
        mix[k] = log_sum_exp(lw);
        if (N == 1) continue;
        Vec mu = market.weights().vec(k);
        Vec hnu = Vec::Zero(static_cast<Idx>(d));
        Mat D = Mat::Zero(static_cast<Idx>(d), static_cast<Idx>(d));
        for (std::size_t i = 0; i < N; ++i) {
            double w = std::exp(lw[i] - mix[k]);
            if (w == 0) continue;
            Vec hi = ratios[i].value().vec(k);
            hnu += w * hi;
            D += w * (Mat(ratios[i].deriv().mat(k)) + hi * hi.transpose());
            for (std::size_t a = 0; a < d; ++a) val[k * d + a] += w * m.support[i].values().value()(k, a);
        }
        D -= hnu * hnu.transpose();
        // (mu h)' = diag(h) + mu h'
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t a = 0; a < d; ++a)
                der[(k * d + i) * d + a] = (i == a ? hnu[static_cast<Idx>(i)] : 0.0) + mu[static_cast<Idx>(i)] * D(static_cast<Idx>(i), static_cast<Idx>(a));
    }
    UniversalResult res{N == 1 ? m.support[0]
                               : PortfolioPath({"universal", "universal"},
                                               ControlledPath(market.weights_lift_ptr(), SampledPath(market.grid(), d, std::move(val)),
                                                              MatrixPath(market.grid(), d, d, std::move(der)))),
                        std::move(logV), SampledPath(market.grid(), 1, std::move(mix))};
    return res;
}

UniversalResult universal_portfolio(const FunctionFamily& family, const std::vector<double>& weights,
                                    const Market& market) {
    if (family.size() == 0) throw MeasureError("family is empty");
    return universal_portfolio(DiscreteMeasure<PortfolioPath>{family.members(market), weights}, market);
}

double mixture_wealth_identity(const DiscreteMeasure<PortfolioPath>& m, const Market& market) {
    UniversalResult u = universal_portfolio(m, market);
    SampledPath lv = log_wealth_recursion(u.portfolio, market);
    double worst = 0;
    for (std::size_t k = 0; k < market.size(); ++k)
        worst = std::max(worst, std::abs(std::exp(lv(k, 0)) - std::exp(u.mixture_log_wealth(k, 0))));
    return worst;
}

Retrospective best_retrospective(const FunctionFamily& family, const Market& market, double T, bool refine) {
    if (family.size() == 0) throw MeasureError("family is empty");
    std::size_t end = market.grid().index_of(T);
    Market mk = end + 1 == market.size() ? market : market.restrict(prefix_grid(market.grid(), end));
    auto score = [&](const Vec& theta) { return log_wealth_recursion(family.portfolio(theta, mk), mk)(end, 0); };
    Retrospective best;
    best.log_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < family.size(); ++i) {
        double v = score(family.coefficients()[i]);
        if (v > best.log_value) {
            best.log_value = v;
            best.index = i;
        }
    }
    best.theta = family.coefficients()[best.index];
    if (!refine) return best;
    Idx len = best.theta.size();
    for (Idx j = 0; j < len; ++j) {
        double lo = best.theta[j], hi = best.theta[j];
        for (const Vec& c : family.coefficients()) {
            lo = std::min(lo, c[j]);
            hi = std::max(hi, c[j]);
        }
        double step = hi > lo ? 0.5 * (hi - lo) : 0.5;
        for (int halving = 0; halving < 4; ++halving, step *= 0.5) {
            bool moved = false;
            for (double sgn : {1.0, -1.0}) {
                Vec cand = best.theta;
                cand[j] += sgn * step;
                if (family.c2_proxy(cand) > family.K()) continue;
                if (family.kind() == FunctionFamily::Kind::Generated) {
                    bool low = false;
                    for (const Vec& x : simplex_mesh(family.dim())) low = low || family.G(cand, x) < 1.0 / family.K();
                    if (low) continue;
                }
                double v;
                try {
                    v = score(cand);
                } catch (const InstabilityError&) {
                    continue;
                }
                if (v > best.log_value) {
                    best.log_value = v;
                    best.theta = cand;
                    best.refined = moved = true;
                    break;
                }
            }
            if (moved) break;
        }
    }
    return best;
}

std::vector<ClockValues> growth_clock_series(const Market& market, const std::vector<std::size_t>& nodes) {
    if (nodes.empty()) return {};
    std::size_t end = *std::max_element(nodes.begin(), nodes.end());
    if (end >= market.size()) throw GridAlignmentError("clock node outside the grid");
    const RoughLift& L = market.weights_lift();
    double p = L.p();
    std::vector<double> mv = p_variation_prefix(market.weights(), p, 0, end);
    std::vector<double> av =
        two_param_p_variation_prefix([&](std::size_t u, std::size_t v) { return L.area_norm(u, v); }, p / 2, 0, end);
    MatrixPath B = bracket_values(L);
    std::vector<ClockValues> out;
    for (std::size_t k : nodes) {
        ClockValues c;
        c.T = market.grid()[k];
        c.mu_pvar = std::pow(mv[k], 1 / p);
        c.area_pvar = std::pow(av[k], 2 / p);
        c.bracket_trace = B.mat(k).trace();
        c.xi = c.mu_pvar + c.area_pvar + c.bracket_trace;
        c.lambda = (1 + c.mu_pvar * c.mu_pvar) * c.xi;
        out.push_back(c);
    }
    return out;
}

ClockValues growth_clock(const Market& market, double T) {
    return growth_clock_series(market, {market.grid().index_of(T)}).front();
}

bool CoverTrajectory::decreasing() const {
    if (rows.size() < 2) return false;
    double mt = 0, mg = 0;
    for (const auto& r : rows) {
        mt += r.T;
        mg += r.gap_scaled;
    }
    mt /= static_cast<double>(rows.size());
    mg /= static_cast<double>(rows.size());
    double num = 0, den = 0;
    for (const auto& r : rows) {
        num += (r.T - mt) * (r.gap_scaled - mg);
        den += (r.T - mt) * (r.T - mt);
    }
    return rows.back().gap_scaled < rows.front().gap_scaled && den > 0 && num / den < 0;
}

void CoverTrajectory::write_csv(std::ostream& out) const {
    out << "T,logVstar,logVuniversal,lambdaT,gap_scaled,winner\n";
    for (const auto& r : rows)
        out << format_double(r.T) << ',' << format_double(r.log_vstar) << ',' << format_double(r.log_vuniversal) << ','
            << format_double(r.lambda) << ',' << format_double(r.gap_scaled) << ',' << r.winner << '\n';
}

CoverTrajectory cover_gap_trajectory(const FunctionFamily& family, const std::vector<double>& weights,
                                     const Market& market, const std::vector<double>& horizons) {
    UniversalResult u = universal_portfolio(family, weights, market);
    std::vector<std::size_t> nodes;
    for (double T : horizons) nodes.push_back(market.grid().index_of(T));
    std::vector<ClockValues> clock = growth_clock_series(market, nodes);
    CoverTrajectory out;
    for (std::size_t h = 0; h < nodes.size(); ++h) {
        std::size_t k = nodes[h];
        CoverRow r;
        r.T = market.grid()[k];
        r.log_vstar = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < u.member_log_wealth.size(); ++i)
            if (u.member_log_wealth[i](k, 0) > r.log_vstar) {
                r.log_vstar = u.member_log_wealth[i](k, 0);
                r.winner = i;
            }
        // Wealth of pi^nu is the mixture of member wealths.
        r.log_vuniversal = u.mixture_log_wealth(k, 0);
        r.lambda = clock[h].lambda;
        double num = r.log_vstar - r.log_vuniversal;
        r.gap_scaled = r.lambda > 0 ? num / r.lambda : 0.0;
        out.rows.push_back(r);
    }
    return out;
}

std::vector<double> seminorm_prefix(const ControlledPath& h, double q_prime) {
    double p = h.lift().p();
    if (!(q_prime > 0)) throw ParameterError("q' must be positive");
    double r_prime = 1.0 / (1.0 / p + 1.0 / q_prime);
    std::size_t n = h.size();
    double init = h.value().vec(0).norm() + Mat(h.deriv().mat(0)).norm();
    std::vector<double> dv = p_variation_prefix(h.deriv().flat(), q_prime, 0, n - 1);
    std::vector<double> rv =
        two_param_p_variation_prefix([&](std::size_t u, std::size_t v) { return h.remainder_norm(u, v); }, r_prime, 0, n - 1);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = init + std::pow(dv[k], 1 / q_prime) + std::pow(rv[k], 1 / r_prime);
    return out;
}

double seminorm(const PortfolioPath& pi, const Market& market, double T, double q_prime) {
    std::size_t end = market.grid().index_of(T);
    Market mk = end + 1 == market.size() ? market : market.restrict(prefix_grid(market.grid(), end));
    return seminorm_prefix(relative_ratio(pi.restrict(mk.weights_lift_ptr()), mk), q_prime).back();
}

double metric_d_beta(const PortfolioPath& pi, const PortfolioPath& phi, const Market& market, const MetricSchedule& s) {
    ControlledPath h = relative_ratio(pi, market) - relative_ratio(phi, market);
    std::vector<double> semi = seminorm_prefix(h, s.q_prime);
    std::vector<double> crow = s.c.row(0);
    const TimeGrid& g = market.grid();
    std::vector<std::pair<double, std::size_t>> horizons;
    double T = g.horizon();
    if (T < 1) horizons.emplace_back(T, g.size() - 1);
    for (double N = 1; N <= T + 1e-12; N += 1) horizons.emplace_back(N, g.floor_index(N));
    double worst = 0;
    for (auto [N, k] : horizons) {
        double c = crow[k];
        double gamma = 1 + s.M + std::pow(c, 1 / s.q) + std::pow(c, 1 / s.r);
        worst = std::max(worst, semi[k] / (s.beta(N) * gamma));
    }
    return worst;
}

namespace {

struct PairSups {
    double deriv = 0, rem = 0;
    std::size_t pairs = 0;
};

PairSups pair_sups(const ControlledPath& h, const ControlFunction& c, double q, std::size_t limit) {
    double p = h.lift().p();
    double r = 1.0 / (1.0 / p + 1.0 / q);
    std::size_t n = h.size();
    std::vector<std::size_t> starts;
    if (n <= limit)
        for (std::size_t s = 0; s + 1 < n; ++s) starts.push_back(s);
    else
        starts = stratified_nodes(n, 64);
    std::vector<std::vector<double>> rows = c.rows(starts);
    PairSups out;
    auto ratio = [](double num, double den) {
        if (den > 0) return num / den;
        return num > 1e-300 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    for (std::size_t a = 0; a < starts.size(); ++a) {
        std::size_t s = starts[a];
        Mat Ds = h.deriv().mat(s);
        for (std::size_t t = s + 1; t < n; ++t) {
            double den = rows[a][t - s];
            out.deriv = std::max(out.deriv, ratio(std::pow((Mat(h.deriv().mat(t)) - Ds).norm(), q), den));
            out.rem = std::max(out.rem, ratio(std::pow(h.remainder_norm(s, t), r), den));
            ++out.pairs;
        }
    }
    return out;
}

}  // namespace

AdmissibilityReport admissibility_check(const PortfolioPath& pi, const Market& market, double M,
                                        const ControlFunction& c, double q, std::size_t all_pairs_limit) {
    ControlledPath h = relative_ratio(pi, market);
    AdmissibilityReport rep;
    rep.initial = h.value().vec(0).norm() + Mat(h.deriv().mat(0)).norm();
    PairSups s = pair_sups(h, c, q, all_pairs_limit);
    rep.sup_deriv_ratio = s.deriv;
    rep.sup_remainder_ratio = s.rem;
    rep.pairs = s.pairs;
    rep.admissible = rep.initial <= M + 1e-12 && s.deriv <= 1 && s.rem <= 1;
    return rep;
}

double fit_control_scale(const std::vector<PortfolioPath>& pis, const Market& market, const ControlFunction& base,
                         double q, std::size_t all_pairs_limit) {
    double C = 0;
    for (const PortfolioPath& pi : pis) {
        PairSups s = pair_sups(relative_ratio(pi, market), base, q, all_pairs_limit);
        C = std::max({C, s.deriv, s.rem});
    }
    return C * base.scale();
}

SampledPath nontriviality_path(double lambda, std::size_t periods, std::size_t nodes_per_period, double p) {
    if (!(lambda > 1 / p && lambda < 0.5))
        throw ParameterError("lambda must lie in (1/p, 1/2) = (" + format_double(1 / p) + ", 0.5)");
    if (periods == 0 || nodes_per_period < 4) throw ParameterError("need at least one period and 4 nodes per period");
    const double two_pi = 2 * std::numbers::pi;
    std::size_t steps = periods * nodes_per_period;
    TimeGrid g = TimeGrid::uniform(two_pi * static_cast<double>(periods), steps);
    std::vector<double> v(3 * (steps + 1));
    for (std::size_t idx = 0; idx <= steps; ++idx) {
        std::size_t k = std::min(periods, idx / nodes_per_period + 1);
        double angle = two_pi * static_cast<double>(idx - (k - 1) * nodes_per_period) / static_cast<double>(nodes_per_period);
        double a = std::pow(static_cast<double>(k), -lambda) / 3;
        double c = std::cos(angle), s = std::sin(angle);
        v[3 * idx] = (1 + a * (1 - c)) / 3;
        v[3 * idx + 1] = (1 + a * s) / 3;
        v[3 * idx + 2] = (1 + a * (c - 1 - s)) / 3;
    }
    return SampledPath(g, 3, std::move(v));
}

double nontriviality_value(double lambda, std::size_t periods) {
    double s = 0;
    for (std::size_t k = 1; k <= periods; ++k) s += std::pow(static_cast<double>(k), -2 * lambda);
    return std::numbers::pi / 81 * s;
}

GradientBoundReport gradient_bound_check(const ScalarFunction& f, double K, const Market& market) {
    MatrixPath B = bracket_values(market.weights_lift());
    double br = 0;
    for (std::size_t k = 0; k < market.size(); ++k) br = std::max(br, sup_abs(Mat(B.mat(k))));
    if (br > 1e-10)
        throw PreconditionError("market weights carry a bracket of size " + format_double(br) +
                                "; the gradient bound needs a zero-bracket market");
    GradientBoundReport rep;
    for (const Vec& x : simplex_mesh(market.dim())) rep.grad_sup = std::max(rep.grad_sup, f.grad(x).norm());
    if (rep.grad_sup > K * (1 + 1e-12))
        throw PreconditionError("|grad f| reaches " + format_double(rep.grad_sup) + " > K = " + format_double(K));
    rep.logV = controlled_log_wealth([&](const Vec& x) { return f.grad(x); }, [&](const Vec& x) { return f.hess(x); }, market);
    double f0 = f.f(market.weights().vec(0));
    rep.sup_logV = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < market.size(); ++k) {
        rep.sup_logV = std::max(rep.sup_logV, rep.logV(k, 0));
        rep.endpoint_gap = std::max(rep.endpoint_gap, std::abs(rep.logV(k, 0) - (f.f(market.weights().vec(k)) - f0)));
    }
    rep.within_bound = rep.sup_logV <= 2 * K + 1e-6;
    return rep;
}

SampledPath controlled_log_wealth(const VecFn& F, const MatFn& DF, const Market& market) {
    return log_relative_wealth(functionally_controlled(F, DF, market), market);
}

PortfolioPath controlled_equation_portfolio(const VectorField& f, const Vec& xi0, const Market& market) {
    std::size_t n = market.size(), d = market.dim();
    if (static_cast<std::size_t>(xi0.size()) != d) throw ParameterError("xi0 has the wrong dimension");
    const RoughLift& L = market.weights_lift();
    std::vector<double> val(n * d), der(n * d * d);
    Vec Y = xi0;
    Mat M(static_cast<Idx>(d), static_cast<Idx>(d));
    for (std::size_t k = 0; k < n; ++k) {
        Mat J = f.f(Y);
        controlled_form(market.weights().vec(k), Y, J, val.data() + k * d, der.data() + k * d * d);
        if (k + 1 == n) break;
        L.area_into(k, k + 1, M.data());
        std::vector<Mat> DJ = f.Df(Y);
        Vec next = Y + J * L.base().increment(k, k + 1);
        // sum_{j,a,b} d_j f^{ib} f^{ja} M^{ab}
        for (std::size_t j = 0; j < d; ++j) {
            Vec w = M.transpose() * J.row(static_cast<Idx>(j)).transpose();  // w_b = sum_a f^{ja} M^{ab}
            next += DJ[j] * w;
        }
        Y = next;
        if (!(sup_abs(Y) <= 1e6))
            throw InstabilityError("controlled equation solution exceeds 1e6 at node " + std::to_string(k + 1));
    }
    return PortfolioPath({"controlled-equation", "controlled equation"},
                         ControlledPath(market.weights_lift_ptr(), SampledPath(market.grid(), d, std::move(val)),
                                        MatrixPath(market.grid(), d, d, std::move(der))));
}

}  // namespace rpspt

#include "rpspt/models.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

using Idx = Eigen::Index;

// Orthonormal basis of the complement of 1 in R^d, d x (d-1).
Mat complement_basis(std::size_t d) {
    Vec one = Vec::Ones(static_cast<Idx>(d)) / std::sqrt(static_cast<double>(d));
    Eigen::HouseholderQR<Mat> qr{Mat(one)};
    Mat Q = qr.householderQ();
    return Q.rightCols(static_cast<Idx>(d - 1));
}

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2) return 0;
    double m = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

}  // namespace

Mat diffusion_matrix(const Vec& x, double gamma) {
    Mat c = -gamma * x * x.transpose();
    c.diagonal() += gamma * x;
    return c;
}

Vec DiffusionSpec::lambda(const Vec& x) const {
    if (lambda_closed) return lambda_closed(x);
    return solve_lambda(B, gamma, C, x);
}

void DiffusionSpec::validate() const {
    if (d < 2) throw ParameterError("dimension must be at least 2");
    if (static_cast<std::size_t>(B.rows()) != d || static_cast<std::size_t>(B.cols()) != d)
        throw ParameterError("B must be " + std::to_string(d) + " x " + std::to_string(d));
    if (!(gamma >= 0)) throw ParameterError("gamma must be non-negative");
    Vec cols = B.colwise().sum();
    if (cols.cwiseAbs().maxCoeff() > 1e-12) throw ParameterError("columns of B must sum to 0");
    switch (kind) {
        case Kind::VolStabilized:
            if (!(gamma > 0)) throw ParameterError("gamma must be positive");
            if (!(alpha > gamma - 1))
                throw ParameterError("boundary condition alpha > gamma - 1 fails: alpha = " + format_double(alpha) +
                                     ", gamma = " + format_double(gamma));
            break;
        case Kind::Polynomial:
            if (!(gamma > 0)) throw ParameterError("gamma must be positive");
            if (!(p > 0 && q > 0 && r > 0)) throw ParameterError("p, q, r must be positive");
            if (2 * std::min({p, q, r}) - gamma < 0)
                throw ParameterError("boundary condition 2 min(p,q,r) - gamma >= 0 fails: " +
                                     format_double(2 * std::min({p, q, r}) - gamma));
            break;
        case Kind::Custom:
            for (Idx i = 0; i < B.rows(); ++i)
                for (Idx j = 0; j < B.cols(); ++j)
                    if (i != j && B(i, j) < 0) throw ParameterError("off-diagonal entries of B must be non-negative");
            break;
    }
}

std::string DiffusionSpec::kind_name(Kind k) {
    switch (k) {
        case Kind::VolStabilized: return "vol-stabilized";
        case Kind::Polynomial: return "polynomial";
        case Kind::Custom: return "custom";
    }
    return "";
}

DiffusionSpec::Kind DiffusionSpec::parse_kind(const std::string& s) {
    if (s == "vol-stabilized") return Kind::VolStabilized;
    if (s == "polynomial") return Kind::Polynomial;
    if (s == "custom") return Kind::Custom;
    throw ParameterError("unknown spec kind '" + s + "'");
}

DiffusionSpec vol_stabilized_spec(double alpha, double gamma, double C, std::size_t d) {
    DiffusionSpec s;
    s.kind = DiffusionSpec::Kind::VolStabilized;
    s.d = d;
    s.gamma = gamma;
    s.C = C;
    s.alpha = alpha;
    double half = (1 + alpha) / 2;
    s.B = Mat::Constant(static_cast<Idx>(d), static_cast<Idx>(d), half);
    s.B.diagonal().array() -= half * static_cast<double>(d);
    double kappa = (1 + alpha) / (2 * gamma);
    s.lambda_closed = [kappa, C](const Vec& x) { return Vec((kappa * x.cwiseInverse()).array() + C); };
    s.validate();
    return s;
}

DiffusionSpec polynomial_spec(double p, double q, double r, double gamma, double C) {
    DiffusionSpec s;
    s.kind = DiffusionSpec::Kind::Polynomial;
    s.d = 3;
    s.gamma = gamma;
    s.C = C;
    s.p = p;
    s.q = q;
    s.r = r;
    s.B = Mat{{-p, q, r}, {p, -q, 0.0}, {0.0, 0.0, -r}};
    s.lambda_closed = [=](const Vec& x) {
        return Vec{{(r - p + q * x[1] / x[0] + r * x[2] / x[0]) / gamma + C, (r - q + p * x[0] / x[1]) / gamma + C, C}};
    };
    s.validate();
    return s;
}

DiffusionSpec custom_spec(Mat B, double gamma, double C) {
    DiffusionSpec s;
    s.kind = DiffusionSpec::Kind::Custom;
    s.d = static_cast<std::size_t>(B.rows());
    s.gamma = gamma;
    s.C = C;
    s.B = std::move(B);
    s.validate();
    return s;
}

Vec solve_lambda(const Mat& B, double gamma, double C, const Vec& x) {
    std::size_t d = static_cast<std::size_t>(x.size());
    Vec rhs = B * x;
    if (rhs.cwiseAbs().maxCoeff() == 0) return Vec::Constant(static_cast<Idx>(d), C);
    Mat Q = complement_basis(d);
    Mat A = diffusion_matrix(x, gamma) * Q;
    Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    if (!(sv.size() > 0 && sv.minCoeff() > 1e-12 * sv.maxCoeff()))
        throw ConditioningError("c(x) is rank-deficient beyond the constant direction at x = (" + format_double(x[0]) +
                                ", ...)");
    Vec y = svd.solve(rhs);
    return Vec((Q * y).array() + C);
}

Vec log_optimal_portfolio(const DiffusionSpec& spec, const Vec& mu) {
    Vec lam = spec.lambda(mu);
    return Vec(mu.cwiseProduct((lam.array() + 1.0 - mu.dot(lam)).matrix()));
}

Vec vol_stabilized_portfolio(double alpha, double gamma, const Vec& mu) {
    double kappa = (1 + alpha) / (2 * gamma);
    return Vec((kappa + mu.array() * (1 - static_cast<double>(mu.size()) * kappa)).matrix());
}

std::size_t SimulationConfig::steps() const {
    double n = std::round(horizon / step);
    if (!(n >= 1) || std::abs(n * step - horizon) > 1e-9 * horizon)
        throw ParameterError("horizon " + format_double(horizon) + " is not a multiple of step " + format_double(step));
    return static_cast<std::size_t>(n);
}

void SimulationConfig::validate(std::size_t d) const {
    if (!(step > 0)) throw ParameterError("step must be positive");
    if (!(horizon > 0)) throw ParameterError("horizon must be positive");
    if (paths < 1) throw ParameterError("paths must be at least 1");
    if (!(epsilon > 0 && epsilon < 1.0 / static_cast<double>(d)))
        throw ParameterError("epsilon must lie in (0, 1/d)");
    if (initial) {
        if (static_cast<std::size_t>(initial->size()) != d) throw ParameterError("initial point has the wrong dimension");
        if (std::abs(initial->sum() - 1) > 1e-12 || initial->minCoeff() <= 0)
            throw ParameterError("initial point must lie in the open simplex");
    }
    steps();
}

void project_to_simplex(Vec& x, double eps) {
    x /= x.sum();
    // Each pass fixes at least one more coordinate at a bound.
    for (Idx pass = 0; pass <= x.size(); ++pass) {
        double moved = 0, free_mass = 0;
        bool clipped = false;
        for (Idx i = 0; i < x.size(); ++i) {
            if (x[i] < eps) {
                moved -= eps - x[i];
                x[i] = eps;
                clipped = true;
            } else if (x[i] > 1 - eps) {
                moved += x[i] - (1 - eps);
                x[i] = 1 - eps;
                clipped = true;
            }
        }
        if (!clipped) return;
        // Headroom in the direction the moved mass has to go.
        auto room = [&](double v) { return std::max(0.0, moved > 0 ? 1 - eps - v : v - eps); };
        for (Idx i = 0; i < x.size(); ++i) free_mass += room(x[i]);
        if (free_mass <= 0) break;
        Vec share = x.unaryExpr(room) / free_mass;
        x += moved * share;
    }
    x /= x.sum();
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the pair
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

PathSimulator::PathSimulator(DiffusionSpec spec, SimulationConfig config)
    : spec_(std::move(spec)), config_(std::move(config)) {
    spec_.validate();
    config_.validate(spec_.d);
    grid_ = config_.grid();
}

SampledPath PathSimulator::path(std::size_t index) const {
    std::size_t d = spec_.d, n = grid_.size();
    std::mt19937_64 rng(stream_seed(config_.seed, index));
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec x(static_cast<Idx>(d));
    if (config_.initial) {
        x = *config_.initial;
    } else {
        std::exponential_distribution<double> e(1.0);
        for (std::size_t i = 0; i < d; ++i) x[static_cast<Idx>(i)] = e(rng);
    }
    project_to_simplex(x, config_.epsilon);
    std::vector<double> v(n * d);
    std::copy(x.data(), x.data() + d, v.begin());
    const double dt = config_.step, sdt = std::sqrt(dt);
    Eigen::SelfAdjointEigenSolver<Mat> eig(static_cast<Idx>(d));
    Vec z(static_cast<Idx>(d));
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = 0; i < d; ++i) z[static_cast<Idx>(i)] = normal(rng);
        if (spec_.gamma > 0) {
            eig.computeDirect(spec_.c(x));
            Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            x += spec_.B * x * dt + eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose() * z * sdt;
        } else {
            x += spec_.B * x * dt;
        }
        if (!x.allFinite())
            throw InstabilityError("non-finite weights at step " + std::to_string(k) + " of path " +
                                   std::to_string(index) + "; reduce the step size");
        project_to_simplex(x, config_.epsilon);
        std::copy(x.data(), x.data() + d, v.begin() + static_cast<std::ptrdiff_t>(k * d));
    }
    return SampledPath(grid_, d, std::move(v));
}

std::vector<SampledPath> simulate_market_weights(const DiffusionSpec& spec, const SimulationConfig& config) {
    PathSimulator sim(spec, config);
    std::vector<SampledPath> out;
    out.reserve(config.paths);
    for (std::size_t i = 0; i < config.paths; ++i) out.push_back(sim.path(i));
    return out;
}

SampledPath euler_log_wealth(const SampledPath& mu, const PortfolioMap& pi) {
    std::size_t n = mu.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Vec m = mu.vec(k);
        Vec h = pi(m).cwiseQuotient(m);
        double step = h.dot(mu.increment(k, k + 1));
        out[k + 1] = out[k] + step - 0.5 * step * step;
    }
    return SampledPath(mu.grid(), 1, std::move(out));
}

SampledPath half_growth_integral(const DiffusionSpec& spec, const SampledPath& mu) {
    std::size_t n = mu.size();
    std::vector<double> out(n, 0.0);
    if (spec.gamma > 0)
        for (std::size_t k = 0; k + 1 < n; ++k) {
            Vec m = mu.vec(k);
            Vec lam = spec.lambda(m);
            out[k + 1] = out[k] + 0.5 * lam.dot(spec.c(m) * lam) * (mu.time(k + 1) - mu.time(k));
        }
    return SampledPath(mu.grid(), 1, std::move(out));
}

void MeanAccumulator::add(const std::vector<double>& values) {
    if (sum_.empty() && n_ == 0) {
        sum_.assign(values.size(), 0.0);
        sq_.assign(values.size(), 0.0);
    }
    if (values.size() != sum_.size()) throw ParameterError("accumulator length mismatch");
    for (std::size_t k = 0; k < values.size(); ++k) {
        sum_[k] += values[k];
        sq_[k] += values[k] * values[k];
    }
    ++n_;
}

void MeanAccumulator::add(const SampledPath& path) {
    if (path.dim() != 1) throw ParameterError("accumulator takes scalar paths");
    add(path.data());
}

std::vector<double> MeanAccumulator::mean() const {
    std::vector<double> m(sum_.size());
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = n_ ? sum_[k] / static_cast<double>(n_) : 0.0;
    return m;
}

std::vector<double> MeanAccumulator::se() const {
    std::vector<double> s(sum_.size(), 0.0);
    if (n_ < 2) return s;
    double n = static_cast<double>(n_);
    for (std::size_t k = 0; k < s.size(); ++k) {
        double m = sum_[k] / n;
        double var = std::max(0.0, (sq_[k] - n * m * m) / (n - 1));
        s[k] = std::sqrt(var / n);
    }
    return s;
}

const MCCurve& MCResult::curve(const std::string& name) const {
    for (const auto& c : curves)
        if (c.name == name) return c;
    throw ParameterError("no curve named '" + name + "'");
}

double MCResult::scalar(const std::string& name) const {
    for (const auto& [k, v] : scalars)
        if (k == name) return v;
    throw ParameterError("no scalar named '" + name + "'");
}

void MCResult::write_csv(std::ostream& out) const {
    out << "t,curve,mean,stderr\n";
    for (const auto& c : curves)
        for (std::size_t k = 0; k < grid.size(); ++k)
            out << format_double(grid[k]) << ',' << c.name << ',' << format_double(c.mean[k]) << ','
                << format_double(c.se[k]) << '\n';
}

AlphaStarTerms alpha_star_terms(const SampledPath& mu, const Mat& B) {
    AlphaStarTerms t;
    double d = static_cast<double>(mu.dim());
    for (std::size_t k = 0; k + 1 < mu.size(); ++k) {
        Vec m = mu.vec(k);
        Vec inv = m.cwiseInverse();
        double dt = mu.time(k + 1) - mu.time(k);
        t.numerator += inv.dot(B * m) * dt;
        t.denominator += (inv.sum() - d * d) * dt;
    }
    return t;
}

void AlphaStarAccumulator::add(const SampledPath& mu) {
    if (static_cast<std::size_t>(B_.rows()) != mu.dim()) throw ParameterError("B and path differ in dimension");
    AlphaStarTerms t = alpha_star_terms(mu, B_);
    num_.push_back(t.numerator);
    den_.push_back(t.denominator);
}

AlphaStar AlphaStarAccumulator::result() const {
    if (num_.empty()) throw ParameterError("alpha* needs at least one path");
    AlphaStar a;
    a.paths = num_.size();
    double n = static_cast<double>(a.paths);
    for (std::size_t i = 0; i < num_.size(); ++i) {
        a.numerator += num_[i];
        a.denominator += den_[i];
    }
    a.numerator /= n;
    a.denominator /= n;
    a.denominator_stderr = std::sqrt(sample_variance(den_) / n);
    if (std::abs(a.denominator) <= 2 * a.denominator_stderr || a.denominator == 0)
        throw IllPosedError("alpha* denominator " + format_double(a.denominator) + " is within 2 standard errors (" +
                            format_double(a.denominator_stderr) + ") of 0");
    a.value = 2 * a.numerator / a.denominator - 1;
    return a;
}

AlphaStar alpha_star(const std::vector<SampledPath>& ensemble, const Mat& B) {
    AlphaStarAccumulator acc(B);
    for (const auto& mu : ensemble) acc.add(mu);
    return acc.result();
}

MCResult expected_log_optimal(const DiffusionSpec& spec, const SimulationConfig& config) {
    PathSimulator sim(spec, config);
    std::size_t n = sim.grid().size();
    MeanAccumulator half(n), wealth(n), diff(n);
    PortfolioMap pi = [&](const Vec& m) { return log_optimal_portfolio(spec, m); };
    for (std::size_t i = 0; i < config.paths; ++i) {
        SampledPath mu = sim.path(i);
        SampledPath a = half_growth_integral(spec, mu);
        SampledPath b = spec.gamma > 0 ? euler_log_wealth(mu, pi) : SampledPath(mu.grid(), 1, std::vector<double>(n, 0.0));
        std::vector<double> dv(n);
        for (std::size_t k = 0; k < n; ++k) dv[k] = b(k, 0) - a(k, 0);
        half.add(a);
        wealth.add(b);
        diff.add(dv);
    }
    MCResult res;
    res.grid = sim.grid();
    res.curves.push_back({"half_integral", half.mean(), half.se()});
    res.curves.push_back({"log_wealth", wealth.mean(), wealth.se()});
    std::vector<double> dm = diff.mean(), ds = diff.se();
    double worst = 0;
    for (std::size_t k = 0; k < n; ++k)
        // Differences at rounding level (paths started at the centre) carry no signal.
        if (ds[k] > 0) worst = std::max(worst, std::max(0.0, std::abs(dm[k]) - 1e-12) / ds[k]);
    res.scalars.emplace_back("max_route_gap_se", worst);
    res.scalars.emplace_back("terminal_route_gap_se", ds.back() > 0 ? std::abs(dm.back()) / ds.back() : 0.0);
    return res;
}

StructureReport structure_condition_report(const DiffusionSpec& spec, const std::vector<SampledPath>& ensemble) {
    StructureReport r;
    for (const auto& mu : ensemble) {
        double v = 2 * half_growth_integral(spec, mu)(mu.size() - 1, 0);
        if (!std::isfinite(v)) ++r.non_finite;
        r.integral.push_back(v);
    }
    return r;
}

}  // namespace rpspt

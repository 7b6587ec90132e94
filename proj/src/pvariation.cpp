#include "rpspt/pvariation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

void check_p(double p) {
    if (!(p >= 1.0)) throw ParameterError("p-variation needs p >= 1");
}

double dist_pow(const SampledPath& x, std::size_t i, std::size_t j, double half_p) {
    const double* a = x.row(i);
    const double* b = x.row(j);
    double sq = 0;
    for (std::size_t c = 0; c < x.dim(); ++c) {
        double d = b[c] - a[c];
        sq += d * d;
    }
    if (half_p == 1.0) return sq;
    return std::pow(sq, half_p);
}

// DP over the listed node indices of `x`; returns V at each listed node.
std::vector<double> dp_nodes(const SampledPath& x, double p, const std::vector<std::size_t>& nodes) {
    std::vector<double> V(nodes.size(), 0.0);
    double hp = p / 2;
    for (std::size_t j = 1; j < nodes.size(); ++j) {
        double best = 0;
        for (std::size_t i = 0; i < j; ++i) best = std::max(best, V[i] + dist_pow(x, nodes[i], nodes[j], hp));
        V[j] = best;
    }
    return V;
}

std::vector<std::size_t> range_nodes(std::size_t s, std::size_t t) {
    std::vector<std::size_t> r(t - s + 1);
    for (std::size_t k = s; k <= t; ++k) r[k - s] = k;
    return r;
}

std::vector<std::size_t> coarse_nodes(std::size_t s, std::size_t t, std::size_t block) {
    std::vector<std::size_t> r;
    for (std::size_t k = s; k < t; k += block) r.push_back(k);
    r.push_back(t);
    return r;
}

std::size_t block_size(std::size_t m) { return std::max<std::size_t>(2, (m + 3999) / 4000); }

}  // namespace

double PVariation::norm(double p) const { return std::pow(value, 1.0 / p); }

std::vector<std::size_t> stratified_nodes(std::size_t n, std::size_t count) {
    if (n == 0) return {};
    if (count >= n || count < 2) {
        if (count >= n) return range_nodes(0, n - 1);
        return {0, n - 1};
    }
    std::vector<std::size_t> r;
    for (std::size_t k = 0; k < count; ++k) {
        auto v = static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n - 1) /
                                                       static_cast<double>(count - 1)));
        if (r.empty() || v != r.back()) r.push_back(v);
    }
    return r;
}

PVariation p_variation_sum(const SampledPath& path, double p, std::size_t s, std::size_t t,
                           std::size_t exact_limit) {
    check_p(p);
    if (s > t || t >= path.size()) throw GridAlignmentError("p-variation window outside the grid");
    PVariation out;
    if (s == t) return out;
    std::size_t m = t - s + 1;
    if (m <= exact_limit) {
        out.value = out.lower = out.upper = dp_nodes(path, p, range_nodes(s, t)).back();
        return out;
    }
    // Coarse nodes give a lower bound. For the upper bound split S = S^c + R with S^c the
    // interpolation through coarse nodes: R vanishes at coarse nodes, so a straddling
    // interval costs at most 2^{p-1} times its two in-block pieces.
    std::size_t b = block_size(m);
    auto cn = coarse_nodes(s, t, b);
    double coarse = dp_nodes(path, p, cn).back();
    double rsum = 0;
    for (std::size_t c = 0; c + 1 < cn.size(); ++c) {
        std::size_t a = cn[c], e = cn[c + 1];
        std::size_t len = e - a;
        std::vector<double> r((len + 1) * path.dim());
        for (std::size_t k = 0; k <= len; ++k) {
            double w = static_cast<double>(k) / static_cast<double>(len);
            for (std::size_t i = 0; i < path.dim(); ++i)
                r[k * path.dim() + i] = path(a + k, i) - ((1 - w) * path(a, i) + w * path(e, i));
        }
        std::vector<double> tt(len + 1);
        for (std::size_t k = 0; k <= len; ++k) tt[k] = static_cast<double>(k);
        SampledPath rp(TimeGrid(std::move(tt)), path.dim(), std::move(r));
        rsum += dp_nodes(rp, p, range_nodes(0, len)).back();
    }
    double upper_norm = std::pow(coarse, 1 / p) + std::pow(std::pow(2.0, p - 1) * rsum, 1 / p);
    out.exact = false;
    out.lower = out.value = coarse;
    out.upper = std::pow(upper_norm, p);
    return out;
}

PVariation p_variation_sum(const SampledPath& path, double p, double s, double t, std::size_t exact_limit) {
    check_p(p);
    return p_variation_sum(path, p, path.grid().index_of(s), path.grid().index_of(t), exact_limit);
}

double p_variation(const SampledPath& path, double p, double s, double t) {
    return p_variation_sum(path, p, s, t).norm(p);
}

double p_variation(const SampledPath& path, double p) {
    check_p(p);
    return p_variation_sum(path, p, std::size_t{0}, path.size() - 1).norm(p);
}

std::vector<double> p_variation_prefix(const SampledPath& path, double p, std::size_t s, std::size_t t) {
    check_p(p);
    if (s > t || t >= path.size()) throw GridAlignmentError("p-variation window outside the grid");
    return dp_nodes(path, p, range_nodes(s, t));
}

std::vector<double> two_param_p_variation_prefix(const TwoParamNorm& xi, double p, std::size_t s, std::size_t t) {
    check_p(p);
    if (s > t) throw GridAlignmentError("p-variation window is reversed");
    std::size_t m = t - s + 1;
    std::vector<double> V(m, 0.0);
    for (std::size_t j = 1; j < m; ++j) {
        double best = 0;
        for (std::size_t i = 0; i < j; ++i) best = std::max(best, V[i] + std::pow(xi(s + i, s + j), p));
        V[j] = best;
    }
    return V;
}

PVariation two_param_p_variation_sum(const TwoParamNorm& xi, const TimeGrid& grid, double p, std::size_t s,
                                     std::size_t t, std::size_t exact_limit) {
    check_p(p);
    if (s > t || t >= grid.size()) throw GridAlignmentError("p-variation window outside the grid");
    PVariation out;
    if (s == t) return out;
    std::size_t m = t - s + 1;
    if (m <= exact_limit) {
        out.value = out.lower = out.upper = two_param_p_variation_prefix(xi, p, s, t).back();
        return out;
    }
    auto cn = coarse_nodes(s, t, block_size(m));
    std::vector<double> V(cn.size(), 0.0);
    for (std::size_t j = 1; j < cn.size(); ++j) {
        double best = 0;
        for (std::size_t i = 0; i < j; ++i) best = std::max(best, V[i] + std::pow(xi(cn[i], cn[j]), p));
        V[j] = best;
    }
    out.exact = false;
    out.lower = out.value = V.back();
    out.upper = std::numeric_limits<double>::infinity();
    return out;
}

double two_param_p_variation(const TwoParamNorm& xi, const TimeGrid& grid, double p, double s, double t) {
    check_p(p);
    return two_param_p_variation_sum(xi, grid, p, grid.index_of(s), grid.index_of(t)).norm(p);
}

ControlFunction::ControlFunction(TimeGrid grid, std::vector<Term> terms, double scale)
    : grid_(std::move(grid)), terms_(std::move(terms)), scale_(scale) {
    if (!(scale_ >= 0)) throw ParameterError("control scale must be non-negative");
    for (const auto& term : terms_) check_p(term.p);
}

ControlFunction ControlFunction::from_path(const SampledPath& path, double p, double scale) {
    SampledPath copy = path;
    Term term{[copy](std::size_t u, std::size_t v) { return (copy.vec(v) - copy.vec(u)).norm(); }, p};
    return ControlFunction(path.grid(), {term}, scale);
}

ControlFunction ControlFunction::scaled(double factor) const {
    return ControlFunction(grid_, terms_, scale_ * factor);
}

double ControlFunction::operator()(std::size_t s, std::size_t t) const {
    if (s >= t) return 0.0;
    double total = 0;
    for (const auto& term : terms_) total += two_param_p_variation_prefix(term.xi, term.p, s, t).back();
    return scale_ * total;
}

std::vector<double> ControlFunction::row(std::size_t s) const {
    std::size_t n = grid_.size();
    std::vector<double> out(n - s, 0.0);
    for (const auto& term : terms_) {
        auto v = two_param_p_variation_prefix(term.xi, term.p, s, n - 1);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += v[j];
    }
    for (double& x : out) x *= scale_;
    return out;
}

std::vector<std::vector<double>> ControlFunction::rows(const std::vector<std::size_t>& starts,
                                                       std::size_t table_limit) const {
    std::size_t n = grid_.size();
    std::vector<std::vector<double>> out;
    if (n > table_limit) {
        for (std::size_t s : starts) out.push_back(row(s));
        return out;
    }
    for (std::size_t s : starts) out.emplace_back(n - s, 0.0);
    std::vector<double> table(n * n, 0.0);
    for (const auto& term : terms_) {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) table[u * n + v] = std::pow(term.xi(u, v), term.p);
        for (std::size_t a = 0; a < starts.size(); ++a) {
            std::size_t s = starts[a];
            std::vector<double> V(n - s, 0.0);
            for (std::size_t j = 1; j < V.size(); ++j) {
                double best = 0;
                for (std::size_t i = 0; i < j; ++i) best = std::max(best, V[i] + table[(s + i) * n + s + j]);
                V[j] = best;
            }
            for (std::size_t j = 0; j < V.size(); ++j) out[a][j] += V[j];
        }
    }
    for (auto& r : out)
        for (double& x : r) x *= scale_;
    return out;
}

double superadditivity_violation(const ControlFunction& c, std::size_t max_nodes) {
    auto nodes = stratified_nodes(c.grid().size(), max_nodes);
    std::size_t m = nodes.size();
    std::vector<std::vector<double>> rows = c.rows(nodes);
    auto at = [&](std::size_t a, std::size_t b) { return rows[a][nodes[b] - nodes[a]]; };
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t u = a; u < m; ++u)
            for (std::size_t b = u; b < m; ++b) worst = std::max(worst, at(a, u) + at(u, b) - at(a, b));
    return worst;
}

}  // namespace rpspt

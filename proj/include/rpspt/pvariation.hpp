#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rpspt/path.hpp"

namespace rpspt {

inline constexpr std::size_t kExactPVarNodes = 20000;

// Sum form sup_P sum |X_{u,v}|^p. When the window holds more than the exact limit of
// nodes, `lower` and `upper` bracket the exact value and `value` is the lower bound.
struct PVariation {
    double value = 0;
    double lower = 0;
    double upper = 0;
    bool exact = true;
    double norm(double p) const;
};

// Norm |Xi_{u,v}| of a two-parameter map at node indices u < v.
using TwoParamNorm = std::function<double(std::size_t, std::size_t)>;

PVariation p_variation_sum(const SampledPath& path, double p, std::size_t s, std::size_t t,
                           std::size_t exact_limit = kExactPVarNodes);
PVariation p_variation_sum(const SampledPath& path, double p, double s, double t,
                           std::size_t exact_limit = kExactPVarNodes);
// Norm variant ||X||_{p,[s,t]}; times must be grid nodes.
double p_variation(const SampledPath& path, double p, double s, double t);
double p_variation(const SampledPath& path, double p);

// V(j) for every j in [s, t]: sum-form p-variation of the window [s, j]. Exact, O(n^2).
std::vector<double> p_variation_prefix(const SampledPath& path, double p, std::size_t s, std::size_t t);

PVariation two_param_p_variation_sum(const TwoParamNorm& xi, const TimeGrid& grid, double p, std::size_t s,
                                     std::size_t t, std::size_t exact_limit = kExactPVarNodes);
double two_param_p_variation(const TwoParamNorm& xi, const TimeGrid& grid, double p, double s, double t);
std::vector<double> two_param_p_variation_prefix(const TwoParamNorm& xi, double p, std::size_t s, std::size_t t);

// c(s,t) = scale * sum_k Var_{p_k}(term_k)[s,t], each term a two-parameter map in sum form.
class ControlFunction {
public:
    struct Term {
        TwoParamNorm xi;
        double p;
    };

    ControlFunction(TimeGrid grid, std::vector<Term> terms, double scale = 1.0);
    // c(s,t) = scale * ||X||_{p,[s,t]}^p
    static ControlFunction from_path(const SampledPath& path, double p, double scale = 1.0);

    const TimeGrid& grid() const { return grid_; }
    double scale() const { return scale_; }
    ControlFunction scaled(double factor) const;

    double operator()(std::size_t s, std::size_t t) const;
    // c(s, j) for j = s..n-1.
    std::vector<double> row(std::size_t s) const;
    // Rows for several starts; tabulates |xi|^p once when the grid has at most `table_limit` nodes.
    std::vector<std::vector<double>> rows(const std::vector<std::size_t>& starts, std::size_t table_limit = 2048) const;

private:
    TimeGrid grid_;
    std::vector<Term> terms_;
    double scale_;
};

// Largest c(s,u) + c(u,t) - c(s,t) over node triples drawn from at most `max_nodes` nodes.
double superadditivity_violation(const ControlFunction& c, std::size_t max_nodes = 200);

// Evenly spread node indices in [0, n), always including both ends.
std::vector<std::size_t> stratified_nodes(std::size_t n, std::size_t count);

}  // namespace rpspt

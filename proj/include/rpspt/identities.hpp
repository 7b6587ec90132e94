#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rpspt/controlled.hpp"
#include "rpspt/errors.hpp"

namespace rpspt {

template <class T>
struct DiscreteMeasure {
    std::vector<T> support;
    std::vector<double> weights;

    void validate() const {
        if (support.empty()) throw MeasureError("measure has empty support");
        if (support.size() != weights.size()) throw MeasureError("support and weight counts differ");
        double total = 0;
        for (double w : weights) {
            if (!(w >= 0)) throw MeasureError("negative measure weight");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw MeasureError("measure weights must sum to 1");
    }

    static DiscreteMeasure uniform(std::vector<T> items) {
        DiscreteMeasure m;
        m.weights.assign(items.size(), items.empty() ? 0.0 : 1.0 / static_cast<double>(items.size()));
        m.support = std::move(items);
        return m;
    }
};

// Value, gradient and Hessian evaluators of a scalar function on R^m.
struct ScalarFunction {
    std::function<double(const Vec&)> f;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
};

struct RoughExponential {
    SampledPath V;
    // sup_t |V_t - 1 - int_0^t V dX|
    double residual = 0;
    bool shifted = false;
};

// V = exp(X - X_0 - [X]/2) for a one-dimensional lift; residual via the compensated
// integral with V' = V.
RoughExponential rough_exponential(const RoughLift& lift);

// sup_t |g(F_t) - g(F_0) - int Dg(F) F' dS - int Dg(F) dGamma - 1/2 int D^2g(F)(F' (x) F') d[S]|
// for F = F_0 + int F' dS + Gamma. `Fpp` optionally carries the derivative of F'
// (m x d x d per node, row-major); when absent F' is treated as locally constant.
double ito_formula_residual(const ScalarFunction& g, const ControlledPath& F, const SampledPath& Gamma,
                            const std::vector<double>* Fpp = nullptr);

// max_t |int (sum w K) dS - sum w int K dS|
double mixture_integral_check(const DiscreteMeasure<ControlledPath>& members, const RoughLift& lift);

// Z = int F . dG on the reference grid with Z' = F G'. Returns the max gap between
// int Y dZ and int (YF) . dG, both evaluated on `level`. Y must be one-dimensional.
double associativity_gap(const ControlledPath& Y, const ControlledPath& F, const ControlledPath& G,
                         const TimeGrid& level);
double associativity_check(const ControlledPath& Y, const ControlledPath& F, const ControlledPath& G);

struct RieReport {
    ConvergenceReport gaps;
    // Smallest kappa with both suprema <= 1 for c = kappa (||S||_p^p + discrete area var).
    double kappa = 0;
    std::vector<double> sup_path_ratio;
    std::vector<double> sup_area_ratio;
    // Levels whose pairs entered the kappa computation.
    std::vector<int> kappa_levels;
    bool converged() const { return gaps.converged(); }
};

// kappa uses node pairs of levels with at most `kappa_max_nodes` nodes.
RieReport rie_diagnostic(const SampledPath& path, const PartitionSequence& partitions, double p = kDefaultP,
                         std::size_t kappa_max_nodes = 513);

// One restricted copy of `lift` per level.
std::vector<LiftPtr> restrict_levels(const RoughLift& lift, const PartitionSequence& partitions);

}  // namespace rpspt

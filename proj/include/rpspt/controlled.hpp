#pragma once

#include <functional>
#include <vector>

#include "rpspt/convergence.hpp"
#include "rpspt/lift.hpp"

namespace rpspt {

using VecFn = std::function<Vec(const Vec&)>;
using MatFn = std::function<Mat(const Vec&)>;

// Value path F (m components) with Gubinelli derivative F' (m x d) against a lift of
// dimension d. R^F_{s,t} = F_{s,t} - F'_s S_{s,t}.
class ControlledPath {
public:
    ControlledPath(LiftPtr ref, SampledPath value, MatrixPath deriv, double q = 0, double r = 0);

    static ControlledPath identity(LiftPtr ref);
    static ControlledPath constant(LiftPtr ref, const Vec& v);
    // F_t = f(S_t), F'_t = Df(S_t) with Df the analytic Jacobian.
    static ControlledPath of_function(LiftPtr ref, const VecFn& f, const MatFn& Df);

    const LiftPtr& ref() const { return ref_; }
    const RoughLift& lift() const { return *ref_; }
    const SampledPath& value() const { return value_; }
    const MatrixPath& deriv() const { return deriv_; }
    std::size_t dim() const { return value_.dim(); }
    std::size_t size() const { return value_.size(); }
    // Defaults q = p and 1/r = 1/p + 1/q.
    double q() const { return q_; }
    double r() const { return r_; }

    Vec remainder(std::size_t s, std::size_t t) const;
    double remainder_norm(std::size_t s, std::size_t t) const;

    // Restrict to the grid of `sub`, which must be a restriction of ref().
    ControlledPath restrict(LiftPtr sub) const;
    // Same node data against another lift on the same grid.
    ControlledPath rebind(LiftPtr other) const;

    ControlledPath operator+(const ControlledPath& o) const;
    ControlledPath operator-(const ControlledPath& o) const;
    ControlledPath scaled(double a) const;

private:
    LiftPtr ref_;
    SampledPath value_;
    MatrixPath deriv_;
    double q_, r_;
};

bool same_reference(const ControlledPath& a, const ControlledPath& b);

// Running sums of F_s . S_{s,t} + tr(F'_s A_{s,t}) over the lift grid.
SampledPath compensated_integral(const ControlledPath& F, const RoughLift& lift);
// Running sums of F_s . G_{s,t} + sum_i F'^{i.}_s A_{s,t} (G'^{i.}_s)^T.
SampledPath integral(const ControlledPath& F, const ControlledPath& G);
// Matrix-valued int F (x) dG with correction F'_s A_{s,t} G'^T_s.
MatrixPath integral_outer(const ControlledPath& F, const ControlledPath& G);

// Left-point Riemann sums of int Y . dG on `partition`, evaluated at every node of the
// path grid with the cells truncated at t.
SampledPath left_point_sum(const SampledPath& Y, const SampledPath& G, const TimeGrid& partition);

struct LeftPointResult {
    std::vector<SampledPath> levels;
    // Sup distance between successive levels.
    ConvergenceReport report;
};
LeftPointResult left_point_integral(const SampledPath& Y, const SampledPath& G, const PartitionSequence& partitions);

// Riemann-Stieltjes sums sum Y_s . A_{s,t}; A of finite variation.
SampledPath young_integral(const SampledPath& Y, const SampledPath& A);

// Componentwise product; a one-component factor broadcasts.
ControlledPath product(const ControlledPath& F, const ControlledPath& G);

// Lift of Z with area int_s^t Z (x) dZ - Z_s (x) Z_{s,t}.
RoughLift canonical_lift(const ControlledPath& Z);

}  // namespace rpspt

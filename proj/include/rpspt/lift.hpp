#pragma once

#include <cstdint>
#include <memory>

#include "rpspt/convergence.hpp"
#include "rpspt/path.hpp"

namespace rpspt {

inline constexpr double kDefaultP = 2.5;

// A path together with its iterated integral I_t = int_0^t S (x) dS. The area
// A_{s,t} = I_t - I_s - S_s (x) S_{s,t} is rebuilt on demand.
class RoughLift {
public:
    RoughLift(SampledPath base, MatrixPath iterated, double p = kDefaultP);

    // Left-point sums on the path grid.
    static RoughLift left_point(const SampledPath& path, double p = kDefaultP);
    // Iterated integral of the piecewise-linear interpolation; the bracket vanishes.
    static RoughLift geometric(const SampledPath& path, double p = kDefaultP);

    const SampledPath& base() const { return base_; }
    const MatrixPath& iterated() const { return iter_; }
    const TimeGrid& grid() const { return base_.grid(); }
    std::size_t size() const { return base_.size(); }
    std::size_t dim() const { return base_.dim(); }
    double p() const { return p_; }

    Mat area(std::size_t s, std::size_t t) const;
    // Writes the d x d area row-major into out.
    void area_into(std::size_t s, std::size_t t, double* out) const;
    double area_norm(std::size_t s, std::size_t t) const;

    // Exact: node values of S and I carry over to any sub-grid.
    RoughLift restrict(const TimeGrid& sub) const;
    bool same_as(const RoughLift& o) const;

private:
    SampledPath base_;
    MatrixPath iter_;
    double p_;
};

using LiftPtr = std::shared_ptr<const RoughLift>;
LiftPtr share(RoughLift lift);

struct LiftResult {
    RoughLift lift;
    ConvergenceReport report;
};

// Lift on the finest partition; the report holds sup distances between successive
// levels' Riemann-sum paths of int S (x) dS.
LiftResult lift_via_left_point(const SampledPath& path, const PartitionSequence& partitions,
                               double p = kDefaultP);

Mat chen_residual(const RoughLift& lift, std::size_t s, std::size_t u, std::size_t t);
// Max-abs Chen residual over random node triples.
double max_chen_residual(const RoughLift& lift, std::size_t triples, std::uint64_t seed);

struct BracketPath {
    MatrixPath values;
    // Largest defining-identity residual over the checked node pairs.
    double identity_residual = 0;
    // |[S]_T - sum of squared increments on the lift grid|.
    double partition_sum_gap = 0;
    Mat increment(std::size_t s, std::size_t t) const { return values.mat(t) - values.mat(s); }
};

BracketPath bracket(const RoughLift& lift, std::size_t checked_pairs = 1000, std::uint64_t seed = 1);
// Bracket path only, no checks.
MatrixPath bracket_values(const RoughLift& lift);

}  // namespace rpspt

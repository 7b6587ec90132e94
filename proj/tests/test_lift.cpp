#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "rpspt/errors.hpp"
#include "rpspt/lift.hpp"

using namespace rpspt;

namespace {

SampledPath identity_path(std::size_t steps) {
    return fixtures::tabulate(TimeGrid::uniform(1.0, steps), 1, [](double t) { return std::vector<double>{t}; });
}

}  // namespace

TEST(Lift, SmoothAreaApproachesHalfWithHalvingError) {
    SampledPath x = identity_path(1024);
    auto ps = PartitionSequence::dyadic(x.grid(), 3, 10);
    double prev = 0;
    for (std::size_t l = 0; l < ps.size(); ++l) {
        RoughLift L = RoughLift::left_point(x.restrict(ps[l]));
        double err = std::abs(0.5 - L.iterated().mat(L.size() - 1)(0, 0));
        // Left-point sum of int u du on n cells is 1/2 - 1/(2n).
        EXPECT_NEAR(err, 0.5 / static_cast<double>(L.size() - 1), 1e-14);
        if (l > 0) EXPECT_NEAR(err / prev, 0.5, 1e-9);
        prev = err;
    }
}

TEST(Lift, ConstantPathHasZeroArea) {
    SampledPath x = SampledPath::constant(TimeGrid::uniform(1.0, 16), Vec::Constant(2, 1.5));
    RoughLift L = RoughLift::left_point(x);
    EXPECT_EQ(L.area(0, 16).norm(), 0.0);
    EXPECT_EQ(L.area(3, 9).norm(), 0.0);
}

TEST(Lift, ChenResidualVanishes) {
    SampledPath x = fixtures::brownian(2, 2000, 1.0, 11);
    RoughLift L = RoughLift::left_point(x);
    EXPECT_LE(max_chen_residual(L, 500, 3), 1e-12);
    EXPECT_EQ(chen_residual(L, 4, 4, 90).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(chen_residual(L, 4, 90, 90).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(chen_residual(L, 5, 3, 9), GridAlignmentError);
    RoughLift G = RoughLift::geometric(x);
    EXPECT_LE(max_chen_residual(G, 500, 4), 1e-12);
}

TEST(Lift, RestrictionKeepsNodeData) {
    SampledPath x = fixtures::brownian(2, 64, 1.0, 2);
    RoughLift L = RoughLift::left_point(x);
    TimeGrid sub = TimeGrid::uniform(1.0, 8);
    RoughLift R = L.restrict(sub);
    EXPECT_EQ((R.area(1, 5) - L.area(8, 40)).norm(), 0.0);
}

TEST(Lift, ViaLeftPointNeedsTwoLevelsAndValidP) {
    SampledPath x = fixtures::brownian(1, 64, 1.0, 2);
    auto one = PartitionSequence::dyadic(x.grid(), 6, 6);
    auto many = PartitionSequence::dyadic(x.grid(), 2, 6);
    EXPECT_THROW(lift_via_left_point(x, one), DiagnosticUnavailableError);
    EXPECT_THROW(lift_via_left_point(x, many, 3.5), ParameterError);
    LiftResult r = lift_via_left_point(x, many);
    EXPECT_EQ(r.report.gap.size(), 4u);
    EXPECT_EQ(r.lift.size(), 65u);
}

TEST(Lift, ViaLeftPointSmoothGapsHalve) {
    SampledPath x = identity_path(1024);
    LiftResult r = lift_via_left_point(x, PartitionSequence::dyadic(x.grid(), 3, 10));
    for (double q : r.report.ratios()) EXPECT_NEAR(q, 0.5, 0.02);
    EXPECT_TRUE(r.report.converged());
}

TEST(Bracket, DefiningIdentityAndPartitionSum) {
    SampledPath x = fixtures::brownian(2, 4096, 1.0, 21);
    RoughLift L = RoughLift::left_point(x);
    BracketPath b = bracket(L, 2000, 5);
    EXPECT_LE(b.identity_residual, 1e-12);
    EXPECT_LE(b.partition_sum_gap, 1e-10);
    Mat BT = b.values.mat(L.size() - 1);
    EXPECT_LE((BT - BT.transpose()).norm(), 1e-14);
    // Independent oracle: squared increments summed straight from the samples.
    double qv = 0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) qv += std::pow(x(k + 1, 0) - x(k, 0), 2);
    EXPECT_NEAR(BT(0, 0), qv, 1e-10);
    EXPECT_NEAR(BT(0, 0), 1.0, 0.1);
    for (std::size_t k = 0; k + 1 < L.size(); ++k) {
        EXPECT_GE(b.values.mat(k + 1)(0, 0), b.values.mat(k)(0, 0) - 1e-12);
        EXPECT_GE(b.values.mat(k + 1)(1, 1), b.values.mat(k)(1, 1) - 1e-12);
    }
}

TEST(Bracket, SmoothPathBracketScalesWithMesh) {
    for (std::size_t n : {64u, 256u, 1024u}) {
        SampledPath x = fixtures::tabulate(TimeGrid::uniform(1.0, n), 2,
                                           [](double t) { return std::vector<double>{t, 2 * t}; });
        Mat BT = bracket_values(RoughLift::left_point(x)).mat(n);
        EXPECT_LE(BT.norm(), 5.0 / static_cast<double>(n));
    }
}

TEST(Bracket, GeometricLiftHasNoBracket) {
    SampledPath x = fixtures::brownian(3, 500, 1.0, 5);
    BracketPath b = bracket(RoughLift::geometric(x));
    EXPECT_LE(b.values.mat(500).cwiseAbs().maxCoeff(), 1e-12);
}

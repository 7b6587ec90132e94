#include "rpspt/lift.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

MatrixPath build_iterated(const SampledPath& s, bool geometric) {
    std::size_t n = s.size(), d = s.dim();
    std::vector<double> I(n * d * d, 0.0);
    std::vector<double> dx(d);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double* a = s.row(k);
        const double* b = s.row(k + 1);
        for (std::size_t j = 0; j < d; ++j) dx[j] = b[j] - a[j];
        const double* prev = I.data() + k * d * d;
        double* next = I.data() + (k + 1) * d * d;
        for (std::size_t i = 0; i < d; ++i) {
            double left = geometric ? a[i] + 0.5 * dx[i] : a[i];
            for (std::size_t j = 0; j < d; ++j) next[i * d + j] = prev[i * d + j] + left * dx[j];
        }
    }
    return MatrixPath(s.grid(), d, d, std::move(I));
}

}  // namespace

RoughLift::RoughLift(SampledPath base, MatrixPath iterated, double p)
    : base_(std::move(base)), iter_(std::move(iterated)), p_(p) {
    if (iter_.rows() != base_.dim() || iter_.cols() != base_.dim() || !iter_.grid().same_as(base_.grid()))
        throw ParameterError("iterated integral shape does not match the base path");
    if (!(p_ >= 1.0)) throw ParameterError("lift regularity p must be >= 1");
}

RoughLift RoughLift::left_point(const SampledPath& path, double p) {
    return RoughLift(path, build_iterated(path, false), p);
}

RoughLift RoughLift::geometric(const SampledPath& path, double p) {
    return RoughLift(path, build_iterated(path, true), p);
}

void RoughLift::area_into(std::size_t s, std::size_t t, double* out) const {
    std::size_t d = dim();
    const double* Is = iter_.flat().row(s);
    const double* It = iter_.flat().row(t);
    const double* xs = base_.row(s);
    const double* xt = base_.row(t);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = It[i * d + j] - Is[i * d + j] - xs[i] * (xt[j] - xs[j]);
}

Mat RoughLift::area(std::size_t s, std::size_t t) const {
    Mat a(dim(), dim());
    area_into(s, t, a.data());
    return a;
}

double RoughLift::area_norm(std::size_t s, std::size_t t) const {
    std::size_t d = dim();
    if (d <= 8) {
        std::array<double, 64> buf{};
        area_into(s, t, buf.data());
        double sq = 0;
        for (std::size_t i = 0; i < d * d; ++i) sq += buf[i] * buf[i];
        return std::sqrt(sq);
    }
    return area(s, t).norm();
}

RoughLift RoughLift::restrict(const TimeGrid& sub) const {
    return RoughLift(base_.restrict(sub), iter_.restrict(sub), p_);
}

bool RoughLift::same_as(const RoughLift& o) const {
    if (this == &o) return true;
    return p_ == o.p_ && grid().same_as(o.grid()) && base_.data() == o.base_.data() &&
           iter_.flat().data() == o.iter_.flat().data();
}

LiftPtr share(RoughLift lift) { return std::make_shared<const RoughLift>(std::move(lift)); }

LiftResult lift_via_left_point(const SampledPath& path, const PartitionSequence& partitions, double p) {
    if (!(p > 2 && p < 3)) throw ParameterError("lift needs p in (2,3)");
    if (partitions.size() < 2) throw DiagnosticUnavailableError("convergence diagnostic needs at least 2 levels");
    const TimeGrid& fine = partitions.finest();
    SampledPath S = path.restrict(fine);
    std::size_t n = S.size(), d = S.dim();

    // Riemann-sum path of level n evaluated at every finest node.
    auto riemann = [&](const TimeGrid& level) {
        auto idx = fine.embed(level);
        std::vector<double> out(n * d * d, 0.0);
        std::size_t cell = 0;
        std::vector<double> acc(d * d, 0.0);
        for (std::size_t k = 1; k < n; ++k) {
            while (cell + 1 < idx.size() && idx[cell + 1] < k) {
                // close the cell [idx[cell], idx[cell+1]]
                const double* a = S.row(idx[cell]);
                const double* b = S.row(idx[cell + 1]);
                for (std::size_t i = 0; i < d; ++i)
                    for (std::size_t j = 0; j < d; ++j) acc[i * d + j] += a[i] * (b[j] - a[j]);
                ++cell;
            }
            const double* a = S.row(idx[cell]);
            const double* b = S.row(k);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) out[k * d * d + i * d + j] = acc[i * d + j] + a[i] * (b[j] - a[j]);
        }
        return out;
    };

    LiftResult res{RoughLift::left_point(S, p), {}};
    auto prev = riemann(partitions[0]);
    for (std::size_t l = 1; l < partitions.size(); ++l) {
        auto cur = riemann(partitions[l]);
        double sup = 0;
        for (std::size_t k = 0; k < n; ++k) {
            double sq = 0;
            for (std::size_t e = 0; e < d * d; ++e) {
                double diff = cur[k * d * d + e] - prev[k * d * d + e];
                sq += diff * diff;
            }
            sup = std::max(sup, std::sqrt(sq));
        }
        res.report.add(partitions.level_id(l), partitions[l].mesh(), sup);
        prev = std::move(cur);
    }
    return res;
}

Mat chen_residual(const RoughLift& lift, std::size_t s, std::size_t u, std::size_t t) {
    if (!(s <= u && u <= t && t < lift.size())) throw GridAlignmentError("Chen triple must satisfy s <= u <= t");
    Vec su = lift.base().increment(s, u), ut = lift.base().increment(u, t);
    return lift.area(s, t) - lift.area(s, u) - lift.area(u, t) - su * ut.transpose();
}

double max_chen_residual(const RoughLift& lift, std::size_t triples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, lift.size() - 1);
    double worst = 0;
    for (std::size_t k = 0; k < triples; ++k) {
        std::array<std::size_t, 3> v{pick(rng), pick(rng), pick(rng)};
        std::sort(v.begin(), v.end());
        worst = std::max(worst, chen_residual(lift, v[0], v[1], v[2]).cwiseAbs().maxCoeff());
    }
    return worst;
}

MatrixPath bracket_values(const RoughLift& lift) {
    std::size_t n = lift.size(), d = lift.dim();
    std::vector<double> out(n * d * d);
    std::vector<double> a(d * d);
    for (std::size_t k = 0; k < n; ++k) {
        lift.area_into(0, k, a.data());
        const double* x0 = lift.base().row(0);
        const double* xk = lift.base().row(k);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                out[k * d * d + i * d + j] = (xk[i] - x0[i]) * (xk[j] - x0[j]) - (a[i * d + j] + a[j * d + i]);
    }
    return MatrixPath(lift.grid(), d, d, std::move(out));
}

BracketPath bracket(const RoughLift& lift, std::size_t checked_pairs, std::uint64_t seed) {
    BracketPath b{bracket_values(lift), 0, 0};
    std::size_t n = lift.size();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t k = 0; k < checked_pairs; ++k) {
        std::size_t s = pick(rng), t = pick(rng);
        if (s > t) std::swap(s, t);
        Vec x = lift.base().increment(s, t);
        Mat A = lift.area(s, t);
        Mat rhs = x * x.transpose() - (A + A.transpose());
        b.identity_residual = std::max(b.identity_residual, (b.increment(s, t) - rhs).cwiseAbs().maxCoeff());
    }
    Mat sum = Mat::Zero(lift.dim(), lift.dim());
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Vec x = lift.base().increment(k, k + 1);
        sum += x * x.transpose();
    }
    b.partition_sum_gap = (b.values.mat(n - 1) - sum).cwiseAbs().maxCoeff();
    return b;
}

}  // namespace rpspt

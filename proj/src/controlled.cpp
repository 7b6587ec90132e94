#include "rpspt/controlled.hpp"

#include <algorithm>
#include <cmath>

#include "rpspt/errors.hpp"

namespace rpspt {

ControlledPath::ControlledPath(LiftPtr ref, SampledPath value, MatrixPath deriv, double q, double r)
    : ref_(std::move(ref)), value_(std::move(value)), deriv_(std::move(deriv)) {
    if (!ref_) throw ParameterError("controlled path needs a reference lift");
    if (!value_.grid().same_as(ref_->grid()) || !deriv_.grid().same_as(ref_->grid()))
        throw GridAlignmentError("controlled path and reference lift use different grids");
    if (deriv_.rows() != value_.dim() || deriv_.cols() != ref_->dim())
        throw ParameterError("Gubinelli derivative must be m x d");
    double p = ref_->p();
    q_ = q > 0 ? q : p;
    r_ = r > 0 ? r : 1.0 / (1.0 / p + 1.0 / q_);
}

ControlledPath ControlledPath::identity(LiftPtr ref) {
    std::size_t n = ref->size(), d = ref->dim();
    std::vector<double> D(n * d * d, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < d; ++i) D[k * d * d + i * d + i] = 1.0;
    SampledPath v = ref->base();
    TimeGrid g = ref->grid();
    return ControlledPath(std::move(ref), std::move(v), MatrixPath(g, d, d, std::move(D)));
}

ControlledPath ControlledPath::constant(LiftPtr ref, const Vec& v) {
    std::size_t n = ref->size(), d = ref->dim(), m = static_cast<std::size_t>(v.size());
    TimeGrid g = ref->grid();
    return ControlledPath(std::move(ref), SampledPath::constant(g, v), MatrixPath(g, m, d, std::vector<double>(n * m * d, 0.0)));
}

ControlledPath ControlledPath::of_function(LiftPtr ref, const VecFn& f, const MatFn& Df) {
    std::size_t n = ref->size(), d = ref->dim();
    Vec f0 = f(ref->base().vec(0));
    std::size_t m = static_cast<std::size_t>(f0.size());
    std::vector<double> val(n * m), der(n * m * d);
    for (std::size_t k = 0; k < n; ++k) {
        Vec x = ref->base().vec(k);
        Vec fx = k == 0 ? f0 : f(x);
        Mat J = Df(x);
        if (static_cast<std::size_t>(J.rows()) != m || static_cast<std::size_t>(J.cols()) != d)
            throw ParameterError("derivative evaluator returned the wrong shape");
        for (std::size_t i = 0; i < m; ++i) {
            val[k * m + i] = fx[static_cast<Eigen::Index>(i)];
            for (std::size_t a = 0; a < d; ++a)
                der[(k * m + i) * d + a] = J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a));
        }
    }
    TimeGrid g = ref->grid();
    return ControlledPath(std::move(ref), SampledPath(g, m, std::move(val)), MatrixPath(g, m, d, std::move(der)));
}

Vec ControlledPath::remainder(std::size_t s, std::size_t t) const {
    return value_.increment(s, t) - deriv_.mat(s) * ref_->base().increment(s, t);
}

double ControlledPath::remainder_norm(std::size_t s, std::size_t t) const {
    std::size_t m = dim(), d = ref_->dim();
    const double* Fs = value_.row(s);
    const double* Ft = value_.row(t);
    const double* D = deriv_.flat().row(s);
    const double* xs = ref_->base().row(s);
    const double* xt = ref_->base().row(t);
    double sq = 0;
    for (std::size_t i = 0; i < m; ++i) {
        double r = Ft[i] - Fs[i];
        for (std::size_t a = 0; a < d; ++a) r -= D[i * d + a] * (xt[a] - xs[a]);
        sq += r * r;
    }
    return std::sqrt(sq);
}

ControlledPath ControlledPath::restrict(LiftPtr sub) const {
    TimeGrid g = sub->grid();
    return ControlledPath(std::move(sub), value_.restrict(g), deriv_.restrict(g), q_, r_);
}

ControlledPath ControlledPath::rebind(LiftPtr other) const {
    return ControlledPath(std::move(other), value_, deriv_, q_, r_);
}

bool same_reference(const ControlledPath& a, const ControlledPath& b) {
    return a.ref() == b.ref() || a.lift().same_as(b.lift());
}

namespace {

void require_same(const ControlledPath& a, const ControlledPath& b) {
    if (!same_reference(a, b)) throw ReferenceMismatchError("controlled paths use different reference lifts");
}

ControlledPath combine(const ControlledPath& a, const ControlledPath& b, double sb) {
    require_same(a, b);
    if (a.dim() != b.dim()) throw ParameterError("controlled paths differ in dimension");
    std::vector<double> v = a.value().data(), D = a.deriv().flat().data();
    const auto& bv = b.value().data();
    const auto& bD = b.deriv().flat().data();
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += sb * bv[k];
    for (std::size_t k = 0; k < D.size(); ++k) D[k] += sb * bD[k];
    TimeGrid g = a.lift().grid();
    return ControlledPath(a.ref(), SampledPath(g, a.dim(), std::move(v)),
                          MatrixPath(g, a.dim(), a.lift().dim(), std::move(D)), a.q(), a.r());
}

}  // namespace

ControlledPath ControlledPath::operator+(const ControlledPath& o) const { return combine(*this, o, 1.0); }
ControlledPath ControlledPath::operator-(const ControlledPath& o) const { return combine(*this, o, -1.0); }

ControlledPath ControlledPath::scaled(double a) const {
    std::vector<double> v = value_.data(), D = deriv_.flat().data();
    for (double& x : v) x *= a;
    for (double& x : D) x *= a;
    TimeGrid g = ref_->grid();
    return ControlledPath(ref_, SampledPath(g, dim(), std::move(v)), MatrixPath(g, dim(), ref_->dim(), std::move(D)), q_, r_);
}

SampledPath compensated_integral(const ControlledPath& F, const RoughLift& lift) {
    if (!F.lift().same_as(lift)) throw ReferenceMismatchError("integrand is controlled against another lift");
    if (F.dim() != lift.dim()) throw ParameterError("integrand must have the lift dimension");
    std::size_t n = lift.size(), d = lift.dim();
    std::vector<double> out(n, 0.0), A(d * d);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        lift.area_into(k, k + 1, A.data());
        const double* f = F.value().row(k);
        const double* D = F.deriv().flat().row(k);
        const double* x0 = lift.base().row(k);
        const double* x1 = lift.base().row(k + 1);
        double s = 0;
        for (std::size_t i = 0; i < d; ++i) {
            s += f[i] * (x1[i] - x0[i]);
            for (std::size_t a = 0; a < d; ++a) s += D[i * d + a] * A[a * d + i];
        }
        out[k + 1] = out[k] + s;
    }
    return SampledPath(lift.grid(), 1, std::move(out));
}

SampledPath integral(const ControlledPath& F, const ControlledPath& G) {
    require_same(F, G);
    if (F.dim() != G.dim()) throw ParameterError("integrand and integrator differ in dimension");
    const RoughLift& lift = F.lift();
    std::size_t n = lift.size(), d = lift.dim(), m = F.dim();
    std::vector<double> out(n, 0.0), A(d * d), FA(m * d);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        lift.area_into(k, k + 1, A.data());
        const double* f = F.value().row(k);
        const double* g0 = G.value().row(k);
        const double* g1 = G.value().row(k + 1);
        const double* Df = F.deriv().flat().row(k);
        const double* Dg = G.deriv().flat().row(k);
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) {
            s += f[i] * (g1[i] - g0[i]);
            for (std::size_t a = 0; a < d; ++a) {
                double fa = Df[i * d + a];
                if (fa == 0.0) continue;
                for (std::size_t b = 0; b < d; ++b) s += fa * A[a * d + b] * Dg[i * d + b];
            }
        }
        out[k + 1] = out[k] + s;
    }
    return SampledPath(lift.grid(), 1, std::move(out));
}

MatrixPath integral_outer(const ControlledPath& F, const ControlledPath& G) {
    require_same(F, G);
    const RoughLift& lift = F.lift();
    std::size_t n = lift.size(), d = lift.dim(), m = F.dim(), l = G.dim();
    std::vector<double> out(n * m * l, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Mat A = lift.area(k, k + 1);
        Mat corr = F.deriv().mat(k) * A * G.deriv().mat(k).transpose();
        Vec dG = G.value().increment(k, k + 1);
        auto f = F.value().vec(k);
        double* cur = out.data() + (k + 1) * m * l;
        const double* prev = out.data() + k * m * l;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < l; ++j) {
                auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                cur[i * l + j] = prev[i * l + j] + f[ii] * dG[jj] + corr(ii, jj);
            }
    }
    return MatrixPath(lift.grid(), m, l, std::move(out));
}

SampledPath left_point_sum(const SampledPath& Y, const SampledPath& G, const TimeGrid& partition) {
    if (!Y.grid().same_as(G.grid())) throw GridAlignmentError("integrand and integrator use different grids");
    if (Y.dim() != G.dim()) throw ParameterError("integrand and integrator differ in dimension");
    auto idx = Y.grid().embed(partition);
    if (idx.front() != 0 || idx.back() != Y.size() - 1)
        throw GridAlignmentError("partition must span the path horizon");
    std::size_t n = Y.size(), m = Y.dim();
    std::vector<double> out(n, 0.0);
    double acc = 0;
    std::size_t cell = 0;
    auto dot_inc = [&](std::size_t s, std::size_t t) {
        double v = 0;
        for (std::size_t i = 0; i < m; ++i) v += Y(s, i) * (G(t, i) - G(s, i));
        return v;
    };
    for (std::size_t k = 1; k < n; ++k) {
        while (cell + 1 < idx.size() && idx[cell + 1] < k) {
            acc += dot_inc(idx[cell], idx[cell + 1]);
            ++cell;
        }
        out[k] = acc + dot_inc(idx[cell], k);
    }
    return SampledPath(Y.grid(), 1, std::move(out));
}

LeftPointResult left_point_integral(const SampledPath& Y, const SampledPath& G, const PartitionSequence& partitions) {
    LeftPointResult res;
    for (std::size_t l = 0; l < partitions.size(); ++l) {
        res.levels.push_back(left_point_sum(Y, G, partitions[l]));
        if (l > 0) {
            double sup = 0;
            const auto& a = res.levels[l - 1].data();
            const auto& b = res.levels[l].data();
            for (std::size_t k = 0; k < a.size(); ++k) sup = std::max(sup, std::abs(a[k] - b[k]));
            res.report.add(partitions.level_id(l), partitions[l].mesh(), sup);
        }
    }
    return res;
}

SampledPath young_integral(const SampledPath& Y, const SampledPath& A) {
    if (!Y.grid().same_as(A.grid())) throw GridAlignmentError("integrand and integrator use different grids");
    if (Y.dim() != A.dim()) throw ParameterError("integrand and integrator differ in dimension");
    std::size_t n = Y.size(), m = Y.dim();
    std::vector<double> out(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < m; ++i) s += Y(k, i) * (A(k + 1, i) - A(k, i));
        out[k + 1] = out[k] + s;
    }
    return SampledPath(Y.grid(), 1, std::move(out));
}

ControlledPath product(const ControlledPath& F, const ControlledPath& G) {
    require_same(F, G);
    std::size_t mf = F.dim(), mg = G.dim();
    if (mf != mg && mf != 1 && mg != 1) throw ParameterError("product needs equal dimensions or a scalar factor");
    std::size_t m = std::max(mf, mg), n = F.size(), d = F.lift().dim();
    std::vector<double> v(n * m), D(n * m * d);
    for (std::size_t k = 0; k < n; ++k) {
        const double* f = F.value().row(k);
        const double* g = G.value().row(k);
        const double* Df = F.deriv().flat().row(k);
        const double* Dg = G.deriv().flat().row(k);
        for (std::size_t i = 0; i < m; ++i) {
            std::size_t fi = mf == 1 ? 0 : i, gi = mg == 1 ? 0 : i;
            v[k * m + i] = f[fi] * g[gi];
            for (std::size_t a = 0; a < d; ++a)
                D[(k * m + i) * d + a] = Df[fi * d + a] * g[gi] + f[fi] * Dg[gi * d + a];
        }
    }
    TimeGrid grid = F.lift().grid();
    return ControlledPath(F.ref(), SampledPath(grid, m, std::move(v)), MatrixPath(grid, m, d, std::move(D)), F.q(), F.r());
}

RoughLift canonical_lift(const ControlledPath& Z) {
    return RoughLift(Z.value(), integral_outer(Z, Z), Z.lift().p());
}

}  // namespace rpspt

#include "rpspt/identities.hpp"

#include <algorithm>
#include <cmath>

#include "rpspt/pvariation.hpp"

namespace rpspt {

std::vector<LiftPtr> restrict_levels(const RoughLift& lift, const PartitionSequence& partitions) {
    std::vector<LiftPtr> out;
    for (std::size_t l = 0; l < partitions.size(); ++l) out.push_back(share(lift.restrict(partitions[l])));
    return out;
}

RoughExponential rough_exponential(const RoughLift& lift) {
    if (lift.dim() != 1) throw ParameterError("rough exponential needs a one-dimensional lift");
    RoughExponential res;
    std::size_t n = lift.size();
    double x0 = lift.base()(0, 0);
    res.shifted = x0 != 0.0;
    MatrixPath br = bracket_values(lift);
    std::vector<double> V(n);
    for (std::size_t k = 0; k < n; ++k) V[k] = std::exp(lift.base()(k, 0) - x0 - 0.5 * br.mat(k)(0, 0));
    double integral = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            double dx = lift.base()(k, 0) - lift.base()(k - 1, 0);
            integral += V[k - 1] * dx + V[k - 1] * lift.area(k - 1, k)(0, 0);
        }
        res.residual = std::max(res.residual, std::abs(V[k] - 1.0 - integral));
    }
    res.V = SampledPath(lift.grid(), 1, std::move(V));
    return res;
}

double ito_formula_residual(const ScalarFunction& g, const ControlledPath& F, const SampledPath& Gamma,
                            const std::vector<double>* Fpp) {
    const RoughLift& lift = F.lift();
    if (!Gamma.grid().same_as(lift.grid()) || Gamma.dim() != F.dim())
        throw GridAlignmentError("finite-variation part must share the grid and dimension of F");
    std::size_t n = lift.size(), d = lift.dim(), m = F.dim();
    if (Fpp && Fpp->size() != n * m * d * d) throw ParameterError("second derivative data has the wrong size");
    MatrixPath br = bracket_values(lift);
    double g0 = g.f(F.value().vec(0));
    double acc = 0, worst = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        Vec x = F.value().vec(k);
        Vec Dg = g.grad(x);
        Mat H2 = g.hess(x);
        Mat Fp = F.deriv().mat(k);
        Vec h = Fp.transpose() * Dg;
        // Derivative of h^b with respect to S^a.
        Mat hp = Fp.transpose() * H2 * Fp;
        if (Fpp) {
            const double* T = Fpp->data() + k * m * d * d;
            for (std::size_t b = 0; b < d; ++b)
                for (std::size_t a = 0; a < d; ++a) {
                    double s = 0;
                    for (std::size_t i = 0; i < m; ++i) s += Dg[static_cast<Eigen::Index>(i)] * T[(i * d + b) * d + a];
                    hp(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) += s;
                }
        }
        Mat A = lift.area(k, k + 1);
        Vec dS = lift.base().increment(k, k + 1);
        double rough = h.dot(dS) + (hp.array() * A.transpose().array()).sum();
        double young = Dg.dot(Gamma.increment(k, k + 1));
        Mat dB = br.mat(k + 1) - br.mat(k);
        double second = 0.5 * (H2.array() * (Fp * dB * Fp.transpose()).array()).sum();
        acc += rough + young + second;
        double lhs = g.f(F.value().vec(k + 1)) - g0;
        worst = std::max(worst, std::abs(lhs - acc));
    }
    return worst;
}

double mixture_integral_check(const DiscreteMeasure<ControlledPath>& members, const RoughLift& lift) {
    members.validate();
    ControlledPath mix = members.support[0].scaled(members.weights[0]);
    std::vector<double> sep(lift.size(), 0.0);
    for (std::size_t i = 0; i < members.support.size(); ++i) {
        if (i > 0) mix = mix + members.support[i].scaled(members.weights[i]);
        SampledPath I = compensated_integral(members.support[i], lift);
        for (std::size_t k = 0; k < sep.size(); ++k) sep[k] += members.weights[i] * I(k, 0);
    }
    SampledPath joint = compensated_integral(mix, lift);
    double worst = 0;
    for (std::size_t k = 0; k < sep.size(); ++k) worst = std::max(worst, std::abs(joint(k, 0) - sep[k]));
    return worst;
}

double associativity_gap(const ControlledPath& Y, const ControlledPath& F, const ControlledPath& G,
                         const TimeGrid& level) {
    if (!same_reference(Y, F) || !same_reference(F, G))
        throw ReferenceMismatchError("associativity inputs use different reference lifts");
    if (Y.dim() != 1) throw ParameterError("associativity check needs a scalar Y");
    const RoughLift& lift = F.lift();
    std::size_t n = lift.size(), d = lift.dim(), m = F.dim();
    SampledPath Zv = integral(F, G);
    std::vector<double> Zd(n * d, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double* f = F.value().row(k);
        const double* Dg = G.deriv().flat().row(k);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t a = 0; a < d; ++a) Zd[k * d + a] += f[i] * Dg[i * d + a];
    }
    ControlledPath Z(F.ref(), Zv, MatrixPath(lift.grid(), 1, d, std::move(Zd)));
    LiftPtr sub = share(lift.restrict(level));
    ControlledPath Yl = Y.restrict(sub), Fl = F.restrict(sub), Gl = G.restrict(sub), Zl = Z.restrict(sub);
    SampledPath lhs = integral(Yl, Zl);
    SampledPath rhs = integral(product(Yl, Fl), Gl);
    double worst = 0;
    for (std::size_t k = 0; k < lhs.size(); ++k) worst = std::max(worst, std::abs(lhs(k, 0) - rhs(k, 0)));
    return worst;
}

double associativity_check(const ControlledPath& Y, const ControlledPath& F, const ControlledPath& G) {
    return associativity_gap(Y, F, G, F.lift().grid());
}

RieReport rie_diagnostic(const SampledPath& path, const PartitionSequence& partitions, double p,
                         std::size_t kappa_max_nodes) {
    RieReport rep;
    rep.gaps = lift_via_left_point(path, partitions, p).report;
    for (std::size_t l = 0; l < partitions.size(); ++l) {
        const TimeGrid& level = partitions[l];
        if (level.size() > kappa_max_nodes) continue;
        RoughLift L = RoughLift::left_point(path.restrict(level), p);
        const SampledPath& S = L.base();
        double sup_path = 0, sup_area = 0;
        auto path_norm = [&](std::size_t u, std::size_t v) { return (S.vec(v) - S.vec(u)).norm(); };
        auto area_norm = [&](std::size_t u, std::size_t v) { return L.area_norm(u, v); };
        for (std::size_t s : stratified_nodes(level.size(), 32)) {
            if (s + 1 >= level.size()) continue;
            auto vp = two_param_p_variation_prefix(path_norm, p, s, level.size() - 1);
            auto va = two_param_p_variation_prefix(area_norm, p / 2, s, level.size() - 1);
            for (std::size_t j = 1; j < vp.size(); ++j) {
                double c = vp[j] + va[j];
                if (c <= 0) continue;
                sup_path = std::max(sup_path, std::pow(path_norm(s, s + j), p) / c);
                sup_area = std::max(sup_area, std::pow(area_norm(s, s + j), p / 2) / c);
            }
        }
        rep.sup_path_ratio.push_back(sup_path);
        rep.sup_area_ratio.push_back(sup_area);
        rep.kappa_levels.push_back(partitions.level_id(l));
        rep.kappa = std::max(rep.kappa, sup_path + sup_area);
    }
    return rep;
}

}  // namespace rpspt

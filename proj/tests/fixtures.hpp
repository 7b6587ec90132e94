#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rpspt/identities.hpp"
#include "rpspt/path.hpp"

namespace fixtures {

// Brownian-like sample: independent Gaussian increments with variance dt per component.
inline rpspt::SampledPath brownian(std::size_t dim, std::size_t steps, double horizon, std::uint64_t seed,
                                   double x0 = 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    double dt = horizon / static_cast<double>(steps);
    std::vector<double> v((steps + 1) * dim, x0);
    for (std::size_t k = 1; k <= steps; ++k)
        for (std::size_t i = 0; i < dim; ++i) v[k * dim + i] = v[(k - 1) * dim + i] + std::sqrt(dt) * z(rng);
    return rpspt::SampledPath(rpspt::TimeGrid::uniform(horizon, steps), dim, std::move(v));
}

// Geometric Brownian prices, positive by construction.
inline rpspt::SampledPath gbm_prices(std::size_t dim, std::size_t steps, double horizon, std::uint64_t seed,
                                     double vol = 0.3) {
    rpspt::SampledPath w = brownian(dim, steps, horizon, seed);
    std::vector<double> v(w.data().size());
    for (std::size_t k = 0; k < w.size(); ++k)
        for (std::size_t i = 0; i < dim; ++i)
            v[k * dim + i] = (1.0 + 0.5 * static_cast<double>(i)) *
                             std::exp(vol * w(k, i) - 0.5 * vol * vol * w.time(k) + 0.05 * w.time(k));
    return rpspt::SampledPath(w.grid(), dim, std::move(v));
}

template <class F>
rpspt::SampledPath tabulate(const rpspt::TimeGrid& g, std::size_t dim, F f) {
    std::vector<double> v(g.size() * dim);
    for (std::size_t k = 0; k < g.size(); ++k) {
        std::vector<double> x = f(g[k]);
        for (std::size_t i = 0; i < dim; ++i) v[k * dim + i] = x[i];
    }
    return rpspt::SampledPath(g, dim, std::move(v));
}

// G(x) = exp(c H(x)) with H the Shannon entropy.
inline rpspt::ScalarFunction entropy_like(double c = 1.0) {
    using rpspt::Mat;
    using rpspt::Vec;
    auto H = [](const Vec& x) { return -(x.array() * x.array().log()).sum(); };
    return {[=](const Vec& x) { return std::exp(c * H(x)); },
            [=](const Vec& x) { return Vec(std::exp(c * H(x)) * c * (-(x.array().log() + 1.0)).matrix()); },
            [=](const Vec& x) {
                Vec g = c * (-(x.array().log() + 1.0)).matrix();
                Mat h = g * g.transpose();
                h.diagonal() -= c * x.cwiseInverse();
                return Mat(std::exp(c * H(x)) * h);
            }};
}

// G(x) = exp(v . x)
inline rpspt::ScalarFunction log_affine(const rpspt::Vec& v) {
    using rpspt::Mat;
    using rpspt::Vec;
    return {[=](const Vec& x) { return std::exp(v.dot(x)); }, [=](const Vec& x) { return Vec(std::exp(v.dot(x)) * v); },
            [=](const Vec& x) { return Mat(std::exp(v.dot(x)) * v * v.transpose()); }};
}

inline rpspt::ScalarFunction constant_fn(double c) {
    using rpspt::Mat;
    using rpspt::Vec;
    return {[=](const Vec&) { return c; }, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
            [](const Vec& x) { return Mat(Mat::Zero(x.size(), x.size())); }};
}

// Smooth interior weights path on the 3-simplex.
inline rpspt::SampledPath smooth_weights(std::size_t steps, double horizon = 1.0) {
    return tabulate(rpspt::TimeGrid::uniform(horizon, steps), 3, [](double t) {
        double a = 0.2 * std::sin(2 * t), b = 0.15 * std::cos(3 * t) - 0.15;
        return std::vector<double>{(1 + a) / 3, (1 + b) / 3, (1 - a - b) / 3};
    });
}

}  // namespace fixtures

#include "rpspt/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rpspt/path.hpp"

namespace rpspt {

void ConvergenceReport::add(int lvl, double m, double g) {
    level.push_back(lvl);
    mesh.push_back(m);
    gap.push_back(g);
}

std::vector<double> ConvergenceReport::ratios() const {
    std::vector<double> r;
    for (std::size_t i = 1; i < gap.size(); ++i) {
        if (gap[i] <= floor) r.push_back(0.0);
        else if (gap[i - 1] <= floor) r.push_back(std::numeric_limits<double>::infinity());
        else r.push_back(gap[i] / gap[i - 1]);
    }
    return r;
}

double ConvergenceReport::max_ratio() const {
    auto r = ratios();
    return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end());
}

double ConvergenceReport::fitted_factor() const {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < gap.size(); ++i) {
        if (gap[i] > floor) {
            x.push_back(level[i]);
            y.push_back(std::log(gap[i]));
        }
    }
    if (x.empty()) return 0.0;
    if (x.size() == 1) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return std::exp(sxy / sxx);
}

bool ConvergenceReport::converged() const {
    if (gap.empty()) return false;
    if (gap.back() <= floor) return true;
    double f = fitted_factor();
    return std::isfinite(f) && f <= threshold;
}

std::vector<int> ConvergenceReport::warn_levels() const {
    std::vector<int> w;
    auto r = ratios();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] > threshold) w.push_back(level[i + 1]);
    return w;
}

void ConvergenceReport::write_csv(std::ostream& out) const {
    out << "level,mesh,gap\n";
    for (std::size_t i = 0; i < gap.size(); ++i)
        out << level[i] << "," << format_double(mesh[i]) << "," << format_double(gap[i]) << "\n";
    auto r = ratios();
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] > threshold) out << "WARN," << level[i + 1] << "," << format_double(r[i]) << "\n";
}

}  // namespace rpspt

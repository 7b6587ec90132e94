#pragma once

#include <ostream>
#include <vector>

namespace rpspt {

inline constexpr double kShrinkThreshold = 0.75;

// Gaps per dyadic level. A level-to-level ratio above the threshold is a WARN row;
// the verdict uses the least-squares per-level factor across all levels.
struct ConvergenceReport {
    std::vector<int> level;
    std::vector<double> mesh;
    std::vector<double> gap;
    double threshold = kShrinkThreshold;
    // Gaps at or below this are treated as exact agreement.
    double floor = 1e-13;

    void add(int lvl, double m, double g);
    std::vector<double> ratios() const;
    double max_ratio() const;
    // exp(slope) of log(gap) against level; 0 when every gap is below the floor.
    double fitted_factor() const;
    bool converged() const;
    std::vector<int> warn_levels() const;
    void write_csv(std::ostream& out) const;
};

}  // namespace rpspt

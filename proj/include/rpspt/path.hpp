#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rpspt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VecMap = Eigen::Map<const Vec>;
using MatMap = Eigen::Map<const Mat>;

// Strictly increasing times starting at 0. Copies share storage.
class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> times);

    static TimeGrid uniform(double horizon, std::size_t steps);

    std::size_t size() const { return t_ ? t_->size() : 0; }
    double operator[](std::size_t k) const { return (*t_)[k]; }
    const std::vector<double>& times() const { return *t_; }
    double horizon() const { return t_->back(); }
    double mesh() const;

    // Index of the node at time t; throws GridAlignmentError when t is not a node.
    std::size_t index_of(double t) const;
    bool contains(double t) const;
    // Largest node index with time <= t (clamped to the grid).
    std::size_t floor_index(double t) const;

    // Indices into this grid of every node of `sub`; throws if sub is not nested.
    std::vector<std::size_t> embed(const TimeGrid& sub) const;
    TimeGrid select(const std::vector<std::size_t>& idx) const;

    bool same_as(const TimeGrid& o) const;

private:
    std::shared_ptr<const std::vector<double>> t_;
};

// One d-vector per node, interpreted piecewise-linear between nodes.
class SampledPath {
public:
    SampledPath() = default;
    SampledPath(TimeGrid grid, std::size_t dim, std::vector<double> values);
    static SampledPath constant(TimeGrid grid, const Vec& v);

    std::size_t size() const { return grid_.size(); }
    std::size_t dim() const { return dim_; }
    const TimeGrid& grid() const { return grid_; }
    double time(std::size_t k) const { return grid_[k]; }

    double operator()(std::size_t k, std::size_t i) const { return v_[k * dim_ + i]; }
    const double* row(std::size_t k) const { return v_.data() + k * dim_; }
    std::span<const double> at(std::size_t k) const { return {row(k), dim_}; }
    VecMap vec(std::size_t k) const { return VecMap(row(k), static_cast<Eigen::Index>(dim_)); }
    Vec increment(std::size_t s, std::size_t t) const { return vec(t) - vec(s); }
    const std::vector<double>& data() const { return v_; }

    Vec eval(double t) const;
    SampledPath restrict(const TimeGrid& sub) const;
    SampledPath component(std::size_t i) const;

private:
    TimeGrid grid_;
    std::size_t dim_ = 0;
    std::vector<double> v_;
};

// A path of rows x cols matrices, stored row-major per node.
class MatrixPath {
public:
    MatrixPath() = default;
    MatrixPath(TimeGrid grid, std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t size() const { return flat_.size(); }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const TimeGrid& grid() const { return flat_.grid(); }
    MatMap mat(std::size_t k) const {
        return MatMap(flat_.row(k), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_));
    }
    const SampledPath& flat() const { return flat_; }
    MatrixPath restrict(const TimeGrid& sub) const;

private:
    SampledPath flat_;
    std::size_t rows_ = 0, cols_ = 0;
};

// Nested grids with mesh at least halving per level.
class PartitionSequence {
public:
    explicit PartitionSequence(std::vector<TimeGrid> levels, std::vector<int> level_ids = {});

    // Dyadic grids {k T / 2^n}, n = coarsest..finest, each looked up in `grid`.
    static PartitionSequence dyadic(const TimeGrid& grid, int coarsest, int finest);

    std::size_t size() const { return levels_.size(); }
    const TimeGrid& operator[](std::size_t i) const { return levels_[i]; }
    const TimeGrid& finest() const { return levels_.back(); }
    int level_id(std::size_t i) const { return ids_[i]; }

private:
    std::vector<TimeGrid> levels_;
    std::vector<int> ids_;
};

// Left-continuous step path holding S_{t_k} on [t_k, t_{k+1}), evaluated on the path grid.
SampledPath piecewise_constant_approx(const SampledPath& path, const TimeGrid& partition);

// CSV with header t,x1,...,xd. Throws ParseError carrying the 1-based line number.
SampledPath read_path_csv(std::istream& in);
SampledPath read_path_csv(const std::string& filename);
void write_path_csv(std::ostream& out, const SampledPath& path);
void write_path_csv(const std::string& filename, const SampledPath& path);

// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace rpspt

#include "rpspt/path.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rpspt/errors.hpp"

namespace rpspt {

namespace {

double node_tolerance(double horizon) { return 1e-12 * std::max(1.0, std::abs(horizon)); }

}  // namespace

TimeGrid::TimeGrid(std::vector<double> times) {
    if (times.size() < 2) throw ParameterError("time grid needs at least 2 nodes");
    if (times[0] != 0.0) throw ParameterError("time grid must start at 0");
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        if (!(times[k + 1] > times[k]) || !std::isfinite(times[k + 1]))
            throw ParameterError("time grid must be strictly increasing at node " + std::to_string(k + 1));
    }
    t_ = std::make_shared<const std::vector<double>>(std::move(times));
}

TimeGrid TimeGrid::uniform(double horizon, std::size_t steps) {
    if (!(horizon > 0) || steps == 0) throw ParameterError("uniform grid needs horizon > 0 and steps >= 1");
    std::vector<double> t(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) t[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
    t[steps] = horizon;
    return TimeGrid(std::move(t));
}

double TimeGrid::mesh() const {
    double m = 0;
    for (std::size_t k = 0; k + 1 < size(); ++k) m = std::max(m, (*t_)[k + 1] - (*t_)[k]);
    return m;
}

std::size_t TimeGrid::floor_index(double t) const {
    const auto& v = *t_;
    auto it = std::upper_bound(v.begin(), v.end(), t + node_tolerance(horizon()));
    if (it == v.begin()) return 0;
    return static_cast<std::size_t>(it - v.begin()) - 1;
}

bool TimeGrid::contains(double t) const {
    std::size_t k = floor_index(t);
    return std::abs((*t_)[k] - t) <= node_tolerance(horizon());
}

std::size_t TimeGrid::index_of(double t) const {
    std::size_t k = floor_index(t);
    if (std::abs((*t_)[k] - t) > node_tolerance(horizon()))
        throw GridAlignmentError("time " + format_double(t) + " is not a grid node");
    return k;
}

std::vector<std::size_t> TimeGrid::embed(const TimeGrid& sub) const {
    std::vector<std::size_t> idx(sub.size());
    for (std::size_t k = 0; k < sub.size(); ++k) idx[k] = index_of(sub[k]);
    return idx;
}

TimeGrid TimeGrid::select(const std::vector<std::size_t>& idx) const {
    std::vector<double> t(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) t[k] = (*t_)[idx[k]];
    return TimeGrid(std::move(t));
}

bool TimeGrid::same_as(const TimeGrid& o) const {
    if (t_ == o.t_) return true;
    if (!t_ || !o.t_) return false;
    return *t_ == *o.t_;
}

SampledPath::SampledPath(TimeGrid grid, std::size_t dim, std::vector<double> values)
    : grid_(std::move(grid)), dim_(dim), v_(std::move(values)) {
    if (dim_ == 0) throw ParameterError("path dimension must be positive");
    if (v_.size() != grid_.size() * dim_) throw ParameterError("value count does not match grid length");
    for (std::size_t k = 0; k < v_.size(); ++k)
        if (!std::isfinite(v_[k])) throw DomainError("non-finite path value at node " + std::to_string(k / dim_));
}

SampledPath SampledPath::constant(TimeGrid grid, const Vec& v) {
    std::size_t n = grid.size(), d = static_cast<std::size_t>(v.size());
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < d; ++i) out[k * d + i] = v[static_cast<Eigen::Index>(i)];
    return SampledPath(std::move(grid), d, std::move(out));
}

Vec SampledPath::eval(double t) const {
    if (t <= grid_[0]) return vec(0);
    if (t >= grid_.horizon()) return vec(size() - 1);
    std::size_t k = grid_.floor_index(t);
    if (k + 1 >= size()) return vec(size() - 1);
    double w = (t - grid_[k]) / (grid_[k + 1] - grid_[k]);
    return (1 - w) * vec(k) + w * vec(k + 1);
}

SampledPath SampledPath::restrict(const TimeGrid& sub) const {
    auto idx = grid_.embed(sub);
    std::vector<double> out(idx.size() * dim_);
    for (std::size_t k = 0; k < idx.size(); ++k)
        std::copy_n(row(idx[k]), dim_, out.begin() + static_cast<std::ptrdiff_t>(k * dim_));
    return SampledPath(sub, dim_, std::move(out));
}

SampledPath SampledPath::component(std::size_t i) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < size(); ++k) out[k] = (*this)(k, i);
    return SampledPath(grid_, 1, std::move(out));
}

MatrixPath::MatrixPath(TimeGrid grid, std::size_t rows, std::size_t cols, std::vector<double> values)
    : flat_(std::move(grid), rows * cols, std::move(values)), rows_(rows), cols_(cols) {}

MatrixPath MatrixPath::restrict(const TimeGrid& sub) const {
    SampledPath f = flat_.restrict(sub);
    return MatrixPath(sub, rows_, cols_, f.data());
}

PartitionSequence::PartitionSequence(std::vector<TimeGrid> levels, std::vector<int> level_ids)
    : levels_(std::move(levels)), ids_(std::move(level_ids)) {
    if (levels_.empty()) throw ParameterError("partition sequence is empty");
    if (ids_.empty())
        for (std::size_t i = 0; i < levels_.size(); ++i) ids_.push_back(static_cast<int>(i));
    if (ids_.size() != levels_.size()) throw ParameterError("level id count mismatch");
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        levels_[i].embed(levels_[i - 1]);
        if (std::abs(levels_[i].horizon() - levels_[i - 1].horizon()) > node_tolerance(levels_[i].horizon()))
            throw GridAlignmentError("partition levels cover different horizons");
        if (levels_[i].mesh() > levels_[i - 1].mesh() / 2 * (1 + 1e-12))
            throw ParameterError("mesh must at least halve between levels");
    }
}

PartitionSequence PartitionSequence::dyadic(const TimeGrid& grid, int coarsest, int finest) {
    if (coarsest < 0 || finest < coarsest || finest > 40) throw ParameterError("invalid dyadic level range");
    double T = grid.horizon();
    std::vector<TimeGrid> levels;
    std::vector<int> ids;
    for (int n = coarsest; n <= finest; ++n) {
        std::size_t cells = std::size_t{1} << n;
        std::vector<std::size_t> idx(cells + 1);
        for (std::size_t k = 0; k <= cells; ++k)
            idx[k] = grid.index_of(T * static_cast<double>(k) / static_cast<double>(cells));
        levels.push_back(grid.select(idx));
        ids.push_back(n);
    }
    return PartitionSequence(std::move(levels), std::move(ids));
}

SampledPath piecewise_constant_approx(const SampledPath& path, const TimeGrid& partition) {
    auto idx = path.grid().embed(partition);
    if (idx.front() != 0 || idx.back() != path.size() - 1)
        throw GridAlignmentError("partition must span the path horizon");
    std::size_t d = path.dim(), n = path.size();
    std::vector<double> out(n * d);
    std::size_t cell = 0;
    for (std::size_t k = 0; k < n; ++k) {
        while (cell + 1 < idx.size() && idx[cell + 1] <= k && k != n - 1) ++cell;
        std::size_t src = (k == n - 1) ? n - 1 : idx[cell];
        std::copy_n(path.row(src), d, out.begin() + static_cast<std::ptrdiff_t>(k * d));
    }
    return SampledPath(path.grid(), d, std::move(out));
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    std::size_t b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("empty field", line);
    double v = 0;
    auto res = std::from_chars(s.data() + b, s.data() + e + 1, v);
    if (res.ec != std::errc() || res.ptr != s.data() + e + 1) throw ParseError("not a number: '" + s + "'", line);
    return v;
}

}  // namespace

SampledPath read_path_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("missing header", 1);
    ++lineno;
    auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t") throw ParseError("header must be t,x1,...,xd", lineno);
    for (std::size_t i = 1; i < header.size(); ++i)
        if (header[i] != "x" + std::to_string(i)) throw ParseError("unexpected column '" + header[i] + "'", lineno);
    std::size_t d = header.size() - 1;
    std::vector<double> t, v;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv(line);
        if (f.size() != d + 1) throw ParseError("expected " + std::to_string(d + 1) + " fields", lineno);
        double tk = parse_number(f[0], lineno);
        if (t.empty() ? tk != 0.0 : !(tk > t.back())) throw ParseError("times must start at 0 and increase", lineno);
        t.push_back(tk);
        for (std::size_t i = 1; i <= d; ++i) {
            double x = parse_number(f[i], lineno);
            if (!std::isfinite(x)) throw ParseError("non-finite value", lineno);
            v.push_back(x);
        }
    }
    if (t.size() < 2) throw ParseError("need at least 2 rows", lineno);
    return SampledPath(TimeGrid(std::move(t)), d, std::move(v));
}

SampledPath read_path_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw ParseError("cannot open " + filename, 0);
    return read_path_csv(in);
}

void write_path_csv(std::ostream& out, const SampledPath& path) {
    out << "t";
    for (std::size_t i = 1; i <= path.dim(); ++i) out << ",x" << i;
    out << "\n";
    for (std::size_t k = 0; k < path.size(); ++k) {
        out << format_double(path.time(k));
        for (std::size_t i = 0; i < path.dim(); ++i) out << "," << format_double(path(k, i));
        out << "\n";
    }
}

void write_path_csv(const std::string& filename, const SampledPath& path) {
    std::ofstream out(filename);
    if (!out) throw ParseError("cannot write " + filename, 0);
    write_path_csv(out, path);
}

}  // namespace rpspt

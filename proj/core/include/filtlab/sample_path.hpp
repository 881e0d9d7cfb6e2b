#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "filtlab/time_grid.hpp"

namespace filtlab {

/// One value per grid point.
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;

    SamplePath() = default;
    SamplePath(TimeGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SamplePath: values/grid size mismatch");
    }
};

/// Many paths on one grid, row-major (path index fastest over columns),
/// with seed metadata for bitwise reproducibility.
class PathEnsemble {
public:
    PathEnsemble() = default;
    PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed,
                 std::string stream_scheme);

    const TimeGrid& grid() const { return grid_; }
    std::size_t n_paths() const { return n_paths_; }
    std::size_t n_times() const { return grid_.size(); }
    std::uint64_t seed() const { return seed_; }
    const std::string& stream_scheme() const { return stream_scheme_; }

    double operator()(std::size_t path, std::size_t t) const {
        return data_[path * grid_.size() + t];
    }
    double& operator()(std::size_t path, std::size_t t) {
        return data_[path * grid_.size() + t];
    }

    const double* row(std::size_t path) const { return data_.data() + path * grid_.size(); }
    double* row(std::size_t path) { return data_.data() + path * grid_.size(); }

    SamplePath path(std::size_t p) const {
        return SamplePath(grid_, std::vector<double>(row(p), row(p) + grid_.size()));
    }

    const std::vector<double>& data() const { return data_; }

    bool same_values(const PathEnsemble& other) const {
        return data_ == other.data_ && grid_ == other.grid_;
    }

private:
    TimeGrid grid_;
    std::size_t n_paths_ = 0;
    std::uint64_t seed_ = 0;
    std::string stream_scheme_;
    std::vector<double> data_;
};

} // namespace filtlab

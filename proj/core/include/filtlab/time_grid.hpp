#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace filtlab {

/// Strictly increasing time points on [0, T], with times[0] == 0 and
/// times.back() == T.
class TimeGrid {
public:
    TimeGrid() = default;

    explicit TimeGrid(std::vector<double> times) : times_(std::move(times)) {
        validate();
    }

    const std::vector<double>& times() const { return times_; }
    double horizon() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }
    std::size_t n_steps() const { return times_.size() - 1; }
    double operator[](std::size_t i) const { return times_[i]; }

    double step(std::size_t i) const { return times_[i + 1] - times_[i]; }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 0; i + 1 < times_.size(); ++i)
            m = std::max(m, times_[i + 1] - times_[i]);
        return m;
    }

    /// Grid is symmetric under t -> T - t (uniform grids qualify).
    bool is_reversible(double tol = 1e-12) const;

    bool operator==(const TimeGrid& other) const { return times_ == other.times_; }

private:
    void validate() const;

    std::vector<double> times_;
};

/// n_steps + 1 equally spaced points from 0 to T.
TimeGrid make_uniform_grid(double T, std::size_t n_steps);

/// Indices into a finer TimeGrid marking coarse points; always contains
/// index 0 and the last index of the fine grid.
class Subdivision {
public:
    Subdivision(const TimeGrid& fine, std::vector<std::size_t> indices);

    const std::vector<std::size_t>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    std::size_t operator[](std::size_t k) const { return indices_[k]; }
    std::size_t fine_size() const { return fine_size_; }

    /// Largest coarse index <= fine index i.
    std::size_t block_of(std::size_t i) const;

    bool refines(const Subdivision& coarser) const;

private:
    std::vector<std::size_t> indices_;
    std::size_t fine_size_ = 0;
};

/// Coarse points k * (n_fine / n_coarse); requires n_coarse to divide n_fine.
Subdivision make_uniform_subdivision(const TimeGrid& fine, std::size_t n_coarse);

} // namespace filtlab

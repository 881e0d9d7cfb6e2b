#include "filtlab/time_grid.hpp"

#include <algorithm>
#include <cmath>

namespace filtlab {

void TimeGrid::validate() const {
    if (times_.size() < 2)
        throw std::invalid_argument("TimeGrid needs at least two points");
    if (times_.front() != 0.0)
        throw std::invalid_argument("TimeGrid must start at 0");
    for (std::size_t i = 0; i + 1 < times_.size(); ++i)
        if (!(times_[i + 1] > times_[i]))
            throw std::invalid_argument("TimeGrid times must be strictly increasing");
}

bool TimeGrid::is_reversible(double tol) const {
    const double T = horizon();
    const std::size_t n = times_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(times_[i] - (T - times_[n - 1 - i])) > tol) return false;
    return true;
}

TimeGrid make_uniform_grid(double T, std::size_t n_steps) {
    if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    std::vector<double> t(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
        t[i] = T * static_cast<double>(i) / static_cast<double>(n_steps);
    t.back() = T;
    return TimeGrid(std::move(t));
}

Subdivision::Subdivision(const TimeGrid& fine, std::vector<std::size_t> indices)
    : indices_(std::move(indices)), fine_size_(fine.size()) {
    if (indices_.empty() || indices_.front() != 0 || indices_.back() != fine_size_ - 1)
        throw std::invalid_argument("Subdivision must contain index 0 and the last index");
    for (std::size_t k = 0; k + 1 < indices_.size(); ++k)
        if (!(indices_[k + 1] > indices_[k]))
            throw std::invalid_argument("Subdivision indices must be strictly increasing");
}

std::size_t Subdivision::block_of(std::size_t i) const {
    auto it = std::upper_bound(indices_.begin(), indices_.end(), i);
    return static_cast<std::size_t>(it - indices_.begin()) - 1;
}

bool Subdivision::refines(const Subdivision& coarser) const {
    return std::includes(indices_.begin(), indices_.end(),
                         coarser.indices().begin(), coarser.indices().end());
}

Subdivision make_uniform_subdivision(const TimeGrid& fine, std::size_t n_coarse) {
    const std::size_t n_fine = fine.n_steps();
    if (n_coarse == 0 || n_fine % n_coarse != 0)
        throw std::invalid_argument("n_coarse must divide the fine step count");
    const std::size_t stride = n_fine / n_coarse;
    std::vector<std::size_t> idx(n_coarse + 1);
    for (std::size_t k = 0; k <= n_coarse; ++k) idx[k] = k * stride;
    return Subdivision(fine, std::move(idx));
}

} // namespace filtlab

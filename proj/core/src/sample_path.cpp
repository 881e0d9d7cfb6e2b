#include "filtlab/sample_path.hpp"

namespace filtlab {

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed,
                           std::string stream_scheme)
    : grid_(std::move(grid)),
      n_paths_(n_paths),
      seed_(seed),
      stream_scheme_(std::move(stream_scheme)),
      data_(n_paths * grid_.size(), 0.0) {
    if (n_paths < 1) throw std::invalid_argument("PathEnsemble: n_paths must be >= 1");
}

} // namespace filtlab

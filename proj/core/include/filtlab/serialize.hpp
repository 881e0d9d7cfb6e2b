#pragma once

#include <string>

#include "filtlab/sample_path.hpp"

namespace filtlab {

// Columnar binary ensemble file: 8-byte magic "FLENS01\0", u32 version,
// u64 n_times / n_paths / seed, scheme string, grid times, row-major doubles.

void write_ensemble_binary(const std::string& file, const PathEnsemble& ensemble);
PathEnsemble read_ensemble_binary(const std::string& file);

/// Time column plus one column per path, capped at 1000 paths.
void write_ensemble_csv(const std::string& file, const PathEnsemble& ensemble,
                        std::size_t max_paths = 1000);

} // namespace filtlab

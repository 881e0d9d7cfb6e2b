#pragma once

#include <vector>

#include "filtlab/sample_path.hpp"

namespace filtlab {

/// Per-mesh projection errors E|E(B_s | F^n_t) - B_s| against the
/// closed-form Brownian-bridge prediction.
struct ProjectionReport {
    std::vector<double> meshes;
    std::vector<double> s_used;           // midpoint actually projected, per mesh
    std::vector<double> empirical_error;
    std::vector<double> predicted_error;
    std::vector<double> ci_halfwidth;
    std::size_t n_paths = 0;
};

/// Exact conditional expectation E(B_s | F^n_t) for a Brownian path given
/// only the coarse-point values up to time t: bridge interpolation when s is
/// bracketed by coarse points <= t, the last known value when s lies beyond.
double project_bm_onto_discretization(const SamplePath& B, const Subdivision& sub, double s,
                                      double t);

/// Empirical vs predicted projection error across refining meshes. For each
/// mesh the projected point is the midpoint of the mesh step containing s
/// (midpoints must be fine-grid points).
ProjectionReport weak_convergence_rate(const PathEnsemble& B, const std::vector<double>& meshes,
                                       double s, double t);

} // namespace filtlab

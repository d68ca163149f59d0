#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace anchor {

// Result of the greedy farthest-point anchor search. indices are distinct
// members of candidates, in final slot order; span_distances records the
// distance achieved when each slot was (last) filled.
struct AnchorSet {
    std::vector<std::size_t> indices;
    std::vector<double> span_distances;
    std::size_t projection_dim = 0;  // 0 when projection was bypassed
    std::uint64_t seed = 0;
    std::vector<std::size_t> candidates;
};

struct AnchorOptions {
    std::size_t k = 0;
    std::size_t projection_dim = 1000;
    bool disable_projection = false;
    std::uint64_t seed = 0;
    std::size_t num_threads = 1;
};

// Multiplies rows by a target_dim-column Gaussian matrix with entries
// N(0, 1/target_dim), drawn deterministically from seed.
Eigen::MatrixXd random_projection(const Eigen::MatrixXd& rows,
                                  std::size_t target_dim, std::uint64_t seed);

// Norm of the component of point orthogonal to the span of the (mutually
// orthonormal) basis vectors.
double distance_to_span(const Eigen::VectorXd& point,
                        const std::vector<Eigen::VectorXd>& orthonormal_basis);

// Greedy simplex-vertex search: pick the farthest point from the origin,
// then K-1 farthest-from-span points, then one cleanup pass revisiting
// each slot against the span of the others. Ties break to the lowest
// index. points rows are indexed by position in candidates.
AnchorSet fast_anchor_words(const Eigen::MatrixXd& points, std::size_t k,
                            const std::vector<std::size_t>& candidates,
                            std::size_t num_threads = 1);

// Full selection over the rows of q_bar: restrict to candidates, project
// (unless V <= projection_dim or projection is disabled), then run the
// greedy search.
AnchorSet select_anchors(const Eigen::MatrixXd& q_bar,
                         const std::vector<std::size_t>& candidates,
                         const AnchorOptions& options);

}  // namespace anchor

#pragma once

#include <Eigen/Core>
#include <vector>

namespace anchor {

// Optimal assignment for a square cost matrix: returns assignment[row] =
// column minimizing the total cost (Hungarian algorithm with potentials,
// O(n^3)).
std::vector<std::size_t> hungarian_assignment(const Eigen::MatrixXd& cost);

double assignment_cost(const Eigen::MatrixXd& cost,
                       const std::vector<std::size_t>& assignment);

}  // namespace anchor

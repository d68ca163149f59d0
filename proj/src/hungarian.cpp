#include "anchor/hungarian.hpp"

#include <limits>
#include <stdexcept>

namespace anchor {

std::vector<std::size_t> hungarian_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols()) {
        throw std::invalid_argument("hungarian_assignment: cost must be square");
    }
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();

    // Potentials over rows (u) and columns (v); match[j] = row matched to
    // column j, with index 0 as a virtual unmatched marker (1-based).
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<std::size_t> assignment(static_cast<std::size_t>(n), 0);
    for (int j = 1; j <= n; ++j) {
        assignment[static_cast<std::size_t>(match[j] - 1)] =
            static_cast<std::size_t>(j - 1);
    }
    return assignment;
}

double assignment_cost(const Eigen::MatrixXd& cost,
                       const std::vector<std::size_t>& assignment) {
    double total = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        total += cost(static_cast<Eigen::Index>(i),
                      static_cast<Eigen::Index>(assignment[i]));
    }
    return total;
}

}  // namespace anchor

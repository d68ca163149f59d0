#include "anchor/anchors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "anchor/parallel.hpp"

namespace anchor {

namespace {

constexpr std::size_t kScanChunk = 2048;

// Residual of v against the columns of basis (orthonormal), with one
// re-orthogonalization pass for stability.
Eigen::VectorXd orthogonal_residual(const Eigen::VectorXd& v,
                                    const Eigen::MatrixXd& basis) {
    Eigen::VectorXd r = v;
    if (basis.cols() > 0) {
        r -= basis * (basis.transpose() * r);
        r -= basis * (basis.transpose() * r);
    }
    return r;
}

// Argmax of squared distance to the span of basis over the rows of
// points, ties broken by lowest row index. Returns (row, distance^2).
std::pair<std::size_t, double> farthest_row(const Eigen::MatrixXd& points,
                                            const Eigen::MatrixXd& basis,
                                            std::size_t num_threads) {
    const auto n = static_cast<std::size_t>(points.rows());
    const std::size_t num_chunks = (n + kScanChunk - 1) / kScanChunk;
    std::vector<std::pair<std::size_t, double>> best(
        num_chunks, {0, -1.0});
    parallel_for_chunks(
        n, num_threads, kScanChunk,
        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            std::size_t arg = begin;
            double best_d = -1.0;
            for (std::size_t r = begin; r < end; ++r) {
                double d2 = points.row(r).squaredNorm();
                if (basis.cols() > 0) {
                    d2 -= (basis.transpose() *
                           points.row(r).transpose()).squaredNorm();
                }
                if (d2 > best_d) {
                    best_d = d2;
                    arg = r;
                }
            }
            best[chunk] = {arg, best_d};
        });
    std::size_t arg = best[0].first;
    double best_d = best[0].second;
    for (std::size_t c = 1; c < num_chunks; ++c) {
        if (best[c].second > best_d) {
            best_d = best[c].second;
            arg = best[c].first;
        }
    }
    return {arg, std::max(best_d, 0.0)};
}

// Orthonormal basis (as matrix columns) for a subset of point rows,
// built by stabilized Gram-Schmidt.
Eigen::MatrixXd basis_for_rows(const Eigen::MatrixXd& points,
                               const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd basis(points.cols(), 0);
    for (std::size_t r : rows) {
        Eigen::VectorXd res =
            orthogonal_residual(points.row(r).transpose(), basis);
        const double norm = res.norm();
        if (norm > 1e-12) {
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = res / norm;
        }
    }
    return basis;
}

}  // namespace

Eigen::MatrixXd random_projection(const Eigen::MatrixXd& rows,
                                  std::size_t target_dim, std::uint64_t seed) {
    if (target_dim < 1) {
        throw std::invalid_argument("random_projection: target_dim must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim));
    Eigen::MatrixXd proj(rows.cols(), static_cast<Eigen::Index>(target_dim));
    for (Eigen::Index i = 0; i < proj.rows(); ++i) {
        for (Eigen::Index j = 0; j < proj.cols(); ++j) {
            proj(i, j) = gauss(rng) * scale;
        }
    }
    return rows * proj;
}

double distance_to_span(
    const Eigen::VectorXd& point,
    const std::vector<Eigen::VectorXd>& orthonormal_basis) {
    Eigen::VectorXd r = point;
    for (const auto& b : orthonormal_basis) r -= b.dot(r) * b;
    for (const auto& b : orthonormal_basis) r -= b.dot(r) * b;
    return r.norm();
}

AnchorSet fast_anchor_words(const Eigen::MatrixXd& points, std::size_t k,
                            const std::vector<std::size_t>& candidates,
                            std::size_t num_threads) {
    if (k == 0) throw std::invalid_argument("fast_anchor_words: K must be >= 1");
    if (static_cast<std::size_t>(points.rows()) != candidates.size()) {
        throw std::invalid_argument(
            "fast_anchor_words: points rows must match candidate count");
    }
    if (k > candidates.size()) {
        throw std::invalid_argument(
            "fast_anchor_words: K = " + std::to_string(k) +
            " exceeds candidate count " + std::to_string(candidates.size()));
    }
    if (points.rowwise().norm().maxCoeff() <= 0.0) {
        throw std::invalid_argument("fast_anchor_words: all candidate rows are zero");
    }

    AnchorSet out;
    out.candidates = candidates;
    std::vector<std::size_t> slots;  // row positions within points
    slots.reserve(k);
    out.span_distances.assign(k, 0.0);

    // Phase 1: farthest from origin, then greedy farthest-from-span.
    Eigen::MatrixXd basis(points.cols(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        auto [row, d2] = farthest_row(points, basis, num_threads);
        slots.push_back(row);
        out.span_distances[i] = std::sqrt(d2);
        Eigen::VectorXd res =
            orthogonal_residual(points.row(row).transpose(), basis);
        const double norm = res.norm();
        if (norm <= 1e-12) {
            throw std::invalid_argument(
                "fast_anchor_words: points span fewer than K dimensions");
        }
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = res / norm;
    }

    // Phase 2: one cleanup pass; slot i is re-chosen against the span of
    // the other K-1 current selections.
    for (std::size_t i = 0; i < k && k > 1; ++i) {
        std::vector<std::size_t> others;
        others.reserve(k - 1);
        for (std::size_t j = 0; j < k; ++j) {
            if (j != i) others.push_back(slots[j]);
        }
        Eigen::MatrixXd span = basis_for_rows(points, others);
        auto [row, d2] = farthest_row(points, span, num_threads);
        bool duplicate = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (j != i && slots[j] == row) duplicate = true;
        }
        if (!duplicate) {
            slots[i] = row;
            out.span_distances[i] = std::sqrt(d2);
        }
    }

    out.indices.reserve(k);
    for (std::size_t s : slots) out.indices.push_back(candidates[s]);
    return out;
}

AnchorSet select_anchors(const Eigen::MatrixXd& q_bar,
                         const std::vector<std::size_t>& candidates,
                         const AnchorOptions& options) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(candidates.size()),
                         q_bar.cols());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        rows.row(static_cast<Eigen::Index>(i)) =
            q_bar.row(static_cast<Eigen::Index>(candidates[i]));
    }

    const bool project =
        !options.disable_projection &&
        options.projection_dim < static_cast<std::size_t>(q_bar.cols());
    Eigen::MatrixXd projected =
        project ? random_projection(rows, options.projection_dim, options.seed)
                : rows;

    AnchorSet out = fast_anchor_words(projected, options.k, candidates,
                                      options.num_threads);
    out.projection_dim = project ? options.projection_dim : 0;
    out.seed = options.seed;
    return out;
}

}  // namespace anchor

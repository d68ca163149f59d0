#pragma once

#include <Eigen/Core>
#include <cstddef>

namespace anchor {

enum class Divergence { KL, L2 };

// min_x d(b, Tx) subject to x >= 0, sum(x) = 1. t has the anchor rows of
// q_bar as its columns; b is the row being reconstructed. For KL both b
// and the columns of t are distributions.
struct SimplexProblem {
    Eigen::MatrixXd t;
    Eigen::VectorXd b;
    Divergence divergence = Divergence::L2;
    double tolerance = 1e-7;
    std::size_t max_iters = 1000;
};

struct SimplexSolution {
    Eigen::VectorXd x;
    std::size_t iterations = 0;
    double kkt_gap = 0.0;
    double objective = 0.0;
    bool converged = false;
};

// Precomputed quadratic form for the L2 objective:
//   ||b - Tx||^2 = c - 2 x.h + x'Gx,  grad = 2(Gx - h).
// Per-iteration work becomes independent of the vocabulary size.
struct L2Kernel {
    Eigen::MatrixXd gram;   // K x K, Qbar_S Qbar_S^T
    Eigen::VectorXd cross;  // K, Qbar_S * target row
    double constant = 0.0;  // ||target row||^2
};

// anchor_rows is K x V (rows of q_bar for the anchors), target_row length V.
L2Kernel l2_kernelize(const Eigen::MatrixXd& anchor_rows,
                      const Eigen::VectorXd& target_row);

// Multiplicative-update solver with backtracking line search and a
// complementary-slackness stopping rule (lambda'x < tolerance).
SimplexSolution exponentiated_gradient(const SimplexProblem& problem,
                                       const Eigen::VectorXd& x0);
SimplexSolution exponentiated_gradient(const SimplexProblem& problem);

// Same solver driven by a precomputed L2 kernel; k is the simplex size.
SimplexSolution exponentiated_gradient_l2(const L2Kernel& kernel,
                                          double tolerance,
                                          std::size_t max_iters);

Eigen::VectorXd simplex_gradient(const SimplexProblem& problem,
                                 const Eigen::VectorXd& x);
double simplex_objective(const SimplexProblem& problem,
                         const Eigen::VectorXd& x);

// lambda'x with mu = -min(grad), lambda = grad + mu * 1; zero exactly at
// a KKT point of the constrained problem.
double kkt_gap(const SimplexProblem& problem, const Eigen::VectorXd& x);

}  // namespace anchor

#include "anchor/simplex_solver.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace anchor {

namespace {

constexpr double kTxFloor = 1e-12;
constexpr double kExpClamp = 30.0;
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr double kEtaCap = 1e8;

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Eigen::VectorXd eg_step(const Eigen::VectorXd& x, const Eigen::VectorXd& grad,
                        double eta) {
    // The update is invariant to constant gradient shifts, so anchor the
    // exponent at the smallest gradient entry; the clamp then only floors
    // the worst coordinates instead of flattening the whole step.
    Eigen::VectorXd stepped =
        x.array() *
        (-eta * (grad.array() - grad.minCoeff())).max(-kExpClamp).exp();
    const double s = stepped.sum();
    return stepped / s;
}

double gap_from_gradient(const Eigen::VectorXd& grad,
                         const Eigen::VectorXd& x) {
    const double mu = -grad.minCoeff();
    return (grad.array() + mu).matrix().dot(x);
}

SimplexSolution solve_eg(const Objective& objective, const Gradient& gradient,
                         const Eigen::VectorXd& x0, double tolerance,
                         std::size_t max_iters) {
    if ((x0.array() <= 0.0).any() || std::abs(x0.sum() - 1.0) > 1e-9) {
        throw std::invalid_argument(
            "exponentiated_gradient: x0 must be strictly positive on the simplex");
    }
    SimplexSolution sol;
    Eigen::VectorXd x = x0 / x0.sum();
    double f = objective(x);
    Eigen::VectorXd g = gradient(x);

    std::size_t iter = 0;
    double eta_start = 1.0;
    for (; iter < max_iters; ++iter) {
        sol.kkt_gap = gap_from_gradient(g, x);
        if (sol.kkt_gap < tolerance) {
            sol.converged = true;
            break;
        }

        // Backtracking line search with the Armijo sufficient-decrease
        // test on the induced direction; the starting step carries over
        // from the previous iteration (doubled) so it can grow.
        double eta = eta_start;
        Eigen::VectorXd x_new;
        double f_new = f;
        bool accepted = false;
        for (int ls = 0; ls <= kMaxHalvings; ++ls) {
            x_new = eg_step(x, g, eta);
            f_new = objective(x_new);
            const double descent = g.dot(x_new - x);
            if (f_new <= f + kArmijo * descent) {
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted && f_new > f + 1e-12) {
            break;  // no non-increasing step found; stall at x
        }
        eta_start = std::min(eta * 2.0, kEtaCap);
        x = x_new;
        f = f_new;
        g = gradient(x);
    }

    sol.kkt_gap = gap_from_gradient(g, x);
    sol.converged = sol.kkt_gap < tolerance;
    sol.x = x;
    sol.iterations = iter;
    sol.objective = f;
    return sol;
}

}  // namespace

double simplex_objective(const SimplexProblem& problem,
                         const Eigen::VectorXd& x) {
    const Eigen::VectorXd tx = problem.t * x;
    if (problem.divergence == Divergence::L2) {
        return (problem.b - tx).squaredNorm();
    }
    double d = 0.0;
    for (Eigen::Index v = 0; v < problem.b.size(); ++v) {
        const double bv = problem.b(v);
        if (bv > 0.0) {
            d += bv * std::log(bv / std::max(tx(v), kTxFloor));
        }
    }
    return d;
}

Eigen::VectorXd simplex_gradient(const SimplexProblem& problem,
                                 const Eigen::VectorXd& x) {
    const Eigen::VectorXd tx = problem.t * x;
    if (problem.divergence == Divergence::L2) {
        return 2.0 * problem.t.transpose() * (tx - problem.b);
    }
    const Eigen::ArrayXd ratio =
        problem.b.array() / tx.array().max(kTxFloor);
    return -(problem.t.transpose() * ratio.matrix());
}

double kkt_gap(const SimplexProblem& problem, const Eigen::VectorXd& x) {
    return gap_from_gradient(simplex_gradient(problem, x), x);
}

L2Kernel l2_kernelize(const Eigen::MatrixXd& anchor_rows,
                      const Eigen::VectorXd& target_row) {
    if (anchor_rows.cols() != target_row.size()) {
        throw std::invalid_argument("l2_kernelize: shape mismatch");
    }
    L2Kernel kernel;
    kernel.gram = anchor_rows * anchor_rows.transpose();
    kernel.cross = anchor_rows * target_row;
    kernel.constant = target_row.squaredNorm();
    return kernel;
}

SimplexSolution exponentiated_gradient(const SimplexProblem& problem,
                                       const Eigen::VectorXd& x0) {
    if (problem.divergence == Divergence::L2) {
        // The L2 path always runs kernelized; per-word cost is then
        // independent of V.
        Eigen::MatrixXd anchor_rows = problem.t.transpose();
        L2Kernel kernel = l2_kernelize(anchor_rows, problem.b);
        return solve_eg(
            [&kernel](const Eigen::VectorXd& x) {
                return kernel.constant - 2.0 * x.dot(kernel.cross) +
                       x.dot(kernel.gram * x);
            },
            [&kernel](const Eigen::VectorXd& x) {
                return Eigen::VectorXd(2.0 * (kernel.gram * x - kernel.cross));
            },
            x0, problem.tolerance, problem.max_iters);
    }
    return solve_eg(
        [&problem](const Eigen::VectorXd& x) {
            return simplex_objective(problem, x);
        },
        [&problem](const Eigen::VectorXd& x) {
            return simplex_gradient(problem, x);
        },
        x0, problem.tolerance, problem.max_iters);
}

SimplexSolution exponentiated_gradient(const SimplexProblem& problem) {
    const auto k = problem.t.cols();
    return exponentiated_gradient(
        problem, Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k)));
}

SimplexSolution exponentiated_gradient_l2(const L2Kernel& kernel,
                                          double tolerance,
                                          std::size_t max_iters) {
    const auto k = kernel.cross.size();
    Eigen::VectorXd x0 =
        Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    return solve_eg(
        [&kernel](const Eigen::VectorXd& x) {
            return kernel.constant - 2.0 * x.dot(kernel.cross) +
                   x.dot(kernel.gram * x);
        },
        [&kernel](const Eigen::VectorXd& x) {
            return Eigen::VectorXd(2.0 * (kernel.gram * x - kernel.cross));
        },
        x0, tolerance, max_iters);
}

}  // namespace anchor

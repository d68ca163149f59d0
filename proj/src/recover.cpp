#include "anchor/recover.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "anchor/parallel.hpp"

namespace anchor {

namespace {

constexpr std::size_t kWordChunk = 64;

Eigen::MatrixXd anchor_rows_of(const Eigen::MatrixXd& q_bar,
                               const AnchorSet& anchors) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(anchors.indices.size()),
                         q_bar.cols());
    for (std::size_t k = 0; k < anchors.indices.size(); ++k) {
        rows.row(static_cast<Eigen::Index>(k)) =
            q_bar.row(static_cast<Eigen::Index>(anchors.indices[k]));
    }
    return rows;
}

}  // namespace

std::string to_string(RecoverMethod method) {
    switch (method) {
        case RecoverMethod::RecoverKL: return "kl";
        case RecoverMethod::RecoverL2: return "l2";
        case RecoverMethod::OriginalRecover: return "original";
    }
    return "unknown";
}

RecoverMethod recover_method_from_string(const std::string& name) {
    if (name == "kl") return RecoverMethod::RecoverKL;
    if (name == "l2") return RecoverMethod::RecoverL2;
    if (name == "original") return RecoverMethod::OriginalRecover;
    throw std::invalid_argument("unknown recovery method: " + name +
                                " (expected kl, l2, or original)");
}

ConvexCoefficients recover_coefficients(const Cooccurrence& cooc,
                                        const AnchorSet& anchors,
                                        Divergence divergence,
                                        const RecoverOptions& options) {
    const auto v = cooc.q_bar.rows();
    const auto k = static_cast<Eigen::Index>(anchors.indices.size());
    for (std::size_t s : anchors.indices) {
        if (cooc.zero_rows.count(s)) {
            throw std::invalid_argument("anchor word " + std::to_string(s) +
                                        " has an all-zero co-occurrence row");
        }
    }

    const Eigen::MatrixXd anchor_rows = anchor_rows_of(cooc.q_bar, anchors);
    const Eigen::MatrixXd t = anchor_rows.transpose();  // V x K
    // Shared Gram matrix for the kernelized quadratic path.
    const Eigen::MatrixXd gram = anchor_rows * anchor_rows.transpose();

    ConvexCoefficients out;
    out.c.resize(v, k);
    out.uniform_rows = cooc.zero_rows;
    const double uniform = 1.0 / static_cast<double>(k);

    std::exception_ptr error;
    std::mutex error_mutex;
    parallel_for_chunks(
        static_cast<std::size_t>(v), options.num_threads, kWordChunk,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            try {
                for (std::size_t i = begin; i < end; ++i) {
                    const auto row = static_cast<Eigen::Index>(i);
                    if (cooc.zero_rows.count(i)) {
                        out.c.row(row).setConstant(uniform);
                        continue;
                    }
                    SimplexSolution sol;
                    if (divergence == Divergence::L2) {
                        L2Kernel kernel;
                        kernel.gram = gram;
                        kernel.cross =
                            anchor_rows * cooc.q_bar.row(row).transpose();
                        kernel.constant = cooc.q_bar.row(row).squaredNorm();
                        sol = exponentiated_gradient_l2(kernel,
                                                        options.eg_tolerance,
                                                        options.eg_max_iters);
                    } else {
                        SimplexProblem problem;
                        problem.t = t;
                        problem.b = cooc.q_bar.row(row).transpose();
                        problem.divergence = Divergence::KL;
                        problem.tolerance = options.eg_tolerance;
                        problem.max_iters = options.eg_max_iters;
                        sol = exponentiated_gradient(problem);
                    }
                    out.c.row(row) = sol.x.transpose();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    if (error) std::rethrow_exception(error);
    return out;
}

BayesResult bayes_rule_topics(const ConvexCoefficients& c,
                              const Eigen::VectorXd& p_w) {
    if (c.c.rows() != p_w.size()) {
        throw std::invalid_argument("bayes_rule_topics: shape mismatch");
    }
    BayesResult out;
    Eigen::MatrixXd a_prime = p_w.asDiagonal() * c.c;
    Eigen::VectorXd column_sums = a_prime.colwise().sum();
    for (Eigen::Index k = 0; k < column_sums.size(); ++k) {
        if (column_sums(k) <= 0.0) {
            throw std::runtime_error("dead topic " + std::to_string(k + 1) +
                                     ": no probability mass assigned");
        }
    }
    out.p_z = column_sums / column_sums.sum();
    out.a = a_prime * column_sums.cwiseInverse().asDiagonal();
    return out;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = 1e-10 * sv.maxCoeff();
    Eigen::VectorXd inv(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        inv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::MatrixXd recover_r(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10) {
        throw std::runtime_error(
            "recover_r: A is rank deficient (smallest singular value " +
            std::to_string(sv(sv.size() - 1)) + ")");
    }
    const Eigen::MatrixXd a_pinv = pseudo_inverse(a);
    Eigen::MatrixXd r = a_pinv * q * a_pinv.transpose();
    return 0.5 * (r + r.transpose());
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    // Sort-based Euclidean projection onto {x >= 0, sum x = 1}.
    const auto n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0;
    double theta = 0.0;
    Eigen::Index rho = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cssv += u[static_cast<std::size_t>(i)];
        const double t = (cssv - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<std::size_t>(i)] > t) {
            theta = t;
            rho = i;
        }
    }
    (void)rho;
    return (v.array() - theta).max(0.0);
}

TopicModel recover_original(const Cooccurrence& cooc,
                            const AnchorSet& anchors) {
    const auto k = static_cast<Eigen::Index>(anchors.indices.size());
    const auto v = cooc.q.rows();

    Eigen::MatrixXd q_s(k, v);  // anchor rows of Q
    Eigen::MatrixXd q_ss(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        q_s.row(i) = cooc.q.row(static_cast<Eigen::Index>(anchors.indices[i]));
        for (Eigen::Index j = 0; j < k; ++j) {
            q_ss(i, j) = cooc.q(static_cast<Eigen::Index>(anchors.indices[i]),
                                static_cast<Eigen::Index>(anchors.indices[j]));
        }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(q_ss);
    if (!lu.isInvertible()) {
        throw std::runtime_error(
            "recover_original: anchor block Q_SS is singular");
    }
    const Eigen::VectorXd p_s = q_s.rowwise().sum();
    const Eigen::VectorXd z = lu.solve(p_s);
    // A^T = (Q_SS Diag(z))^{-1} Q_S
    Eigen::MatrixXd a_t =
        Eigen::PartialPivLU<Eigen::MatrixXd>(q_ss * z.asDiagonal())
            .solve(q_s);
    Eigen::MatrixXd r = z.asDiagonal() * q_ss * z.asDiagonal();

    TopicModel model;
    model.method = RecoverMethod::OriginalRecover;
    model.a = a_t.transpose();
    for (Eigen::Index col = 0; col < k; ++col) {
        model.a.col(col) = project_to_simplex(model.a.col(col));
    }
    model.r = 0.5 * (r + r.transpose());
    Eigen::VectorXd p_z = model.r.rowwise().sum();
    const double total = p_z.sum();
    if (total > 0.0) p_z /= total;
    model.p_z = p_z;
    return model;
}

TopicModel recover_topic_model(const Cooccurrence& cooc,
                               const AnchorSet& anchors, RecoverMethod method,
                               const RecoverOptions& options) {
    if (method == RecoverMethod::OriginalRecover) {
        return recover_original(cooc, anchors);
    }
    const Divergence divergence = method == RecoverMethod::RecoverKL
                                      ? Divergence::KL
                                      : Divergence::L2;
    ConvexCoefficients c =
        recover_coefficients(cooc, anchors, divergence, options);
    BayesResult bayes = bayes_rule_topics(c, cooc.p_w);

    TopicModel model;
    model.method = method;
    model.a = std::move(bayes.a);
    model.p_z = std::move(bayes.p_z);
    model.r = recover_r(model.a, cooc.q);
    if (options.estimate_alpha) {
        if (auto alpha = estimate_dirichlet(model.p_z, model.r)) {
            model.alpha0 = alpha->sum();
        }
    }
    return model;
}

std::optional<Eigen::VectorXd> estimate_dirichlet(const Eigen::VectorXd& p_z,
                                                  const Eigen::MatrixXd& r) {
    const auto k = p_z.size();
    if ((p_z.array() <= 0.0).any()) {
        throw std::invalid_argument("estimate_dirichlet: p_z must be strictly positive");
    }
    if (k < 2) return std::nullopt;
    std::vector<double> ratios;
    ratios.reserve(static_cast<std::size_t>(k * (k - 1)));
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            if (i != j) ratios.push_back(r(i, j) / (p_z(i) * p_z(j)));
        }
    }
    std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2,
                     ratios.end());
    double rbar = ratios[ratios.size() / 2];
    if (ratios.size() % 2 == 0) {
        std::nth_element(ratios.begin(),
                         ratios.begin() + ratios.size() / 2 - 1, ratios.end());
        rbar = 0.5 * (rbar + ratios[ratios.size() / 2 - 1]);
    }
    if (rbar <= 0.0 || rbar >= 1.0) return std::nullopt;
    double alpha0 = rbar / (1.0 - rbar);
    alpha0 = std::clamp(alpha0, 1e-4, 1e4);
    return Eigen::VectorXd(alpha0 * p_z);
}

}  // namespace anchor

#pragma once

#include <Eigen/Core>
#include <optional>
#include <set>
#include <string>

#include "anchor/anchors.hpp"
#include "anchor/cooccur.hpp"
#include "anchor/simplex_solver.hpp"

namespace anchor {

enum class RecoverMethod { RecoverKL, RecoverL2, OriginalRecover };

std::string to_string(RecoverMethod method);
RecoverMethod recover_method_from_string(const std::string& name);

// Word-topic matrix A (columns are p(word | topic)), topic-topic second
// moment R, and topic prior p(z). alpha0 is set only when a Dirichlet
// concentration was recovered from R.
struct TopicModel {
    Eigen::MatrixXd a;
    Eigen::MatrixXd r;
    Eigen::VectorXd p_z;
    std::optional<double> alpha0;
    RecoverMethod method = RecoverMethod::RecoverL2;
};

// Row i holds p(z | w = i); every row is on the simplex. Words whose
// q-row is zero get a uniform row and are listed in uniform_rows.
struct ConvexCoefficients {
    Eigen::MatrixXd c;
    std::set<std::size_t> uniform_rows;
};

struct RecoverOptions {
    double eg_tolerance = 1e-7;
    std::size_t eg_max_iters = 1000;
    std::size_t num_threads = 1;
    bool estimate_alpha = true;
};

// Solves, independently per word, the simplex-constrained reconstruction
// of q_bar row i from the anchor rows.
ConvexCoefficients recover_coefficients(const Cooccurrence& cooc,
                                        const AnchorSet& anchors,
                                        Divergence divergence,
                                        const RecoverOptions& options = {});

struct BayesResult {
    Eigen::MatrixXd a;
    Eigen::VectorXd p_z;
};

// A'_{i,k} = C_{i,k} p_w[i]; p_z = column sums of A'; A = A' with
// columns normalized.
BayesResult bayes_rule_topics(const ConvexCoefficients& c,
                              const Eigen::VectorXd& p_w);

// Least-squares R = pinv(A) Q pinv(A)', symmetrized.
Eigen::MatrixXd recover_r(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

// Matrix-inversion baseline: solves the K x K anchor block for z, then
// for A and R; columns of A are projected onto the simplex afterwards.
TopicModel recover_original(const Cooccurrence& cooc, const AnchorSet& anchors);

TopicModel recover_topic_model(const Cooccurrence& cooc,
                               const AnchorSet& anchors, RecoverMethod method,
                               const RecoverOptions& options = {});

// Fits alpha = alpha0 * p_z from the off-diagonal Dirichlet moment
// identity R_{kk'} = p_z[k] p_z[k'] alpha0 / (alpha0 + 1). Returns
// nothing when the moments are not Dirichlet-consistent.
std::optional<Eigen::VectorXd> estimate_dirichlet(const Eigen::VectorXd& p_z,
                                                  const Eigen::MatrixXd& r);

// Euclidean projection onto the probability simplex.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

// Moore-Penrose pseudo-inverse with singular values below
// 1e-10 * sigma_max treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m);

}  // namespace anchor

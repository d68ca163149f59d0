#pragma once

#include <Eigen/Core>
#include <set>

#include "anchor/corpus.hpp"

namespace anchor {

// Word-word co-occurrence statistics. q is symmetric with nonnegative
// entries summing to 1; q_bar is q with each nonzero row scaled to sum
// to 1; p_w holds the row sums of q. Words whose q-row is identically
// zero are listed in zero_rows and keep an all-zero q_bar row.
struct Cooccurrence {
    Eigen::MatrixXd q;
    Eigen::MatrixXd q_bar;
    Eigen::VectorXd p_w;
    std::set<std::size_t> zero_rows;
    // Grand sum of the 1/M-weighted estimate before the final
    // normalization; q * raw_total reconstructs the raw estimator.
    double raw_total = 1.0;
};

struct CooccurOptions {
    bool deterministic = true;
    std::size_t num_threads = 1;
};

// Unbiased estimator of the joint word-pair distribution: per document d
// with count vector H_d and length n_d, accumulate
//   H_d H_d^T / (n_d (n_d - 1)) - Diag(H_d) / (n_d (n_d - 1)),
// average over documents, then scale the total to sum to 1.
Cooccurrence build_q(const SparseCorpus& corpus,
                     const CooccurOptions& options = {});

struct RowNormalized {
    Eigen::MatrixXd q_bar;
    Eigen::VectorXd p_w;
    std::set<std::size_t> zero_rows;
};

RowNormalized row_normalize(const Eigen::MatrixXd& q);

// Rebuilds the derived fields from a raw q matrix (e.g. after loading
// from disk or constructing an exact Q = A R A^T).
Cooccurrence cooccurrence_from_q(const Eigen::MatrixXd& q);

}  // namespace anchor

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>
#include <variant>

#include "anchor/corpus.hpp"

namespace anchor {

struct DirichletPrior {
    Eigen::VectorXd alpha;  // length K, entrywise > 0
};

struct LogisticNormalPrior {
    Eigen::VectorXd mean;   // length K
    Eigen::MatrixXd cov;    // K x K, symmetric PSD
};

// Semi-synthetic corpus recipe: documents of a fixed length sampled from
// a given word-topic matrix under a document-topic prior.
struct GeneratorSpec {
    Eigen::MatrixXd a;  // V x K, column-stochastic
    std::size_t num_docs = 0;
    std::size_t doc_length = 0;
    std::variant<DirichletPrior, LogisticNormalPrior> prior;
    std::uint64_t seed = 0;
    std::size_t num_threads = 1;
};

struct GeneratedCorpus {
    SparseCorpus corpus;
    Eigen::MatrixXd w_true;  // K x M document-topic proportions
};

// Samples W_d from the prior, then doc_length tokens with z ~ W_d and
// w ~ A_z. Each document draws from its own RNG stream derived from
// (seed, doc index), so generation order and threading do not matter.
GeneratedCorpus generate_corpus(const GeneratorSpec& spec);

// softmax of a Normal(mean, cov) draw.
Eigen::VectorXd logistic_normal_draw(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& cov,
                                     std::mt19937_64& rng);

Eigen::VectorXd dirichlet_draw(const Eigen::VectorXd& alpha,
                               std::mt19937_64& rng);

// Unit diagonal; entry (i, j) = rho when i != j fall in the same group.
// Topics are split into num_groups contiguous groups, remainder spread
// over the leading groups.
Eigen::MatrixXd block_covariance(std::size_t k, std::size_t num_groups,
                                 double rho);

// Appends one synthetic anchor row per topic with the weight of the
// topic's most probable word, then renormalizes each column.
Eigen::MatrixXd inject_anchor_words(const Eigen::MatrixXd& a);

// Per-document RNG stream for (seed, index).
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index);

}  // namespace anchor

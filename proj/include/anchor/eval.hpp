#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "anchor/corpus.hpp"

namespace anchor {

struct EvalReport {
    std::vector<double> per_topic_l1;       // matched l1, each in [0, 2]
    std::vector<std::size_t> matching;      // true topic -> learned topic
    double mean_l1 = 0.0;
    double uniform_baseline_l1 = 0.0;
    std::vector<double> coherence;          // per topic, <= 0
    double mean_coherence = 0.0;
    std::vector<std::size_t> unique_words;  // per topic
    std::map<std::string, double> timings_seconds;
    bool has_l1 = false;
    bool has_coherence = false;

    std::string to_json() const;
};

struct L1MatchResult {
    std::vector<double> per_topic_l1;
    std::vector<std::size_t> matching;  // true topic k -> learned column
};

// Matches learned columns to true columns by minimum total l1 distance
// (optimal assignment), then reports the matched distances.
L1MatchResult l1_topic_error(const Eigen::MatrixXd& a_true,
                             const Eigen::MatrixXd& a_hat);

// Mean over topics of || a_true[.,k] - uniform ||_1.
double uniform_baseline(const Eigen::MatrixXd& a_true);

// Co-document-frequency coherence of each topic's n_top most probable
// words: sum over ranked pairs of log((D(w_m, w_l) + eps) / D(w_l)),
// where w_l is the higher-ranked word. D counts documents containing a
// word at least once.
std::vector<double> coherence(const Eigen::MatrixXd& a,
                              const SparseCorpus& corpus, std::size_t n_top,
                              double epsilon = 0.01);

// Per topic, how many of its n_top most probable words appear in no
// other topic's top set.
std::vector<std::size_t> unique_words(const Eigen::MatrixXd& a,
                                      std::size_t n_top);

// Top-n word indices of a topic column, descending probability, ties
// broken by lower word index.
std::vector<std::size_t> top_words(const Eigen::MatrixXd& a,
                                   std::size_t topic, std::size_t n_top);

}  // namespace anchor

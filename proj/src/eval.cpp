#include "anchor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "anchor/hungarian.hpp"

namespace anchor {

namespace {

void append_array(std::ostringstream& out, const std::vector<double>& v) {
    out << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",";
        out << v[i];
    }
    out << "]";
}

void append_array(std::ostringstream& out, const std::vector<std::size_t>& v) {
    out << "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ",";
        out << v[i];
    }
    out << "]";
}

}  // namespace

std::string EvalReport::to_json() const {
    std::ostringstream out;
    out.precision(12);
    out << "{";
    if (has_l1) {
        out << "\"l1\":{\"per_topic\":";
        append_array(out, per_topic_l1);
        out << ",\"mean\":" << mean_l1
            << ",\"baseline\":" << uniform_baseline_l1 << ",\"matching\":";
        append_array(out, matching);
        out << "},";
    }
    if (has_coherence) {
        out << "\"coherence\":{\"per_topic\":";
        append_array(out, coherence);
        out << ",\"mean\":" << mean_coherence << "},";
    }
    if (!unique_words.empty()) {
        out << "\"unique_words\":{\"per_topic\":";
        append_array(out, unique_words);
        out << "},";
    }
    out << "\"timings\":{";
    bool first = true;
    for (const auto& [name, seconds] : timings_seconds) {
        if (!first) out << ",";
        out << "\"" << name << "\":" << seconds;
        first = false;
    }
    out << "}}";
    return out.str();
}

L1MatchResult l1_topic_error(const Eigen::MatrixXd& a_true,
                             const Eigen::MatrixXd& a_hat) {
    if (a_true.rows() != a_hat.rows() || a_true.cols() != a_hat.cols()) {
        throw std::invalid_argument("l1_topic_error: shape mismatch");
    }
    const auto k = a_true.cols();
    Eigen::MatrixXd cost(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            cost(i, j) = (a_true.col(i) - a_hat.col(j)).lpNorm<1>();
        }
    }
    L1MatchResult result;
    result.matching = hungarian_assignment(cost);
    result.per_topic_l1.resize(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < k; ++i) {
        result.per_topic_l1[static_cast<std::size_t>(i)] =
            cost(i, static_cast<Eigen::Index>(
                         result.matching[static_cast<std::size_t>(i)]));
    }
    return result;
}

double uniform_baseline(const Eigen::MatrixXd& a_true) {
    const double inv_v = 1.0 / static_cast<double>(a_true.rows());
    double total = 0.0;
    for (Eigen::Index k = 0; k < a_true.cols(); ++k) {
        total += (a_true.col(k).array() - inv_v).abs().sum();
    }
    return total / static_cast<double>(a_true.cols());
}

std::vector<std::size_t> top_words(const Eigen::MatrixXd& a, std::size_t topic,
                                   std::size_t n_top) {
    n_top = std::min(n_top, static_cast<std::size_t>(a.rows()));
    std::vector<std::size_t> order(static_cast<std::size_t>(a.rows()));
    std::iota(order.begin(), order.end(), 0);
    const auto col = static_cast<Eigen::Index>(topic);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) {
                         return a(static_cast<Eigen::Index>(x), col) >
                                a(static_cast<Eigen::Index>(y), col);
                     });
    order.resize(n_top);
    return order;
}

std::vector<double> coherence(const Eigen::MatrixXd& a,
                              const SparseCorpus& corpus, std::size_t n_top,
                              double epsilon) {
    if (corpus.num_docs == 0) {
        throw std::invalid_argument("coherence: corpus is empty");
    }
    if (static_cast<Eigen::Index>(corpus.vocab_size) != a.rows()) {
        throw std::invalid_argument(
            "coherence: corpus vocabulary does not match A rows");
    }
    const std::vector<std::size_t> df = corpus.document_frequencies();

    std::vector<double> scores(static_cast<std::size_t>(a.cols()), 0.0);
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const std::vector<std::size_t> words =
            top_words(a, static_cast<std::size_t>(k), n_top);

        // Pairwise document co-occurrence counts for the selected words.
        Eigen::MatrixXi co = Eigen::MatrixXi::Zero(
            static_cast<Eigen::Index>(n_top), static_cast<Eigen::Index>(n_top));
        std::vector<Eigen::Index> pos(corpus.vocab_size,
                                      static_cast<Eigen::Index>(-1));
        for (std::size_t r = 0; r < words.size(); ++r) {
            pos[words[r]] = static_cast<Eigen::Index>(r);
        }
        std::vector<Eigen::Index> present;
        for (const auto& doc : corpus.docs) {
            present.clear();
            for (const auto& [w, c] : doc) {
                if (pos[w] >= 0) present.push_back(pos[w]);
            }
            for (std::size_t x = 0; x < present.size(); ++x) {
                for (std::size_t y = x + 1; y < present.size(); ++y) {
                    co(present[x], present[y]) += 1;
                    co(present[y], present[x]) += 1;
                }
            }
        }

        double score = 0.0;
        for (std::size_t m = 1; m < words.size(); ++m) {
            for (std::size_t l = 0; l < m; ++l) {
                double denom = static_cast<double>(df[words[l]]);
                if (denom == 0.0) {
                    std::cerr << "warning: coherence word " << words[l]
                              << " appears in no document\n";
                    denom = epsilon;
                }
                const double joint = static_cast<double>(
                    co(static_cast<Eigen::Index>(m),
                       static_cast<Eigen::Index>(l)));
                score += std::log((joint + epsilon) / denom);
            }
        }
        scores[static_cast<std::size_t>(k)] = score;
    }
    return scores;
}

std::vector<std::size_t> unique_words(const Eigen::MatrixXd& a,
                                      std::size_t n_top) {
    const auto k = static_cast<std::size_t>(a.cols());
    std::vector<std::set<std::size_t>> tops(k);
    for (std::size_t t = 0; t < k; ++t) {
        const auto words = top_words(a, t, n_top);
        tops[t] = std::set<std::size_t>(words.begin(), words.end());
    }
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t t = 0; t < k; ++t) {
        for (std::size_t w : tops[t]) {
            bool elsewhere = false;
            for (std::size_t o = 0; o < k && !elsewhere; ++o) {
                if (o != t && tops[o].count(w)) elsewhere = true;
            }
            if (!elsewhere) ++counts[t];
        }
    }
    return counts;
}

}  // namespace anchor

#include "anchor/cooccur.hpp"

#include <mutex>
#include <stdexcept>
#include <vector>

#include "anchor/parallel.hpp"

namespace anchor {

namespace {

constexpr std::size_t kDocChunk = 1024;

// Adds document d's contribution H~ H~^T - H^ to acc (upper triangle plus
// diagonal only; symmetrized at the end).
void accumulate_document(const SparseCorpus& corpus, std::size_t d,
                         Eigen::MatrixXd& acc) {
    const auto& doc = corpus.docs[d];
    double n_d = 0;
    for (const auto& [w, c] : doc) n_d += c;
    if (n_d < 2) {
        throw std::invalid_argument(
            "build_q: document " + std::to_string(d) + " has length " +
            std::to_string(static_cast<long long>(n_d)) +
            " < 2; filter short documents first");
    }
    const double denom = n_d * (n_d - 1.0);
    for (std::size_t a = 0; a < doc.size(); ++a) {
        const auto [wa, ca] = doc[a];
        const double ha = static_cast<double>(ca);
        acc(wa, wa) += (ha * ha - ha) / denom;
        for (std::size_t b = a + 1; b < doc.size(); ++b) {
            const auto [wb, cb] = doc[b];
            acc(wa, wb) += ha * static_cast<double>(cb) / denom;
        }
    }
}

}  // namespace

RowNormalized row_normalize(const Eigen::MatrixXd& q) {
    if ((q.array() < 0.0).any()) {
        throw std::invalid_argument("row_normalize: negative entry in q");
    }
    RowNormalized out;
    out.q_bar = q;
    out.p_w = q.rowwise().sum();
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
        const double s = out.p_w(i);
        if (s > 0.0) {
            out.q_bar.row(i) /= s;
        } else {
            out.q_bar.row(i).setZero();
            out.zero_rows.insert(static_cast<std::size_t>(i));
        }
    }
    return out;
}

Cooccurrence cooccurrence_from_q(const Eigen::MatrixXd& q) {
    Cooccurrence cooc;
    const double total = q.sum();
    if (total <= 0.0) {
        throw std::invalid_argument("cooccurrence_from_q: q sums to zero");
    }
    cooc.q = q / total;
    cooc.raw_total = total;
    RowNormalized rn = row_normalize(cooc.q);
    cooc.q_bar = std::move(rn.q_bar);
    cooc.p_w = std::move(rn.p_w);
    cooc.zero_rows = std::move(rn.zero_rows);
    return cooc;
}

Cooccurrence build_q(const SparseCorpus& corpus,
                     const CooccurOptions& options) {
    const auto v = static_cast<Eigen::Index>(corpus.vocab_size);
    const std::size_t m = corpus.num_docs;
    if (m == 0) throw std::invalid_argument("build_q: empty corpus");

    Eigen::MatrixXd upper = Eigen::MatrixXd::Zero(v, v);
    if (options.deterministic || options.num_threads <= 1) {
        for (std::size_t d = 0; d < m; ++d) {
            accumulate_document(corpus, d, upper);
        }
    } else {
        // Per-chunk partials reduced in chunk order; the chunk size is
        // fixed, so the result does not depend on the thread count.
        const std::size_t num_chunks = (m + kDocChunk - 1) / kDocChunk;
        std::vector<Eigen::MatrixXd> partials(num_chunks);
        std::exception_ptr error;
        std::mutex error_mutex;
        parallel_for_chunks(
            m, options.num_threads, kDocChunk,
            [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                try {
                    partials[chunk] = Eigen::MatrixXd::Zero(v, v);
                    for (std::size_t d = begin; d < end; ++d) {
                        accumulate_document(corpus, d, partials[chunk]);
                    }
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        if (error) std::rethrow_exception(error);
        for (const auto& p : partials) upper += p;
    }

    // Mirror the strict upper triangle; diagonal stays as accumulated.
    Eigen::MatrixXd strict = upper.triangularView<Eigen::StrictlyUpper>();
    Eigen::MatrixXd raw = upper + strict.transpose();
    raw /= static_cast<double>(m);

    Cooccurrence cooc = cooccurrence_from_q(raw);
    return cooc;
}

}  // namespace anchor

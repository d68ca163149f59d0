#include "anchor/synth.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anchor/parallel.hpp"

namespace anchor {

namespace {

constexpr std::size_t kDocChunk = 256;

std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Eigendecomposition-based factor L with L L^T = cov (eigenvalues
// clamped at zero).
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("covariance matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw std::invalid_argument(
            "covariance matrix is not positive semidefinite (min eigenvalue " +
            std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
    return es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::size_t sample_cumulative(const Eigen::VectorXd& cumulative, double u) {
    const double target = u * cumulative(cumulative.size() - 1);
    const double* begin = cumulative.data();
    const double* end = begin + cumulative.size();
    const double* it = std::upper_bound(begin, end, target);
    if (it == end) --it;
    return static_cast<std::size_t>(it - begin);
}

}  // namespace

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(mix64(mix64(seed) ^ (index + 1)));
}

Eigen::VectorXd dirichlet_draw(const Eigen::VectorXd& alpha,
                               std::mt19937_64& rng) {
    Eigen::VectorXd w(alpha.size());
    double total = 0.0;
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
        std::gamma_distribution<double> gamma(alpha(k), 1.0);
        w(k) = gamma(rng);
        total += w(k);
    }
    if (total <= 0.0) {
        // All gammas underflowed (tiny alpha); fall back to a single
        // uniformly chosen topic, the alpha -> 0 limit.
        std::uniform_int_distribution<Eigen::Index> pick(0, alpha.size() - 1);
        w.setZero();
        w(pick(rng)) = 1.0;
        return w;
    }
    return w / total;
}

Eigen::VectorXd logistic_normal_draw(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& cov,
                                     std::mt19937_64& rng) {
    const Eigen::MatrixXd factor = psd_factor(cov);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd g(mean.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = gauss(rng);
    Eigen::VectorXd logits = mean + factor * g;
    const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
    const Eigen::ArrayXd expd = shifted.exp();
    return (expd / expd.sum()).matrix();
}

Eigen::MatrixXd block_covariance(std::size_t k, std::size_t num_groups,
                                 double rho) {
    if (k == 0 || num_groups == 0 || num_groups > k) {
        throw std::invalid_argument("block_covariance: invalid group count");
    }
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(
        static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    // Contiguous groups; the remainder goes to the leading groups.
    const std::size_t base = k / num_groups;
    const std::size_t extra = k % num_groups;
    std::size_t start = 0;
    for (std::size_t g = 0; g < num_groups; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        for (std::size_t i = start; i < start + size; ++i) {
            for (std::size_t j = start; j < start + size; ++j) {
                if (i != j) {
                    cov(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(j)) = rho;
                }
            }
        }
        start += size;
    }
    psd_factor(cov);  // validates PSD, throws otherwise
    return cov;
}

Eigen::MatrixXd inject_anchor_words(const Eigen::MatrixXd& a) {
    const auto v = a.rows();
    const auto k = a.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v + k, k);
    out.topRows(v) = a;
    for (Eigen::Index col = 0; col < k; ++col) {
        out(v + col, col) = a.col(col).maxCoeff();
        out.col(col) /= out.col(col).sum();
    }
    return out;
}

GeneratedCorpus generate_corpus(const GeneratorSpec& spec) {
    const auto v = spec.a.rows();
    const auto k = spec.a.cols();
    if (spec.doc_length < 2) {
        throw std::invalid_argument("generate_corpus: doc_length must be >= 2");
    }
    if (spec.num_docs == 0) {
        throw std::invalid_argument("generate_corpus: num_docs must be >= 1");
    }
    if (((spec.a.colwise().sum().array() - 1.0).abs() > 1e-6).any()) {
        throw std::invalid_argument(
            "generate_corpus: A must be column-stochastic");
    }
    if (const auto* d = std::get_if<DirichletPrior>(&spec.prior)) {
        if (d->alpha.size() != k || (d->alpha.array() <= 0.0).any()) {
            throw std::invalid_argument(
                "generate_corpus: Dirichlet alpha must be length K, positive");
        }
    } else {
        const auto& ln = std::get<LogisticNormalPrior>(spec.prior);
        if (ln.mean.size() != k || ln.cov.rows() != k || ln.cov.cols() != k) {
            throw std::invalid_argument(
                "generate_corpus: logistic-normal parameters must match K");
        }
    }

    // Per-topic cumulative word distributions, shared across documents.
    Eigen::MatrixXd word_cdf(v, k);
    for (Eigen::Index col = 0; col < k; ++col) {
        double run = 0.0;
        for (Eigen::Index i = 0; i < v; ++i) {
            run += spec.a(i, col);
            word_cdf(i, col) = run;
        }
    }
    const Eigen::MatrixXd ln_factor =
        std::holds_alternative<LogisticNormalPrior>(spec.prior)
            ? psd_factor(std::get<LogisticNormalPrior>(spec.prior).cov)
            : Eigen::MatrixXd();

    GeneratedCorpus out;
    out.corpus.num_docs = spec.num_docs;
    out.corpus.vocab_size = static_cast<std::size_t>(v);
    out.corpus.docs.resize(spec.num_docs);
    out.corpus.vocab.reserve(static_cast<std::size_t>(v));
    for (Eigen::Index i = 0; i < v; ++i) {
        out.corpus.vocab.push_back("w" + std::to_string(i));
    }
    out.w_true.resize(k, static_cast<Eigen::Index>(spec.num_docs));

    parallel_for_chunks(
        spec.num_docs, spec.num_threads, kDocChunk,
        [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<std::uint32_t> counts(static_cast<std::size_t>(v), 0);
            std::vector<std::size_t> touched;
            for (std::size_t d = begin; d < end; ++d) {
                std::mt19937_64 rng = derived_rng(spec.seed, d);
                std::uniform_real_distribution<double> unif(0.0, 1.0);

                Eigen::VectorXd w_d;
                if (const auto* dir = std::get_if<DirichletPrior>(&spec.prior)) {
                    w_d = dirichlet_draw(dir->alpha, rng);
                } else {
                    const auto& ln = std::get<LogisticNormalPrior>(spec.prior);
                    std::normal_distribution<double> gauss(0.0, 1.0);
                    Eigen::VectorXd g(k);
                    for (Eigen::Index i = 0; i < k; ++i) g(i) = gauss(rng);
                    Eigen::VectorXd logits = ln.mean + ln_factor * g;
                    const Eigen::ArrayXd shifted =
                        logits.array() - logits.maxCoeff();
                    const Eigen::ArrayXd expd = shifted.exp();
                    w_d = (expd / expd.sum()).matrix();
                }
                out.w_true.col(static_cast<Eigen::Index>(d)) = w_d;

                touched.clear();
                for (std::size_t tok = 0; tok < spec.doc_length; ++tok) {
                    // z ~ W_d by linear scan (K is small), w ~ A_z by
                    // binary search in the topic's cumulative.
                    double u = unif(rng) * w_d.sum();
                    Eigen::Index z = 0;
                    for (; z < k - 1; ++z) {
                        u -= w_d(z);
                        if (u <= 0.0) break;
                    }
                    const std::size_t word =
                        sample_cumulative(word_cdf.col(z), unif(rng));
                    if (counts[word] == 0) touched.push_back(word);
                    ++counts[word];
                }
                std::sort(touched.begin(), touched.end());
                auto& doc = out.corpus.docs[d];
                doc.reserve(touched.size());
                for (std::size_t word : touched) {
                    doc.emplace_back(word, counts[word]);
                    counts[word] = 0;
                }
            }
        });
    return out;
}

}  // namespace anchor

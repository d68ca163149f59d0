#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "anchor/cooccur.hpp"
#include "anchor/io.hpp"
#include "anchor/synth.hpp"
#include "test_util.hpp"

using namespace anchor;

namespace {

SparseCorpus corpus_of(std::size_t v,
                       std::vector<std::vector<SparseCorpus::Entry>> docs) {
    SparseCorpus c;
    c.num_docs = docs.size();
    c.vocab_size = v;
    c.docs = std::move(docs);
    for (std::size_t w = 0; w < v; ++w) c.vocab.push_back("w" + std::to_string(w));
    return c;
}

}  // namespace

TEST_CASE("two distinct words in one document give the off-diagonal Q") {
    SparseCorpus c = corpus_of(2, {{{0, 1}, {1, 1}}});
    Cooccurrence cooc = build_q(c);
    CHECK(cooc.q(0, 0) == doctest::Approx(0.0));
    CHECK(cooc.q(0, 1) == doctest::Approx(0.5));
    CHECK(cooc.q(1, 0) == doctest::Approx(0.5));
    CHECK(cooc.q(1, 1) == doctest::Approx(0.0));
    CHECK(cooc.p_w(0) == doctest::Approx(0.5));
    CHECK(cooc.p_w(1) == doctest::Approx(0.5));
    CHECK(cooc.q_bar(0, 1) == doctest::Approx(1.0));
    CHECK(cooc.q_bar(1, 0) == doctest::Approx(1.0));
    CHECK(cooc.zero_rows.empty());
}

TEST_CASE("a repeated single word concentrates Q and flags the zero row") {
    SparseCorpus c = corpus_of(2, {{{0, 2}}});
    Cooccurrence cooc = build_q(c);
    CHECK(cooc.q(0, 0) == doctest::Approx(1.0));
    CHECK(cooc.q(1, 1) == doctest::Approx(0.0));
    CHECK(cooc.zero_rows == std::set<std::size_t>{1});
    CHECK(cooc.q_bar.row(1).cwiseAbs().sum() == doctest::Approx(0.0));
}

TEST_CASE("a document of length < 2 is rejected by name") {
    SparseCorpus c = corpus_of(2, {{{0, 1}, {1, 1}}, {{1, 1}}});
    try {
        build_q(c);
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("document 1") != std::string::npos);
    }
}

TEST_CASE("Q is exactly symmetric and sums to one") {
    std::mt19937_64 rng(5);
    auto model = test_util::random_separable_model(20, 3, 0.1, rng);
    GeneratorSpec spec;
    spec.a = model.a;
    spec.num_docs = 500;
    spec.doc_length = 15;
    spec.prior = DirichletPrior{Eigen::VectorXd::Constant(3, 0.5)};
    spec.seed = 42;
    Cooccurrence cooc = build_q(generate_corpus(spec).corpus);
    CHECK((cooc.q - cooc.q.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(cooc.q.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cooc.q.minCoeff() >= 0.0);
    CHECK(cooc.p_w.sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (Eigen::Index i = 0; i < cooc.q_bar.rows(); ++i) {
        if (!cooc.zero_rows.count(static_cast<std::size_t>(i))) {
            CHECK(cooc.q_bar.row(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("deterministic and parallel builds agree") {
    std::mt19937_64 rng(6);
    auto model = test_util::random_separable_model(15, 2, 0.1, rng);
    GeneratorSpec spec;
    spec.a = model.a;
    spec.num_docs = 3000;
    spec.doc_length = 8;
    spec.prior = DirichletPrior{Eigen::VectorXd::Constant(2, 1.0)};
    spec.seed = 1;
    SparseCorpus corpus = generate_corpus(spec).corpus;

    CooccurOptions serial;
    Cooccurrence a = build_q(corpus, serial);
    CooccurOptions parallel;
    parallel.deterministic = false;
    parallel.num_threads = 4;
    Cooccurrence b = build_q(corpus, parallel);
    CHECK((a.q - b.q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("document order does not change Q in deterministic mode") {
    std::mt19937_64 rng(7);
    auto model = test_util::random_separable_model(10, 2, 0.1, rng);
    GeneratorSpec spec;
    spec.a = model.a;
    spec.num_docs = 200;
    spec.doc_length = 6;
    spec.prior = DirichletPrior{Eigen::VectorXd::Constant(2, 1.0)};
    spec.seed = 3;
    SparseCorpus corpus = generate_corpus(spec).corpus;
    SparseCorpus reversed = corpus;
    std::reverse(reversed.docs.begin(), reversed.docs.end());
    Cooccurrence a = build_q(corpus);
    Cooccurrence b = build_q(reversed);
    CHECK((a.q - b.q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("row_normalize handles zero rows and rejects negatives") {
    Eigen::MatrixXd q(2, 2);
    q << 1.0, 0.0, 0.0, 0.0;
    RowNormalized rn = row_normalize(q);
    CHECK(rn.q_bar(0, 0) == doctest::Approx(1.0));
    CHECK(rn.p_w(0) == doctest::Approx(1.0));
    CHECK(rn.zero_rows == std::set<std::size_t>{1});

    q(0, 1) = -0.1;
    CHECK_THROWS_AS(row_normalize(q), std::invalid_argument);
}

TEST_CASE("row normalization is scale invariant") {
    std::mt19937_64 rng(8);
    Eigen::MatrixXd q = Eigen::MatrixXd::Random(6, 6).cwiseAbs();
    for (double c : {0.1, 3.0, 1e4}) {
        RowNormalized base = row_normalize(q);
        RowNormalized scaled = row_normalize(c * q);
        CHECK((base.q_bar - scaled.q_bar).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((scaled.p_w - c * base.p_w).cwiseAbs().maxCoeff() <
              1e-12 * c * base.p_w.maxCoeff());
    }
}

TEST_CASE("estimator deviation from A Wbar A' shrinks as M grows") {
    std::mt19937_64 rng(9);
    auto model = test_util::random_separable_model(8, 2, 0.15, rng);
    std::vector<double> deviations;
    for (std::size_t m : {std::size_t(1000), std::size_t(10000),
                          std::size_t(200000)}) {
        std::vector<double> trials;
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            GeneratorSpec spec;
            spec.a = model.a;
            spec.num_docs = m;
            spec.doc_length = 10;
            spec.prior = DirichletPrior{Eigen::VectorXd::Constant(2, 0.5)};
            spec.seed = seed;
            GeneratedCorpus gen = generate_corpus(spec);
            Cooccurrence cooc = build_q(gen.corpus);
            Eigen::MatrixXd wbar = gen.w_true * gen.w_true.transpose() /
                                   static_cast<double>(m);
            Eigen::MatrixXd expected = model.a * wbar * model.a.transpose();
            Eigen::MatrixXd raw = cooc.q * cooc.raw_total;
            trials.push_back((raw - expected).cwiseAbs().maxCoeff());
        }
        std::sort(trials.begin(), trials.end());
        deviations.push_back(trials[2]);  // median of 5
    }
    CHECK(deviations[1] < deviations[0]);
    CHECK(deviations[2] < deviations[1]);
    CHECK(deviations[2] < 5e-3);
}

TEST_CASE("Q binary round trip") {
    std::mt19937_64 rng(10);
    Eigen::MatrixXd q = Eigen::MatrixXd::Random(5, 5).cwiseAbs();
    q = ((q + q.transpose()) / q.sum()).eval();
    q /= q.sum();
    Eigen::VectorXd p_w = q.rowwise().sum();
    const std::string path =
        (std::filesystem::temp_directory_path() / "qtest.bin").string();
    save_q_binary(path, q, p_w);
    Eigen::MatrixXd q2;
    Eigen::VectorXd p2;
    load_q_binary(path, q2, p2);
    CHECK((q - q2).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p_w - p2).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

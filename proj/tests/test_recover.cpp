#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "anchor/recover.hpp"
#include "anchor/synth.hpp"
#include "test_util.hpp"

using namespace anchor;

namespace {

AnchorSet anchor_set(std::vector<std::size_t> indices) {
    AnchorSet s;
    s.indices = std::move(indices);
    s.candidates = s.indices;
    return s;
}

// Near the vertex optima of exact-Q problems the KKT gap shrinks
// quadratically in the remaining distance, so exactness checks run the
// solver well past the default tolerance.
RecoverOptions tight_options() {
    RecoverOptions options;
    options.eg_tolerance = 1e-13;
    options.eg_max_iters = 20000;
    return options;
}

// Hand-chosen 6x2 separable word-topic matrix with anchors at rows 0, 1.
test_util::SeparableModel hand_model() {
    test_util::SeparableModel model;
    model.a = Eigen::MatrixXd(6, 2);
    model.a << 0.3, 0.0, 0.0, 0.4, 0.2, 0.1, 0.2, 0.2, 0.2, 0.1, 0.1, 0.2;
    model.r = Eigen::MatrixXd(2, 2);
    model.r << 0.4, 0.1, 0.1, 0.4;
    model.anchors = {0, 1};
    return model;
}

// Closed-form p(z | w) from A and p(z): proportional to A_{w,z} p(z).
Eigen::MatrixXd bayes_oracle(const Eigen::MatrixXd& a,
                             const Eigen::VectorXd& p_z) {
    Eigen::MatrixXd c = a * p_z.asDiagonal();
    for (Eigen::Index i = 0; i < c.rows(); ++i) c.row(i) /= c.row(i).sum();
    return c;
}

// Smallest worst-case entry error over all column permutations of rhs.
double best_permuted_max_error(const Eigen::MatrixXd& lhs,
                               const Eigen::MatrixXd& rhs) {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(lhs.cols()));
    for (std::size_t i = 0; i < perm.size(); ++i)
        perm[i] = static_cast<Eigen::Index>(i);
    double best = std::numeric_limits<double>::infinity();
    do {
        double worst = 0.0;
        for (std::size_t j = 0; j < perm.size(); ++j) {
            worst = std::max(worst, (lhs.col(static_cast<Eigen::Index>(j)) -
                                     rhs.col(perm[j]))
                                        .cwiseAbs()
                                        .maxCoeff());
        }
        best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("an anchor word's coefficient row is a basis vector") {
    auto model = hand_model();
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    for (Divergence d : {Divergence::KL, Divergence::L2}) {
        ConvexCoefficients c = recover_coefficients(cooc, anchor_set({0, 1}),
                                                    d, tight_options());
        CHECK(c.c(0, 0) == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(c.c(0, 1) == doctest::Approx(0.0).epsilon(1e-4));
        CHECK(c.c(1, 1) == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("coefficients on an exact Q match the closed-form posterior") {
    auto model = hand_model();
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    const Eigen::VectorXd p_z = model.r.rowwise().sum();
    const Eigen::MatrixXd oracle = bayes_oracle(model.a, p_z);
    for (Divergence d : {Divergence::KL, Divergence::L2}) {
        ConvexCoefficients c = recover_coefficients(cooc, anchor_set({0, 1}),
                                                    d, tight_options());
        CHECK((c.c - oracle).cwiseAbs().maxCoeff() < 1e-4);
        CHECK(c.uniform_rows.empty());
    }
}

TEST_CASE("a zero q-row gets the uniform coefficient row") {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
    q(0, 1) = q(1, 0) = 0.5;
    Cooccurrence cooc = cooccurrence_from_q(q);
    ConvexCoefficients c =
        recover_coefficients(cooc, anchor_set({0, 1}), Divergence::L2);
    CHECK(c.uniform_rows == std::set<std::size_t>{2});
    CHECK(c.c(2, 0) == doctest::Approx(0.5));
    CHECK(c.c(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("an anchor that is itself a zero row is rejected") {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(3, 3);
    q(0, 1) = q(1, 0) = 0.5;
    Cooccurrence cooc = cooccurrence_from_q(q);
    CHECK_THROWS_AS(
        recover_coefficients(cooc, anchor_set({0, 2}), Divergence::L2),
        std::invalid_argument);
}

TEST_CASE("word solves are independent of the thread count") {
    std::mt19937_64 rng(21);
    auto model = test_util::random_separable_model(25, 4, 0.1, rng);
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    AnchorSet anchors = anchor_set(model.anchors);
    RecoverOptions serial;
    RecoverOptions parallel;
    parallel.num_threads = 4;
    for (Divergence d : {Divergence::KL, Divergence::L2}) {
        ConvexCoefficients a = recover_coefficients(cooc, anchors, d, serial);
        ConvexCoefficients b = recover_coefficients(cooc, anchors, d, parallel);
        CHECK((a.c - b.c).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("identity coefficients with uniform weights give identity topics") {
    ConvexCoefficients c;
    c.c = Eigen::MatrixXd::Identity(3, 3);
    BayesResult out = bayes_rule_topics(c, Eigen::VectorXd::Constant(3, 1.0 / 3));
    CHECK((out.a - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((out.p_z - Eigen::VectorXd::Constant(3, 1.0 / 3))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("a topic with zero posterior mass is reported as dead") {
    ConvexCoefficients c;
    c.c = Eigen::MatrixXd::Zero(4, 2);
    c.c.col(0).setOnes();
    try {
        bayes_rule_topics(c, Eigen::VectorXd::Constant(4, 0.25));
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        // Topics are numbered from 1 in messages; column 1 is topic 2.
        CHECK(std::string(e.what()).find("topic 2") != std::string::npos);
    }
}

TEST_CASE("recovered topic columns and the prior are normalized") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::MatrixXd rows(8, 3);
    for (Eigen::Index i = 0; i < 8; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) rows(i, j) = unif(rng);
        rows.row(i) /= rows.row(i).sum();
    }
    Eigen::VectorXd p_w(8);
    for (Eigen::Index i = 0; i < 8; ++i) p_w(i) = unif(rng);
    p_w /= p_w.sum();
    ConvexCoefficients c;
    c.c = rows;
    BayesResult out = bayes_rule_topics(c, p_w);
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK(out.a.col(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(out.a.col(j).minCoeff() >= 0.0);
    }
    CHECK(out.p_z.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("topic moments through an identity mixing matrix are Q itself") {
    Eigen::MatrixXd q(2, 2);
    q << 0.4, 0.1, 0.1, 0.4;
    Eigen::MatrixXd r = recover_r(Eigen::MatrixXd::Identity(2, 2), q);
    CHECK((r - q).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("topic moments are exact on a constructed Q") {
    auto model = hand_model();
    Eigen::MatrixXd r =
        recover_r(model.a, test_util::exact_q(model));
    CHECK((r - model.r).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("moment error under Q noise obeys the conditioning bound") {
    std::mt19937_64 rng(23);
    auto model = hand_model();
    const Eigen::MatrixXd q = test_util::exact_q(model);
    Eigen::MatrixXd noise = Eigen::MatrixXd::Random(6, 6);
    noise = ((noise + noise.transpose()) / 2.0).eval();
    const double delta = 1e-4;
    noise *= delta / noise.norm();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(model.a);
    const double sigma_min = svd.singularValues().minCoeff();
    const double kappa = 1.0 / (sigma_min * sigma_min);

    Eigen::MatrixXd r_hat = recover_r(model.a, q + noise);
    CHECK((r_hat - model.r).norm() <= kappa * delta * (1.0 + 1e-9));
}

TEST_CASE("the matrix-inversion baseline is exact on a constructed Q") {
    auto model = hand_model();
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    TopicModel out = recover_original(cooc, anchor_set({0, 1}));
    CHECK(best_permuted_max_error(out.a, model.a) < 1e-8);
    CHECK((out.r - model.r).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("the matrix-inversion baseline reduces to p_w at one topic") {
    Eigen::VectorXd p(4);
    p << 0.4, 0.3, 0.2, 0.1;
    Eigen::MatrixXd q = p * p.transpose();
    Cooccurrence cooc = cooccurrence_from_q(q);
    TopicModel out = recover_original(cooc, anchor_set({0}));
    CHECK((out.a.col(0) - p).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(out.r(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("the matrix-inversion baseline projects noisy columns") {
    std::mt19937_64 rng(24);
    auto model = hand_model();
    Eigen::MatrixXd q = test_util::exact_q(model);
    Eigen::MatrixXd noise = Eigen::MatrixXd::Random(6, 6).cwiseAbs();
    q += 0.02 * ((noise + noise.transpose()) / 2.0);
    q /= q.sum();
    TopicModel out = recover_original(cooccurrence_from_q(q), anchor_set({0, 1}));
    for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK(out.a.col(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(out.a.col(j).minCoeff() >= 0.0);
    }
}

TEST_CASE("the matrix-inversion baseline rejects a singular anchor block") {
    Eigen::VectorXd p(3);
    p << 0.5, 0.3, 0.2;
    Eigen::MatrixXd q = p * p.transpose();  // rank one: any 2x2 block singular
    CHECK_THROWS_AS(recover_original(cooccurrence_from_q(q), anchor_set({0, 1})),
                    std::runtime_error);
}

TEST_CASE("a two-word diagonal-free Q yields a permutation matrix") {
    Eigen::MatrixXd q(2, 2);
    q << 0.0, 0.5, 0.5, 0.0;
    Cooccurrence cooc = cooccurrence_from_q(q);
    for (RecoverMethod m : {RecoverMethod::RecoverKL, RecoverMethod::RecoverL2,
                            RecoverMethod::OriginalRecover}) {
        TopicModel out = recover_topic_model(cooc, anchor_set({0, 1}), m,
                                             tight_options());
        Eigen::MatrixXd expected(2, 2);
        expected << 1.0, 0.0, 0.0, 1.0;
        CHECK(best_permuted_max_error(out.a, expected) < 1e-6);
    }
}

TEST_CASE("both divergences agree closely on an exact Q") {
    std::mt19937_64 rng(25);
    auto model = test_util::random_separable_model(15, 3, 0.15, rng);
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    AnchorSet anchors = anchor_set(model.anchors);
    TopicModel kl = recover_topic_model(cooc, anchors,
                                        RecoverMethod::RecoverKL,
                                        tight_options());
    TopicModel l2 = recover_topic_model(cooc, anchors,
                                        RecoverMethod::RecoverL2,
                                        tight_options());
    for (Eigen::Index j = 0; j < 3; ++j) {
        CHECK((kl.a.col(j) - l2.a.col(j)).cwiseAbs().sum() < 0.02);
    }
}

TEST_CASE("the full chain reproduces a separable model from its exact Q") {
    std::mt19937_64 rng(26);
    auto model = test_util::random_separable_model(20, 3, 0.15, rng);
    Cooccurrence cooc = cooccurrence_from_q(test_util::exact_q(model));
    std::vector<std::size_t> candidates(20);
    for (std::size_t i = 0; i < 20; ++i) candidates[i] = i;
    AnchorOptions opts;
    opts.k = 3;
    AnchorSet anchors = select_anchors(cooc.q_bar, candidates, opts);
    std::set<std::size_t> found(anchors.indices.begin(), anchors.indices.end());
    std::set<std::size_t> truth(model.anchors.begin(), model.anchors.end());
    CHECK(found == truth);
    for (RecoverMethod m : {RecoverMethod::RecoverKL, RecoverMethod::RecoverL2,
                            RecoverMethod::OriginalRecover}) {
        TopicModel out = recover_topic_model(cooc, anchors, m,
                                             tight_options());
        CHECK(best_permuted_max_error(out.a, model.a) < 1e-3);
    }
}

TEST_CASE("recovery only depends on Q up to scale") {
    auto model = hand_model();
    Eigen::MatrixXd q = test_util::exact_q(model);
    TopicModel base = recover_topic_model(cooccurrence_from_q(q),
                                          anchor_set({0, 1}),
                                          RecoverMethod::RecoverL2);
    TopicModel scaled = recover_topic_model(cooccurrence_from_q(7.5 * q),
                                            anchor_set({0, 1}),
                                            RecoverMethod::RecoverL2);
    CHECK((base.a - scaled.a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((base.r - scaled.r).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the concentration parameter is exact on ideal moments") {
    const Eigen::MatrixXd r = test_util::dirichlet_second_moment(10, 0.3);
    const Eigen::VectorXd p_z = r.rowwise().sum();
    auto alpha = estimate_dirichlet(p_z, r);
    REQUIRE(alpha.has_value());
    CHECK(alpha->sum() == doctest::Approx(0.3).epsilon(1e-6));
    for (Eigen::Index k = 0; k < 10; ++k) {
        CHECK((*alpha)(k) == doctest::Approx(0.03).epsilon(1e-6));
    }
}

TEST_CASE("a rank-one moment matrix leaves the concentration unset") {
    const Eigen::VectorXd p_z = Eigen::VectorXd::Constant(3, 1.0 / 3);
    const Eigen::MatrixXd r = p_z * p_z.transpose();
    CHECK(!estimate_dirichlet(p_z, r).has_value());
}

TEST_CASE("the concentration is recovered from Monte Carlo moments") {
    const Eigen::Index k = 5;
    const Eigen::VectorXd alpha = Eigen::VectorXd::Constant(k, 0.2);
    std::mt19937_64 rng(27);
    const std::size_t n = 1000000;
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd p_z = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd w = dirichlet_draw(alpha, rng);
        r += w * w.transpose();
        p_z += w;
    }
    r /= static_cast<double>(n);
    p_z /= static_cast<double>(n);
    auto estimated = estimate_dirichlet(p_z, r);
    REQUIRE(estimated.has_value());
    CHECK(estimated->sum() == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("simplex projection matches hand cases and is idempotent") {
    Eigen::VectorXd on_simplex(3);
    on_simplex << 0.2, 0.5, 0.3;
    CHECK((project_to_simplex(on_simplex) - on_simplex).cwiseAbs().maxCoeff() <
          1e-12);

    Eigen::VectorXd outside(2);
    outside << 1.5, 0.5;  // projects to (1, 0)
    Eigen::VectorXd projected = project_to_simplex(outside);
    CHECK(projected(0) == doctest::Approx(1.0));
    CHECK(projected(1) == doctest::Approx(0.0));

    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd v = Eigen::VectorXd::Random(6) * 3.0;
        Eigen::VectorXd p = project_to_simplex(v);
        CHECK(p.minCoeff() >= 0.0);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((project_to_simplex(p) - p).cwiseAbs().maxCoeff() < 1e-12);
        // The projection is the closest simplex point: no random simplex
        // vector should be closer.
        Eigen::VectorXd other = dirichlet_draw(
            Eigen::VectorXd::Constant(6, 1.0), rng);
        CHECK((v - p).squaredNorm() <= (v - other).squaredNorm() + 1e-12);
    }
}

TEST_CASE("the pseudo-inverse inverts full-rank tall matrices") {
    std::mt19937_64 rng(29);
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(7, 3);
    Eigen::MatrixXd pinv = pseudo_inverse(a);
    CHECK((pinv * a - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-10);
    // Rank-deficient: A A+ A = A still holds.
    a.col(2) = a.col(0) + a.col(1);
    pinv = pseudo_inverse(a);
    CHECK((a * pinv * a - a).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("method names round trip") {
    for (RecoverMethod m : {RecoverMethod::RecoverKL, RecoverMethod::RecoverL2,
                            RecoverMethod::OriginalRecover}) {
        CHECK(recover_method_from_string(to_string(m)) == m);
    }
    CHECK(recover_method_from_string("kl") == RecoverMethod::RecoverKL);
    CHECK(recover_method_from_string("l2") == RecoverMethod::RecoverL2);
    CHECK(recover_method_from_string("original") ==
          RecoverMethod::OriginalRecover);
    CHECK_THROWS(recover_method_from_string("nope"));
}

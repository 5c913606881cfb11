#include <doctest.h>

#include <random>
#include <sstream>

#include "petitions/issues.hpp"

using namespace petitions;
using namespace petitions::issues;

namespace {

lda::TopicModel model_with(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& phi) {
    lda::TopicModel m;
    m.theta = theta;
    m.phi = phi;
    return m;
}

int nonzero_edges(const Eigen::MatrixXd& w) {
    int n = 0;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = i + 1; j < w.cols(); ++j)
            n += w(i, j) != 0.0;
    return n;
}

} // namespace

TEST_CASE("cosine anchors") {
    const Eigen::Vector3d u(1, 2, 2);
    const Eigen::Vector3d v(2, 1, 2);
    CHECK(cosine(u, u) == doctest::Approx(1.0));
    CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
    CHECK(cosine(u, v) == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
    CHECK(cosine(Eigen::Vector3f(1, 2, 2), Eigen::Vector3f(2, 1, 2)) == doctest::Approx(8.0f / 9.0f));
    CHECK_THROWS_AS(cosine(u, Eigen::Vector3d::Zero()), ValidationError);
    CHECK_THROWS_AS(cosine(Eigen::VectorXd(u), Eigen::VectorXd::Ones(2)), ValidationError);
}

TEST_CASE("prevalence arithmetic") {
    SUBCASE("single petition") {
        Eigen::MatrixXd theta(1, 2);
        theta << 0.6, 0.4;
        const auto p = prevalence(theta, Eigen::VectorXd::Constant(1, 100.0));
        CHECK(p.by_signatures(0) == doctest::Approx(60.0));
        CHECK(p.by_signatures(1) == doctest::Approx(40.0));
        CHECK(p.by_petitions(0) == doctest::Approx(0.6));
    }
    SUBCASE("five petitions by hand") {
        Eigen::MatrixXd theta(5, 3);
        theta << 0.5, 0.25, 0.25,  //
            0.1, 0.8, 0.1,         //
            0.2, 0.2, 0.6,         //
            1.0, 0.0, 0.0,         //
            0.0, 0.5, 0.5;
        Eigen::VectorXd sig(5);
        sig << 100, 10, 1000, 0, 40;
        const auto p = prevalence(theta, sig);
        // column sums of theta
        CHECK(p.by_petitions(0) == doctest::Approx(1.8));
        CHECK(p.by_petitions(1) == doctest::Approx(1.75));
        CHECK(p.by_petitions(2) == doctest::Approx(1.45));
        // 50 + 1 + 200 + 0 + 0; 25 + 8 + 200 + 20; 25 + 1 + 600 + 20
        CHECK(p.by_signatures(0) == doctest::Approx(251.0));
        CHECK(p.by_signatures(1) == doctest::Approx(253.0));
        CHECK(p.by_signatures(2) == doctest::Approx(646.0));
        CHECK(p.rank_by_petitions == std::vector<int>{1, 2, 3});
        CHECK(p.rank_by_signatures == std::vector<int>{3, 2, 1});

        const auto doubled = prevalence(theta, 2.0 * sig);
        CHECK(doubled.by_signatures == 2.0 * p.by_signatures);
        CHECK(doubled.by_petitions == p.by_petitions);
    }
}

TEST_CASE("descending ranks break ties by index") {
    Eigen::VectorXd v(4);
    v << 1.0, 3.0, 3.0, 2.0;
    CHECK(descending_ranks(v) == std::vector<int>{4, 1, 2, 3});
}

TEST_CASE("success probability") {
    // Ten petitions: arg-max topics 0,0,0,0,1,1,1,2,2,2; successes marked *.
    Eigen::MatrixXd theta = Eigen::MatrixXd::Constant(10, 4, 0.1);
    const int top[] = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2};
    for (int d = 0; d < 10; ++d)
        theta(d, top[d]) = 0.7;
    Eigen::VectorXd sig(10);
    sig << 20000, 9999, 10000, 5, 5, 5, 5, 50000, 100000, 12;
    const auto s = success_probability(theta, sig, 10000);
    CHECK(s.assigned == std::vector<std::int64_t>{4, 3, 3, 0});
    CHECK(s.successes == std::vector<std::int64_t>{2, 0, 2, 0});
    CHECK(*s.raw[0] == doctest::Approx(0.5));
    CHECK(*s.raw[1] == 0.0);
    CHECK(*s.raw[2] == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(s.raw[3].has_value());
    // (successes + 1) / (assigned + 2)
    CHECK(s.smoothed(0) == doctest::Approx(0.5));
    CHECK(s.smoothed(1) == doctest::Approx(0.2));
    CHECK(s.smoothed(3) == doctest::Approx(0.5));

    const auto none = success_probability(theta, Eigen::VectorXd::Constant(10, 3.0), 10000);
    for (int t = 0; t < 3; ++t)
        CHECK(*none.raw[static_cast<std::size_t>(t)] == 0.0);
}

TEST_CASE("co-occurrence network") {
    SUBCASE("one-hot documents are orthogonal") {
        Eigen::MatrixXd theta(4, 2);
        theta << 1, 0, 0, 1, 1, 0, 0, 1;
        const auto net = co_occurrence_network(model_with(theta, Eigen::MatrixXd::Constant(2, 3, 1.0 / 3)));
        CHECK(net.weights(0, 1) == 0.0);
        CHECK(net.weights(0, 0) == 1.0);
    }
    SUBCASE("four documents by direct column cosine") {
        Eigen::MatrixXd theta(4, 3);
        theta << 0.5, 0.3, 0.2,  //
            0.1, 0.1, 0.8,       //
            0.3, 0.3, 0.4,       //
            0.7, 0.2, 0.1;
        const auto net = co_occurrence_network(model_with(theta, Eigen::MatrixXd::Constant(3, 3, 1.0 / 3)));
        // columns (.5,.1,.3,.7) and (.3,.1,.3,.2): dot .39, norms sqrt(.84), sqrt(.23)
        CHECK(net.weights(0, 1) == doctest::Approx(0.39 / std::sqrt(0.84 * 0.23)));
        CHECK(net.weights(1, 0) == net.weights(0, 1));
        CHECK(net.kind == NetworkKind::co_occurrence);
    }
}

TEST_CASE("word-distribution network") {
    SUBCASE("identical rows") {
        Eigen::MatrixXd phi(2, 3);
        phi << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
        const auto net = word_distribution_network(model_with(Eigen::MatrixXd::Constant(1, 2, 0.5), phi));
        CHECK(net.weights(0, 1) == doctest::Approx(1.0));
    }
    SUBCASE("disjoint blocks meet only through the smoothing floor") {
        // Three topics over 3 x 30 terms: block mass a per own term, floor e elsewhere.
        const double e = 1e-4;
        const double a = (1.0 - 60 * e) / 30;
        Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(3, 90, e);
        for (int t = 0; t < 3; ++t)
            phi.block(t, 30 * t, 1, 30).setConstant(a);
        const auto net = word_distribution_network(model_with(Eigen::MatrixXd::Constant(1, 3, 1.0 / 3), phi));
        const double floor_cosine = (60 * a * e + 30 * e * e) / (30 * a * a + 60 * e * e);
        CHECK(net.weights(0, 1) == doctest::Approx(floor_cosine).epsilon(1e-12));
        CHECK(net.weights(1, 2) == doctest::Approx(floor_cosine).epsilon(1e-12));
    }
}

TEST_CASE("network pruning") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    IssueNetwork net;
    net.weights = Eigen::MatrixXd::Identity(10, 10);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            net.weights(i, j) = net.weights(j, i) = u(rng);

    CHECK(prune_network(net, 1.0).weights == net.weights);
    const auto pruned = prune_network(net, 0.2);
    CHECK(nonzero_edges(pruned.weights) == 9);
    CHECK(pruned.weights.diagonal() == Eigen::VectorXd::Ones(10));

    IssueNetwork four;
    four.weights.resize(4, 4);
    four.weights << 1, .9, .1, .5,  //
        .9, 1, .7, .2,              //
        .1, .7, 1, .3,              //
        .5, .2, .3, 1;
    Eigen::MatrixXd expected = four.weights;
    expected(0, 2) = expected(2, 0) = 0;
    expected(1, 3) = expected(3, 1) = 0;
    expected(2, 3) = expected(3, 2) = 0;
    CHECK(prune_network(four, 0.5).weights == expected);

    // Ties with the weakest kept edge survive.
    four.weights(2, 3) = four.weights(3, 2) = 0.5;
    CHECK(nonzero_edges(prune_network(four, 0.5).weights) == 4);
}

TEST_CASE("edge summary") {
    Eigen::MatrixXd w(3, 3);
    w << 1, .2, .5,  //
        .2, 1, .8,   //
        .5, .8, 1;
    const auto s = summarize_edges(w);
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.max == 0.8);
    CHECK(s.max_pair == std::pair{1, 2});
    CHECK(s.min == 0.2);
    CHECK(s.min_pair == std::pair{0, 1});
}

TEST_CASE("prevalence from a model checks row alignment") {
    Corpus corpus;
    Petition p;
    p.id = "1";
    p.signatures_by_constituency = {{"A", 10}};
    corpus.petitions = {p};
    lda::TopicModel m = model_with(Eigen::MatrixXd::Constant(1, 2, 0.5), Eigen::MatrixXd::Constant(2, 2, 0.5));
    m.doc_ids = {"1"};
    CHECK(prevalence(m, corpus).by_signatures(0) == doctest::Approx(5.0));
    m.doc_ids = {"2"};
    CHECK_THROWS_AS(prevalence(m, corpus), ValidationError);
}

TEST_CASE("exports start with the metadata header") {
    Eigen::MatrixXd theta(2, 2);
    theta << 0.9, 0.1, 0.2, 0.8;
    const Eigen::Vector2d sig(20000, 5);
    const auto p = prevalence(theta, sig);
    const auto s = success_probability(theta, sig);
    MetadataHeader h;
    h.config_hash = "abc";
    std::ostringstream out;
    write_prevalence_csv(out, p, s, {"School", "Family"}, h);
    CHECK(out.str().rfind(h.csv_line() + "\n", 0) == 0);
    CHECK(out.str().find("School") != std::string::npos);
    std::ostringstream edges;
    std::ostringstream nodes;
    write_network_csv(edges, nodes, co_occurrence_network(model_with(theta, Eigen::MatrixXd::Constant(2, 2, 0.5)), p.by_signatures),
                      {"School", "Family"}, h);
    CHECK(edges.str().rfind(h.csv_line(), 0) == 0);
    CHECK(nodes.str().rfind(h.csv_line(), 0) == 0);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "toy.hpp"
#include "rcs/simmetric.hpp"

using namespace rcs;
using testing_support::make_toy;
using testing_support::random_vec;
using testing_support::temp_dir;

TEST(Embeddings, LoadsDeclaredDimension)
{
    temp_dir dir;
    const auto store = load_embeddings(dir.write("e.tsv", "dim 3\np:a\t1 2 3\nqt:q\t0.5 -1e-3 4\n"));
    EXPECT_EQ(store.dimension(), 3u);
    EXPECT_EQ(store.size(), 2u);
    EXPECT_DOUBLE_EQ(store.at("qt:q")[1], -1e-3);
}

TEST(Embeddings, RejectsBadRows)
{
    temp_dir dir;
    try {
        load_embeddings(dir.write("short.tsv", "dim 3\np:a\t1 2 3\np:b\t1 2\n"));
        FAIL();
    } catch (const data_error& e) {
        EXPECT_NE(std::string(e.what()).find("p:b"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_embeddings(dir.write("dup.tsv", "dim 2\np:a\t1 2\np:a\t3 4\n")), data_error);
    EXPECT_THROW(load_embeddings(dir.write("hdr.tsv", "p:a\t1 2\n")), data_error);
    EXPECT_THROW(load_embeddings(dir.write("dim1.tsv", "dim 1\np:a\t1\n")), data_error);
    EXPECT_THROW(load_embeddings(dir.write("nan.tsv", "dim 2\np:a\t1 nan\n")), data_error);
    EXPECT_THROW(load_embeddings(dir.write("txt.tsv", "dim 2\np:a\t1 x\n")), data_error);
    EXPECT_THROW(load_embeddings(dir.write("empty.tsv", "")), data_error);
}

TEST(Embeddings, FormatRoundTrip)
{
    temp_dir dir;
    const std::vector<std::pair<std::string, vec>> rows = {{"p:x", {0.1, 1.0 / 3.0}}, {"ql:q", {-2.5, 1e-12}}};
    const auto store = load_embeddings(dir.write("e.tsv", format_embeddings(2, rows)));
    EXPECT_EQ(store.at("p:x"), rows[0].second);
    EXPECT_EQ(store.at("ql:q"), rows[1].second);
}

TEST(BaseSimilarity, IdentityOrthogonalAndHandValues)
{
    embedding_store s(2);
    s.add("a", {1.0, 0.0});
    s.add("b", {0.0, 1.0});
    s.add("z", {0.0, 0.0});
    s.add("v", {3.0, 4.0});
    EXPECT_DOUBLE_EQ(base_similarity(s, "a", "a", base_kind::cosine), 1.0);
    EXPECT_DOUBLE_EQ(base_similarity(s, "a", "a", base_kind::euclidean), 1.0);
    EXPECT_DOUBLE_EQ(base_similarity(s, "a", "b", base_kind::cosine), 0.0);
    EXPECT_DOUBLE_EQ(base_similarity(s, "z", "v", base_kind::euclidean), 1.0 / 6.0);
    EXPECT_THROW(base_similarity(s, "z", "v", base_kind::cosine), data_error);
    EXPECT_THROW(base_similarity(s, "a", "missing", base_kind::cosine), data_error);
}

TEST(BaseSimilarity, SymmetryScalingAndMonotonicity)
{
    std::mt19937 gen(4);
    for (int i = 0; i < 200; ++i) {
        const auto u = random_vec(gen, 6);
        const auto v = random_vec(gen, 6);
        EXPECT_EQ(cosine(u, v), cosine(v, u));
        EXPECT_EQ(euclidean_similarity(u, v), euclidean_similarity(v, u));
        auto scaled = u;
        for (auto& x : scaled) {
            x *= 7.5;
        }
        EXPECT_NEAR(cosine(scaled, v), cosine(u, v), 1e-12);
        const double d = euclidean_distance(u, v);
        auto farther = v;
        for (std::size_t k = 0; k < v.size(); ++k) {
            farther[k] = u[k] + 2.0 * (v[k] - u[k]);
        }
        EXPECT_NEAR(euclidean_distance(u, farther), 2.0 * d, 1e-9);
        EXPECT_LT(euclidean_similarity(u, farther), euclidean_similarity(u, v));
    }
}

TEST(QueryVector, Models)
{
    embedding_store s(2);
    s.add("p:a", {1.0, 0.0});
    s.add("p:b", {0.0, 1.0});
    s.add("qt:q", {2.0, 2.0});
    const query q{"q", "t", {}, {}};
    const std::vector<std::string> one = {"a"};
    const std::vector<std::string> two = {"a", "b"};
    EXPECT_EQ(query_vector(s, q, query_model::mean, one), (vec{1.0, 0.0}));
    EXPECT_EQ(query_vector(s, q, query_model::mean, two), (vec{0.5, 0.5}));
    EXPECT_EQ(query_vector(s, q, query_model::title, two), (vec{2.0, 2.0}));
    try {
        query_vector(s, q, query_model::lead, two);
        FAIL();
    } catch (const data_error& e) {
        EXPECT_NE(std::string(e.what()).find("ql:q"), std::string::npos);
    }
    EXPECT_THROW(query_vector(s, q, query_model::mean, {}), data_error);
}

TEST(QsFeatures, IdentityAndOrthogonalCases)
{
    const vec u{1.0, 0.0};
    const vec v{0.0, 1.0};
    const auto same = qs_features(u, u, u);
    EXPECT_EQ(same, (qs_feature_vector{1.0, 1.0, 1.0, 0.0, 1.0}));

    const auto f = qs_features(u, v, u);
    EXPECT_DOUBLE_EQ(f[0], 0.0);
    EXPECT_DOUBLE_EQ(f[1], 1.0);
    EXPECT_DOUBLE_EQ(f[2], 0.0);
    EXPECT_DOUBLE_EQ(f[3], 1.0);
    EXPECT_DOUBLE_EQ(f[4], 1.0 / (1.0 + std::sqrt(2.0)));
    EXPECT_THROW(qs_features(u, vec{0.0, 0.0}, u), data_error);
}

TEST(QsFeatures, SymmetricAndFinite)
{
    std::mt19937 gen(9);
    for (int i = 0; i < 500; ++i) {
        const auto u = random_vec(gen, 5);
        const auto v = random_vec(gen, 5);
        const auto q = random_vec(gen, 5);
        const auto a = qs_features(u, v, q);
        EXPECT_EQ(a, qs_features(v, u, q));
        for (double x : a) {
            EXPECT_TRUE(std::isfinite(x));
        }
        qs_metric_model m;
        for (std::size_t k = 0; k < qs_feature_count; ++k) {
            m.weights[k] = std::normal_distribution<double>(0.0, 2.0)(gen);
        }
        m.bias = -0.3;
        EXPECT_EQ(qs_similarity(m, u, v, q), qs_similarity(m, v, u, q));
    }
}

TEST(QsMetric, ZeroModelPredictsHalf)
{
    std::mt19937 gen(2);
    const qs_metric_model zero;
    for (int i = 0; i < 50; ++i) {
        EXPECT_EQ(qs_similarity(zero, random_vec(gen, 3), random_vec(gen, 3), random_vec(gen, 3)), 0.5);
    }
}

TEST(QsMetric, SeparableToyTrainsAndGeneralizes)
{
    const auto train = make_toy(100, 12, 6);
    const auto test = make_toy(200, 8, 6);
    const auto result = train_qs_metric(train.store, train.gold, train.queries, query_model::title);
    EXPECT_LT(result.final_loss, result.initial_loss);
    EXPECT_EQ(result.epoch_losses.size(), 20u);

    const auto pairs = qs_training_pairs(test.store, test.gold, test.queries, query_model::title, 1);
    std::size_t correct = 0;
    for (const auto& p : pairs) {
        correct += (result.model.score(p.x) >= 0.5) == (p.y == 1) ? 1 : 0;
    }
    EXPECT_GE(static_cast<double>(correct) / static_cast<double>(pairs.size()), 0.95);

    const auto& q = test.queries[0];
    const auto& qv = test.store.at(title_key(q.id));
    const auto& a0 = test.store.at(paragraph_key(q.id + "-0-0"));
    const auto& a1 = test.store.at(paragraph_key(q.id + "-0-1"));
    const auto& b0 = test.store.at(paragraph_key(q.id + "-1-0"));
    EXPECT_GT(qs_similarity(result.model, a0, a1, qv), qs_similarity(result.model, a0, b0, qv));
}

TEST(QsMetric, DeterministicAndSeedSensitive)
{
    const auto toy = make_toy(7, 6, 5);
    const auto a = train_qs_metric(toy.store, toy.gold, toy.queries, query_model::mean, {20, 0.05, 13});
    const auto b = train_qs_metric(toy.store, toy.gold, toy.queries, query_model::mean, {20, 0.05, 13});
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.model.bias, b.model.bias);
    const auto c = train_qs_metric(toy.store, toy.gold, toy.queries, query_model::mean, {20, 0.05, 14});
    EXPECT_NE(a.model.weights, c.model.weights);
}

TEST(QsMetric, PairsAreBalancedPerQuery)
{
    const auto toy = make_toy(5, 3, 4);
    const auto pairs = qs_training_pairs(toy.store, toy.gold, toy.queries, query_model::lead, 3);
    // 8 items per query in blobs of 4: 12 same-blob and 16 cross-blob pairs, cut to 12 + 12.
    EXPECT_EQ(pairs.size(), 3u * 24u);
    std::size_t pos = 0;
    for (const auto& p : pairs) {
        pos += p.y == 1 ? 1 : 0;
    }
    EXPECT_EQ(pos, 3u * 12u);
}

TEST(QsMetric, TrainingErrors)
{
    auto toy = make_toy(5, 1, 3);
    for (auto& [pid, label] : toy.gold["t0"]) {
        label = "same";
    }
    EXPECT_THROW(train_qs_metric(toy.store, toy.gold, toy.queries, query_model::title), data_error);
    EXPECT_THROW(train_qs_metric(toy.store, {}, toy.queries, query_model::title), data_error);
}

TEST(QsMetric, ModelJsonRoundTrip)
{
    qs_metric_model m;
    m.weights = {0.5, -1.25, 3.0, 0.0, 1e-3};
    m.bias = -0.75;
    m.model = query_model::lead;
    const auto back = qs_model_from_json(json::parse(to_json(m).dump()));
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_EQ(back.model, query_model::lead);
    auto bad = to_json(m);
    bad["version"] = "other";
    EXPECT_THROW(qs_model_from_json(bad), data_error);
    bad = to_json(m);
    bad["weights"] = json::array({1, 2});
    EXPECT_THROW(qs_model_from_json(bad), data_error);
    EXPECT_THROW(parse_query_model("centroid"), usage_error);
}

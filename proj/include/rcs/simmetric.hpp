#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "benchmark.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace rcs {

using vec = std::vector<double>;

inline std::string paragraph_key(const std::string& id) { return "p:" + id; }
inline std::string title_key(const std::string& qid) { return "qt:" + qid; }
inline std::string lead_key(const std::string& qid) { return "ql:" + qid; }

/// Fixed-dimension vectors keyed by "p:<id>", "qt:<qid>", "ql:<qid>".
class embedding_store {
  public:
    explicit embedding_store(std::size_t dimension) : m_dim(dimension)
    {
        if (m_dim < 2) {
            throw data_error("embedding dimension must be at least 2");
        }
    }

    void add(const std::string& id, vec v)
    {
        if (v.size() != m_dim) {
            throw data_error("embedding " + id + " has " + std::to_string(v.size()) + " values, expected " +
                             std::to_string(m_dim));
        }
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw data_error("embedding " + id + " has a non-finite value");
            }
        }
        if (!m_vectors.emplace(id, std::move(v)).second) {
            throw data_error("duplicate embedding id " + id);
        }
    }

    [[nodiscard]] std::size_t dimension() const noexcept { return m_dim; }
    [[nodiscard]] std::size_t size() const noexcept { return m_vectors.size(); }
    [[nodiscard]] bool contains(const std::string& id) const { return m_vectors.count(id) > 0; }

    [[nodiscard]] const vec& at(const std::string& id) const
    {
        auto it = m_vectors.find(id);
        if (it == m_vectors.end()) {
            throw data_error("no embedding for " + id);
        }
        return it->second;
    }

  private:
    std::size_t m_dim;
    std::unordered_map<std::string, vec> m_vectors;
};

/// Header `dim <D>`, then `<id>\t<v1> ... <vD>` per line.
inline embedding_store load_embeddings(const fs::path& path)
{
    std::optional<embedding_store> store;
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        const auto where = path.string() + ":" + std::to_string(number);
        if (!store) {
            std::istringstream ss(line);
            std::string tag, extra;
            long long dim = 0;
            if (!(ss >> tag >> dim) || tag != "dim" || (ss >> extra) || dim < 2) {
                throw data_error(where + ": expected header \"dim <D>\" with D >= 2");
            }
            store.emplace(static_cast<std::size_t>(dim));
            return;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw data_error(where + ": expected \"<id>\\t<values>\"");
        }
        const auto id = line.substr(0, tab);
        std::istringstream ss(line.substr(tab + 1));
        vec v;
        std::string token;
        while (ss >> token) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(token, &used));
                if (used != token.size()) {
                    throw std::invalid_argument(token);
                }
            } catch (const std::exception&) {
                throw data_error(where + ": row " + id + " has a malformed value \"" + token + "\"");
            }
        }
        try {
            store->add(id, std::move(v));
        } catch (const error& e) {
            rethrow_with_context(e, where);
        }
    });
    if (!store) {
        throw data_error(path.string() + ": empty embedding file");
    }
    return std::move(*store);
}

inline std::string format_embeddings(std::size_t dim, const std::vector<std::pair<std::string, vec>>& rows)
{
    std::ostringstream out;
    out.precision(17);
    out << "dim " << dim << "\n";
    for (const auto& [id, v] : rows) {
        out << id << '\t';
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << (i ? " " : "") << v[i];
        }
        out << '\n';
    }
    return out.str();
}

// ---- vector arithmetic ----

inline double dot(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw data_error("vector dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double euclidean_distance(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw data_error("vector dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// u.v / (|u||v|), clamped to [-1, 1]. Zero-norm input is an error.
inline double cosine(std::span<const double> a, std::span<const double> b)
{
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw data_error("cosine similarity of a zero-norm vector");
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

/// Distance mapped onto (0, 1]: 1 / (1 + |u - v|).
inline double euclidean_similarity(std::span<const double> a, std::span<const double> b)
{
    return 1.0 / (1.0 + euclidean_distance(a, b));
}

enum class base_kind { euclidean, cosine };

inline double base_similarity(const embedding_store& store, const std::string& a, const std::string& b,
                              base_kind kind)
{
    const auto& u = store.at(a);
    const auto& v = store.at(b);
    return kind == base_kind::cosine ? cosine(u, v) : euclidean_similarity(u, v);
}

// ---- query-specific metric ----

enum class query_model { title, lead, mean };

inline std::string to_string(query_model m)
{
    switch (m) {
    case query_model::title:
        return "title";
    case query_model::lead:
        return "lead";
    case query_model::mean:
        return "mean";
    }
    return "?";
}

inline query_model parse_query_model(const std::string& s)
{
    if (s == "title") {
        return query_model::title;
    }
    if (s == "lead") {
        return query_model::lead;
    }
    if (s == "mean") {
        return query_model::mean;
    }
    throw usage_error("unknown query model " + s + " (title|lead|mean)");
}

/// Title/lead: the stored query vectors. Mean: centroid of the candidates.
inline vec query_vector(const embedding_store& store, const query& q, query_model model,
                        std::span<const std::string> candidates)
{
    switch (model) {
    case query_model::title:
        return store.at(title_key(q.id));
    case query_model::lead:
        return store.at(lead_key(q.id));
    case query_model::mean:
        break;
    }
    if (candidates.empty()) {
        throw data_error("mean query model for " + q.id + " needs at least one candidate");
    }
    vec centroid(store.dimension(), 0.0);
    for (const auto& id : candidates) {
        const auto& v = store.at(paragraph_key(id));
        for (std::size_t i = 0; i < centroid.size(); ++i) {
            centroid[i] += v[i];
        }
    }
    for (auto& x : centroid) {
        x /= static_cast<double>(candidates.size());
    }
    return centroid;
}

inline constexpr std::size_t qs_feature_count = 5;
inline constexpr const char* qs_feature_version = "qs-features-v1";
using qs_feature_vector = std::array<double, qs_feature_count>;

/// [cos(u,v), cos(u,q), cos(v,q), |cos(u,q) - cos(v,q)|, 1/(1+|u-v|)].
/// Features 1 and 2 are stored as min/max of the two query cosines so the
/// vector is exactly symmetric under swapping u and v.
inline qs_feature_vector qs_features(std::span<const double> u, std::span<const double> v,
                                     std::span<const double> q)
{
    const double uq = cosine(u, q);
    const double vq = cosine(v, q);
    return {cosine(u, v), std::max(uq, vq), std::min(uq, vq), std::abs(uq - vq), euclidean_similarity(u, v)};
}

inline double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

struct qs_metric_model {
    qs_feature_vector weights{};
    double bias = 0.0;
    std::string version = qs_feature_version;
    query_model model = query_model::title;

    [[nodiscard]] double score(const qs_feature_vector& x) const
    {
        double z = bias;
        for (std::size_t i = 0; i < qs_feature_count; ++i) {
            z += weights[i] * x[i];
        }
        return sigmoid(z);
    }
};

inline double qs_similarity(const qs_metric_model& m, std::span<const double> u, std::span<const double> v,
                            std::span<const double> q)
{
    return m.score(qs_features(u, v, q));
}

inline json to_json(const qs_metric_model& m)
{
    return json{{"version", m.version}, {"query_model", to_string(m.model)}, {"weights", m.weights}, {"bias", m.bias}};
}

inline qs_metric_model qs_model_from_json(const json& j)
{
    try {
        qs_metric_model m;
        m.version = j.at("version").get<std::string>();
        if (m.version != qs_feature_version) {
            throw data_error("unsupported metric model version " + m.version);
        }
        m.model = parse_query_model(j.at("query_model").get<std::string>());
        const auto w = j.at("weights").get<std::vector<double>>();
        if (w.size() != qs_feature_count) {
            throw data_error("metric model has " + std::to_string(w.size()) + " weights, expected 5");
        }
        std::copy(w.begin(), w.end(), m.weights.begin());
        m.bias = j.at("bias").get<double>();
        for (double x : m.weights) {
            if (!std::isfinite(x)) {
                throw data_error("metric model has a non-finite weight");
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed metric model: ") + e.what());
    }
}

struct qs_training_params {
    int epochs = 20;
    double lr = 0.05;
    std::uint64_t seed = 13;
};

struct labeled_pair {
    qs_feature_vector x;
    int y;
};

/// Mean log-loss of `m` over `pairs`.
inline double log_loss(const qs_metric_model& m, std::span<const labeled_pair> pairs)
{
    constexpr double eps = 1e-15;
    double total = 0.0;
    for (const auto& p : pairs) {
        const double s = std::clamp(m.score(p.x), eps, 1.0 - eps);
        total -= p.y == 1 ? std::log(s) : std::log(1.0 - s);
    }
    return pairs.empty() ? 0.0 : total / static_cast<double>(pairs.size());
}

/// Same-section (1) / different-section (0) pairs within each query's labeled
/// paragraphs, majority class downsampled per query. Queries absent from
/// `queries` are ignored.
inline std::vector<labeled_pair> qs_training_pairs(const embedding_store& store, const cluster_gold& gold,
                                                   const std::vector<query>& queries, query_model model,
                                                   std::uint64_t seed)
{
    rng_t rng(seed);
    std::vector<labeled_pair> pairs;
    for (const auto& q : queries) {
        auto it = gold.find(q.id);
        if (it == gold.end()) {
            continue;
        }
        std::vector<std::string> ids;
        std::vector<const std::string*> labels;
        for (const auto& [pid, label] : it->second) {
            ids.push_back(pid);
            labels.push_back(&label);
        }
        const auto qv = query_vector(store, q, model, ids);
        std::vector<labeled_pair> pos;
        std::vector<labeled_pair> neg;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const auto& u = store.at(paragraph_key(ids[i]));
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                const auto& v = store.at(paragraph_key(ids[j]));
                const int y = *labels[i] == *labels[j] ? 1 : 0;
                (y ? pos : neg).push_back({qs_features(u, v, qv), y});
            }
        }
        auto& majority = pos.size() > neg.size() ? pos : neg;
        const auto keep = std::min(pos.size(), neg.size());
        seeded_shuffle(majority, rng);
        majority.resize(keep);
        pairs.insert(pairs.end(), pos.begin(), pos.end());
        pairs.insert(pairs.end(), neg.begin(), neg.end());
    }
    return pairs;
}

struct qs_training_result {
    qs_metric_model model;
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> epoch_losses;
};

/// Seeded SGD on log-loss over pre-built pairs.
inline qs_training_result fit_qs_metric(std::vector<labeled_pair> pairs, query_model model,
                                        const qs_training_params& hyper)
{
    const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.y == 1; });
    const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.y == 0; });
    if (!has_pos || !has_neg) {
        throw data_error("metric training needs at least one same-section and one cross-section pair");
    }
    if (hyper.epochs < 1 || !(hyper.lr > 0.0)) {
        throw usage_error("metric training needs epochs >= 1 and lr > 0");
    }
    qs_training_result result;
    result.model.model = model;
    result.initial_loss = log_loss(result.model, pairs);
    rng_t rng(hyper.seed ^ 0x5DEECE66DULL);
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        seeded_shuffle(pairs, rng);
        for (const auto& p : pairs) {
            const double g = result.model.score(p.x) - p.y;
            for (std::size_t i = 0; i < qs_feature_count; ++i) {
                result.model.weights[i] -= hyper.lr * g * p.x[i];
            }
            result.model.bias -= hyper.lr * g;
        }
        result.epoch_losses.push_back(log_loss(result.model, pairs));
    }
    result.final_loss = result.epoch_losses.back();
    return result;
}

inline qs_training_result train_qs_metric(const embedding_store& store, const cluster_gold& gold,
                                          const std::vector<query>& queries, query_model model,
                                          const qs_training_params& hyper = {})
{
    auto pairs = qs_training_pairs(store, gold, queries, model, hyper.seed);
    if (pairs.empty()) {
        throw data_error("no training pairs could be constructed");
    }
    return fit_qs_metric(std::move(pairs), model, hyper);
}

}  // namespace rcs

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace rcs {

namespace method {
inline constexpr const char* bm25_title = "bm25-title";
inline constexpr const char* bm25_topic_expansion = "bm25-topic-expansion";
inline constexpr const char* bm25_topic_aggregation = "bm25-topic-aggregation";
}  // namespace method

struct bm25_params {
    double k1 = 1.2;
    double b = 0.75;
};

struct posting {
    std::uint32_t doc;
    std::uint32_t tf;
};

/// Term -> postings over documents numbered in ascending paragraph-id order.
class inverted_index {
  public:
    inverted_index(std::vector<std::string> doc_ids, std::vector<std::uint32_t> doc_lengths,
                   std::unordered_map<std::string, std::vector<posting>> postings, bm25_params params)
        : m_doc_ids(std::move(doc_ids)),
          m_doc_lengths(std::move(doc_lengths)),
          m_postings(std::move(postings)),
          m_params(params)
    {
        if (m_doc_ids.empty()) {
            throw data_error("cannot index an empty corpus");
        }
        if (m_params.k1 < 0.0 || m_params.b < 0.0 || m_params.b > 1.0) {
            throw usage_error("bm25 parameters out of range (k1 >= 0, 0 <= b <= 1)");
        }
        if (m_doc_ids.size() != m_doc_lengths.size()) {
            throw data_error("index document table is inconsistent");
        }
        double total = 0.0;
        for (auto len : m_doc_lengths) {
            total += len;
        }
        m_avgdl = total / static_cast<double>(m_doc_ids.size());
    }

    [[nodiscard]] std::size_t num_docs() const noexcept { return m_doc_ids.size(); }
    [[nodiscard]] double avgdl() const noexcept { return m_avgdl; }
    [[nodiscard]] const bm25_params& params() const noexcept { return m_params; }
    [[nodiscard]] const std::string& doc_id(std::uint32_t doc) const { return m_doc_ids.at(doc); }
    [[nodiscard]] std::uint32_t doc_length(std::uint32_t doc) const { return m_doc_lengths.at(doc); }
    [[nodiscard]] const std::vector<std::string>& doc_ids() const noexcept { return m_doc_ids; }
    [[nodiscard]] const std::unordered_map<std::string, std::vector<posting>>& all_postings() const noexcept
    {
        return m_postings;
    }

    [[nodiscard]] const std::vector<posting>* postings(const std::string& term) const
    {
        auto it = m_postings.find(term);
        return it == m_postings.end() ? nullptr : &it->second;
    }

    [[nodiscard]] std::size_t df(const std::string& term) const
    {
        const auto* list = postings(term);
        return list ? list->size() : 0;
    }

    /// Lucene idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
    [[nodiscard]] double idf(std::size_t df) const
    {
        const auto n = static_cast<double>(num_docs());
        const auto d = static_cast<double>(df);
        return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
    }

    [[nodiscard]] double term_weight(std::uint32_t tf, std::uint32_t doc_len) const
    {
        const double f = tf;
        const double norm = 1.0 - m_params.b + m_params.b * static_cast<double>(doc_len) / m_avgdl;
        return f / (f + m_params.k1 * norm);
    }

  private:
    std::vector<std::string> m_doc_ids;
    std::vector<std::uint32_t> m_doc_lengths;
    std::unordered_map<std::string, std::vector<posting>> m_postings;
    bm25_params m_params;
    double m_avgdl = 0.0;
};

inline inverted_index build_index(const corpus& c, bm25_params params = {})
{
    std::vector<const paragraph*> docs;
    docs.reserve(c.size());
    for (const auto& p : c.paragraphs()) {
        docs.push_back(&p);
    }
    std::sort(docs.begin(), docs.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

    std::vector<std::string> ids;
    std::vector<std::uint32_t> lengths;
    std::unordered_map<std::string, std::vector<posting>> postings;
    for (std::uint32_t d = 0; d < docs.size(); ++d) {
        const auto tokens = tokenize(docs[d]->text);
        std::map<std::string, std::uint32_t> counts;
        for (const auto& t : tokens) {
            ++counts[t];
        }
        for (const auto& [term, tf] : counts) {
            postings[term].push_back({d, tf});
        }
        ids.push_back(docs[d]->id);
        lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
    }
    return inverted_index(std::move(ids), std::move(lengths), std::move(postings), params);
}

struct ranked_doc {
    std::string id;
    double score;
    std::size_t rank;
};

struct ranking {
    std::string query_id;
    std::string method;
    std::vector<ranked_doc> docs;

    [[nodiscard]] bool empty() const noexcept { return docs.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return docs.size(); }
};

namespace detail {

/// Top-k by descending score, ascending id; assigns ranks from 1.
inline std::vector<ranked_doc> top_k(std::vector<std::pair<std::string, double>> scored, std::size_t k)
{
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (scored.size() > k) {
        scored.resize(k);
    }
    std::vector<ranked_doc> out;
    out.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        out.push_back({std::move(scored[i].first), scored[i].second, i + 1});
    }
    return out;
}

}  // namespace detail

/// Sum of per-token BM25 contributions (query tokens counted with multiplicity).
/// Documents scoring 0 are left out.
inline ranking bm25_search(const inverted_index& index, const std::string& query_text, std::size_t k,
                           std::string query_id = {}, std::string method = method::bm25_title)
{
    if (k < 1) {
        throw usage_error("k must be at least 1");
    }
    ranking out{std::move(query_id), std::move(method), {}};
    std::vector<double> acc(index.num_docs(), 0.0);
    bool any = false;
    for (const auto& term : tokenize(query_text)) {
        const auto* list = index.postings(term);
        if (list == nullptr) {
            continue;
        }
        const double idf = index.idf(list->size());
        for (const auto& p : *list) {
            acc[p.doc] += idf * index.term_weight(p.tf, index.doc_length(p.doc));
            any = true;
        }
    }
    if (!any) {
        return out;
    }
    std::vector<std::pair<std::string, double>> scored;
    for (std::uint32_t d = 0; d < acc.size(); ++d) {
        if (acc[d] > 0.0) {
            scored.emplace_back(index.doc_id(d), acc[d]);
        }
    }
    out.docs = detail::top_k(std::move(scored), k);
    return out;
}

inline std::string expansion_query_text(const query& q)
{
    if (q.subtopics.empty()) {
        throw data_error("query " + q.id + " has no subtopics (oracle subtopic headings are required)");
    }
    std::string text = q.title;
    for (const auto& heading : q.subtopics) {
        text += " " + heading;
    }
    return text;
}

/// Title followed by every subtopic heading once.
inline ranking bm25_topic_expansion(const inverted_index& index, const query& q, std::size_t k)
{
    return bm25_search(index, expansion_query_text(q), k, q.id, method::bm25_topic_expansion);
}

namespace detail {

/// Sign of sum(1/a) - sum(1/b) computed over a common denominator, or
/// nullopt when that denominator does not fit in 128 bits.
inline std::optional<int> compare_reciprocal_sums(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b)
{
    using u128 = unsigned __int128;
    const u128 limit = ~u128{0} / 64;  // headroom for adding up to 64 terms
    u128 lcm = 1;
    const auto gcd = [](u128 x, u128 y) {
        while (y != 0) {
            x %= y;
            std::swap(x, y);
        }
        return x;
    };
    for (const auto* ranks : {&a, &b}) {
        for (auto r : *ranks) {
            const u128 step = r / gcd(lcm, r);
            if (lcm > limit / step) {
                return std::nullopt;
            }
            lcm *= step;
        }
    }
    if (a.size() + b.size() > 64) {
        return std::nullopt;
    }
    u128 sa = 0;
    u128 sb = 0;
    for (auto r : a) {
        sa += lcm / r;
    }
    for (auto r : b) {
        sb += lcm / r;
    }
    return sa == sb ? 0 : (sa > sb ? 1 : -1);
}

}  // namespace detail

/// Reciprocal rank aggregation: score(d) = sum over rankings containing d of
/// 1/rank(d). Equal sums are detected exactly, so ties fall to the id
/// whatever the order of the input rankings.
inline ranking rrf_aggregate(const std::vector<ranking>& rankings, std::size_t k,
                             std::string method = method::bm25_topic_aggregation)
{
    if (rankings.empty()) {
        throw usage_error("rank aggregation needs at least one ranking");
    }
    if (k < 1) {
        throw usage_error("k must be at least 1");
    }
    const auto& query_id = rankings.front().query_id;
    std::map<std::string, std::vector<std::size_t>> ranks;
    for (const auto& r : rankings) {
        if (r.query_id != query_id) {
            throw data_error("cannot aggregate rankings of different queries (" + query_id + " vs " + r.query_id +
                             ")");
        }
        for (const auto& d : r.docs) {
            if (d.rank < 1) {
                throw data_error("rank aggregation needs ranks starting at 1 (" + d.id + ")");
            }
            ranks[d.id].push_back(d.rank);
        }
    }
    struct fused {
        std::string id;
        std::vector<std::size_t> ranks;
        double score = 0.0;
    };
    std::vector<fused> items;
    items.reserve(ranks.size());
    for (auto& [id, rs] : ranks) {
        std::sort(rs.begin(), rs.end(), std::greater<>());  // smallest terms first
        double s = 0.0;
        for (auto r : rs) {
            s += 1.0 / static_cast<double>(r);
        }
        items.push_back({id, std::move(rs), s});
    }
    std::sort(items.begin(), items.end(), [](const fused& a, const fused& b) {
        const auto exact = detail::compare_reciprocal_sums(a.ranks, b.ranks);
        const int c = exact ? *exact : (a.score == b.score ? 0 : (a.score > b.score ? 1 : -1));
        return c != 0 ? c > 0 : a.id < b.id;
    });
    if (items.size() > k) {
        items.resize(k);
    }
    ranking out{query_id, std::move(method), {}};
    for (std::size_t i = 0; i < items.size(); ++i) {
        out.docs.push_back({std::move(items[i].id), items[i].score, i + 1});
    }
    return out;
}

/// One "title + heading" search per subtopic, fused by reciprocal rank.
inline ranking bm25_topic_aggregation(const inverted_index& index, const query& q, std::size_t k)
{
    if (q.subtopics.empty()) {
        throw data_error("query " + q.id + " has no subtopics (oracle subtopic headings are required)");
    }
    std::vector<ranking> per_topic;
    per_topic.reserve(q.subtopics.size());
    for (const auto& heading : q.subtopics) {
        per_topic.push_back(bm25_search(index, q.title + " " + heading, k, q.id, method::bm25_topic_aggregation));
    }
    return rrf_aggregate(per_topic, k, method::bm25_topic_aggregation);
}

inline ranking retrieve(const inverted_index& index, const query& q, const std::string& method_tag, std::size_t k)
{
    if (method_tag == method::bm25_title) {
        return bm25_search(index, q.title, k, q.id, method::bm25_title);
    }
    if (method_tag == method::bm25_topic_expansion) {
        return bm25_topic_expansion(index, q, k);
    }
    if (method_tag == method::bm25_topic_aggregation) {
        return bm25_topic_aggregation(index, q, k);
    }
    throw usage_error("unknown retrieval method " + method_tag);
}

// ---- file formats ----

/// TREC run lines: `<query-id> Q0 <paragraph-id> <rank> <score> <method-tag>`.
inline std::string format_run(const std::vector<ranking>& rankings)
{
    std::string out;
    for (const auto& r : rankings) {
        for (const auto& d : r.docs) {
            out += r.query_id + " Q0 " + d.id + " " + std::to_string(d.rank) + " " + format_fixed(d.score, 6) + " " +
                   r.method + "\n";
        }
    }
    return out;
}

/// Groups run lines by query (first-appearance order), ordered by rank.
inline std::vector<ranking> load_run(const fs::path& path)
{
    std::vector<ranking> out;
    std::unordered_map<std::string, std::size_t> slot;
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        std::istringstream ss(line);
        std::string qid, q0, pid, tag, extra;
        std::size_t rank = 0;
        double score = 0.0;
        if (!(ss >> qid >> q0 >> pid >> rank >> score >> tag) || (ss >> extra) || rank == 0) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": malformed run line");
        }
        auto [it, inserted] = slot.emplace(qid, out.size());
        if (inserted) {
            out.push_back({qid, tag, {}});
        }
        out[it->second].docs.push_back({pid, score, rank});
    });
    for (auto& r : out) {
        std::sort(r.docs.begin(), r.docs.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
    }
    return out;
}

inline json index_snapshot(const inverted_index& index)
{
    json docs = json::array();
    for (std::uint32_t d = 0; d < index.num_docs(); ++d) {
        docs.push_back({index.doc_id(d), index.doc_length(d)});
    }
    std::map<std::string, json> sorted;
    for (const auto& [term, list] : index.all_postings()) {
        json entries = json::array();
        for (const auto& p : list) {
            entries.push_back({p.doc, p.tf});
        }
        sorted.emplace(term, std::move(entries));
    }
    return json{{"format", "rcs-bm25-index-v1"},
                {"k1", index.params().k1},
                {"b", index.params().b},
                {"docs", docs},
                {"postings", sorted}};
}

inline inverted_index index_from_snapshot(const json& snapshot)
{
    try {
        if (snapshot.at("format") != "rcs-bm25-index-v1") {
            throw data_error("unsupported index snapshot format");
        }
        std::vector<std::string> ids;
        std::vector<std::uint32_t> lengths;
        for (const auto& d : snapshot.at("docs")) {
            ids.push_back(d.at(0).get<std::string>());
            lengths.push_back(d.at(1).get<std::uint32_t>());
        }
        std::unordered_map<std::string, std::vector<posting>> postings;
        for (const auto& [term, entries] : snapshot.at("postings").items()) {
            auto& list = postings[term];
            for (const auto& e : entries) {
                const auto doc = e.at(0).get<std::uint32_t>();
                if (doc >= ids.size()) {
                    throw data_error("index snapshot posting refers to unknown document");
                }
                list.push_back({doc, e.at(1).get<std::uint32_t>()});
            }
        }
        return inverted_index(std::move(ids), std::move(lengths), std::move(postings),
                              {snapshot.at("k1").get<double>(), snapshot.at("b").get<double>()});
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed index snapshot: ") + e.what());
    }
}

}  // namespace rcs

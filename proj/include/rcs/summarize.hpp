#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "clustering.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "louvain.hpp"
#include "providers.hpp"
#include "retrieval.hpp"

namespace rcs {

struct preliminary_summary {
    std::string source_id;
    std::string text;
    std::size_t rank = 0;  // retrieval rank of the source paragraph
};

struct redundancy_set {
    std::vector<preliminary_summary> members;  // ascending retrieval rank
    std::string representative;
    std::vector<std::string> provenance;

    [[nodiscard]] const std::string& min_source_id() const { return *std::min_element(provenance.begin(), provenance.end()); }
};

struct summary_entry {
    std::string text;
    std::vector<std::string> provenance;
};

struct article_method {
    std::string retrieval;
    std::string clustering;
    std::string summarizer;
    std::string length;
};

struct generated_article {
    std::string query_id;
    article_method method;
    std::vector<std::vector<summary_entry>> sections;
    std::vector<std::string> flags;

    [[nodiscard]] std::size_t summary_count() const
    {
        std::size_t n = 0;
        for (const auto& s : sections) {
            n += s.size();
        }
        return n;
    }
};

struct summarize_config {
    int max_sentences = 2;
    double tau = 0.35;
    double gamma = 1.0;
    std::uint64_t seed = 17;
    std::string length = "long";
};

/// Redundancy-removal resolution for a named length preset.
inline double gamma_for_length(const std::string& preset)
{
    if (preset == "short") {
        return 0.25;
    }
    if (preset == "long") {
        return 1.0;
    }
    throw usage_error("unknown length preset " + preset + " (short|long)");
}

inline preliminary_summary preliminary_summarize(const paragraph& p, const summarizer& provider, int max_sentences,
                                                 std::size_t rank = 0)
{
    if (max_sentences < 1) {
        throw usage_error("max_sentences must be at least 1");
    }
    std::string text;
    try {
        text = provider.summarize(p.text, max_sentences);
    } catch (const error& e) {
        rethrow_with_context(e, "summarizing paragraph " + p.id);
    }
    if (trim(text).empty()) {
        text = trim(p.text);
    }
    return {p.id, std::move(text), rank};
}

/// Louvain communities over the graph with an edge (i, j) of weight sim(i, j)
/// whenever sim(i, j) >= tau. Sets come out in order of their first member.
inline std::vector<redundancy_set> redundancy_sets(const std::vector<preliminary_summary>& summaries,
                                                   const text_similarity& sim, double tau, double gamma,
                                                   std::uint64_t seed)
{
    if (!(tau >= 0.0)) {
        throw usage_error("redundancy threshold must be non-negative");
    }
    if (!(gamma > 0.0)) {
        throw usage_error("redundancy resolution must be positive");
    }
    weighted_graph graph(summaries.size());
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        for (std::size_t j = i + 1; j < summaries.size(); ++j) {
            const double s = sim(summaries[i].text, summaries[j].text);
            if (s >= tau && s > 0.0) {
                graph.add_edge(i, j, s);
            }
        }
    }
    const auto community = louvain(graph, gamma, seed);
    std::map<std::size_t, std::size_t> slot;
    std::vector<redundancy_set> sets;
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        auto [it, inserted] = slot.emplace(community[i], sets.size());
        if (inserted) {
            sets.emplace_back();
        }
        auto& set = sets[it->second];
        set.members.push_back(summaries[i]);
    }
    for (auto& set : sets) {
        std::stable_sort(set.members.begin(), set.members.end(),
                         [](const auto& a, const auto& b) { return a.rank < b.rank; });
        set.provenance.clear();
        for (const auto& m : set.members) {
            set.provenance.push_back(m.source_id);
        }
        set.representative = set.members.front().text;
    }
    return sets;
}

/// Member with maximal average similarity to the other members; ties go to the
/// smaller source id.
inline const preliminary_summary& medoid(const redundancy_set& set, const text_similarity& sim)
{
    const preliminary_summary* best = nullptr;
    double best_avg = -std::numeric_limits<double>::infinity();
    for (const auto& a : set.members) {
        double total = 0.0;
        for (const auto& b : set.members) {
            if (&a != &b) {
                total += sim(a.text, b.text);
            }
        }
        const double avg = set.members.size() > 1 ? total / static_cast<double>(set.members.size() - 1) : 0.0;
        if (best == nullptr || avg > best_avg || (avg == best_avg && a.source_id < best->source_id)) {
            best = &a;
            best_avg = avg;
        }
    }
    return *best;
}

/// Picks the set's representative: the provider's summary of the members
/// (ascending rank) when it can consolidate, the medoid member otherwise.
inline redundancy_set consolidate_set(redundancy_set set, const summarizer& provider, const text_similarity& sim,
                                      int max_sentences)
{
    if (set.members.empty()) {
        throw usage_error("cannot consolidate an empty redundancy set");
    }
    if (provider.consolidates() && set.members.size() > 1) {
        std::vector<std::string> texts;
        for (const auto& m : set.members) {
            texts.push_back(m.text);
        }
        try {
            set.representative = provider.summarize(join(texts, " "), max_sentences);
        } catch (const error& e) {
            rethrow_with_context(e, "consolidating set of " + set.provenance.front());
        }
        if (trim(set.representative).empty()) {
            set.representative = medoid(set, sim).text;
        }
    } else {
        set.representative = medoid(set, sim).text;
    }
    return set;
}

/// Largest set first, then repeatedly the unplaced representative most similar
/// to the last placed one. Ties go to the smaller minimum source id.
inline std::vector<redundancy_set> order_section(std::vector<redundancy_set> sets, const text_similarity& sim)
{
    if (sets.empty()) {
        return sets;
    }
    std::vector<redundancy_set> ordered;
    ordered.reserve(sets.size());
    auto first = sets.begin();
    for (auto it = sets.begin(); it != sets.end(); ++it) {
        if (it->members.size() > first->members.size() ||
            (it->members.size() == first->members.size() && it->min_source_id() < first->min_source_id())) {
            first = it;
        }
    }
    ordered.push_back(std::move(*first));
    sets.erase(first);
    while (!sets.empty()) {
        const auto& last = ordered.back().representative;
        auto next = sets.begin();
        double best = sim(last, next->representative);
        for (auto it = std::next(sets.begin()); it != sets.end(); ++it) {
            const double s = sim(last, it->representative);
            if (s > best || (s == best && it->min_source_id() < next->min_source_id())) {
                best = s;
                next = it;
            }
        }
        ordered.push_back(std::move(*next));
        sets.erase(next);
    }
    return ordered;
}

/// Summarizes every cluster into a section. Sections are ordered by the best
/// retrieval rank among their members (ties: lower cluster index).
inline generated_article assemble_article(const query& q, const clustering& clusters, const ranking& retrieved,
                                          const corpus& paragraphs, const summarizer& provider,
                                          text_similarity& sim, const summarize_config& config,
                                          article_method method)
{
    generated_article article{q.id, std::move(method), {}, {}};
    std::unordered_map<std::string, std::size_t> rank_of;
    for (const auto& d : retrieved.docs) {
        rank_of.emplace(d.id, d.rank);
    }
    if (clusters.assignment.size() != rank_of.size()) {
        throw data_error("clustering for " + q.id + " does not cover the ranking");
    }
    for (const auto& [pid, c] : clusters.assignment) {
        if (rank_of.count(pid) == 0) {
            throw data_error("clustered paragraph " + pid + " is not in the ranking for " + q.id);
        }
    }
    if (retrieved.empty()) {
        article.flags.emplace_back("empty-retrieval");
        return article;
    }

    struct section_build {
        std::size_t best_rank;
        std::size_t cluster;
        std::vector<summary_entry> entries;
    };
    std::vector<section_build> built;
    const auto members = clusters.members();
    for (std::size_t c = 0; c < members.size(); ++c) {
        std::vector<preliminary_summary> summaries;
        std::size_t best_rank = std::numeric_limits<std::size_t>::max();
        for (const auto& pid : members[c]) {
            const auto rank = rank_of.at(pid);
            best_rank = std::min(best_rank, rank);
            summaries.push_back(preliminary_summarize(paragraphs.at(pid), provider, config.max_sentences, rank));
        }
        std::sort(summaries.begin(), summaries.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });

        std::vector<std::string> texts;
        for (const auto& s : summaries) {
            texts.push_back(s.text);
        }
        sim.prepare(texts);
        auto sets = redundancy_sets(summaries, sim, config.tau, config.gamma, config.seed);
        for (auto& set : sets) {
            set = consolidate_set(std::move(set), provider, sim, config.max_sentences);
        }
        if (provider.consolidates()) {
            std::vector<std::string> reps;
            for (const auto& set : sets) {
                reps.push_back(set.representative);
            }
            sim.prepare(reps);
        }
        section_build section{best_rank, c, {}};
        for (auto& set : order_section(std::move(sets), sim)) {
            section.entries.push_back({std::move(set.representative), std::move(set.provenance)});
        }
        built.push_back(std::move(section));
    }
    std::sort(built.begin(), built.end(), [](const auto& a, const auto& b) {
        return a.best_rank != b.best_rank ? a.best_rank < b.best_rank : a.cluster < b.cluster;
    });
    for (auto& s : built) {
        article.sections.push_back(std::move(s.entries));
    }
    return article;
}

// ---- renderings ----

inline json to_json(const generated_article& a)
{
    json sections = json::array();
    for (const auto& section : a.sections) {
        json entries = json::array();
        for (const auto& e : section) {
            entries.push_back({{"text", e.text}, {"provenance", e.provenance}});
        }
        sections.push_back(std::move(entries));
    }
    return json{{"query_id", a.query_id},
                {"method",
                 {{"retrieval", a.method.retrieval},
                  {"clustering", a.method.clustering},
                  {"summarizer", a.method.summarizer},
                  {"length", a.method.length}}},
                {"sections", sections},
                {"flags", a.flags}};
}

inline generated_article article_from_json(const json& j)
{
    try {
        generated_article a;
        a.query_id = j.at("query_id").get<std::string>();
        const auto& m = j.at("method");
        a.method = {m.value("retrieval", ""), m.value("clustering", ""), m.value("summarizer", ""),
                    m.value("length", "")};
        for (const auto& section : j.at("sections")) {
            std::vector<summary_entry> entries;
            for (const auto& e : section) {
                entries.push_back({e.at("text").get<std::string>(), e.at("provenance").get<std::vector<std::string>>()});
            }
            a.sections.push_back(std::move(entries));
        }
        if (j.contains("flags")) {
            a.flags = j.at("flags").get<std::vector<std::string>>();
        }
        return a;
    } catch (const json::exception& e) {
        throw data_error(std::string("malformed article record: ") + e.what());
    }
}

inline std::vector<generated_article> load_articles(const fs::path& path)
{
    std::vector<generated_article> out;
    for_each_record(path, [&](const json& record, std::size_t line) {
        try {
            out.push_back(article_from_json(record));
        } catch (const error& e) {
            rethrow_with_context(e, path.string() + ":" + std::to_string(line));
        }
    });
    return out;
}

inline std::string format_articles(const std::vector<generated_article>& articles)
{
    std::string out;
    for (const auto& a : articles) {
        out += to_json(a).dump() + "\n";
    }
    return out;
}

/// Summaries one per line, sections separated by a blank line.
inline std::string render_plain_text(const generated_article& a)
{
    std::vector<std::string> blocks;
    for (const auto& section : a.sections) {
        std::vector<std::string> lines;
        for (const auto& e : section) {
            lines.push_back(e.text);
        }
        blocks.push_back(join(lines, "\n"));
    }
    auto text = join(blocks, "\n\n");
    return text.empty() ? text : text + "\n";
}

}  // namespace rcs

#pragma once

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace rcs {

struct outline_section {
    std::string heading;
    std::vector<std::string> paragraph_ids;
};

struct article_outline {
    std::string page_id;
    std::string title;
    std::optional<std::string> lead;
    std::vector<outline_section> sections;
};

/// Qrels keyed by "<query>" (title level) or "<query>/<slug>" (subtopic level).
struct qrels {
    std::map<std::string, std::map<std::string, int>> entries;

    void add(const std::string& key, const std::string& paragraph_id, int grade)
    {
        if (grade < 0) {
            throw data_error("negative grade for " + key + " " + paragraph_id);
        }
        if (!entries[key].emplace(paragraph_id, grade).second) {
            throw data_error("duplicate qrels entry " + key + " " + paragraph_id);
        }
    }

    /// Paragraphs with grade > 0 under `key`.
    [[nodiscard]] std::set<std::string> relevant(const std::string& key) const
    {
        std::set<std::string> out;
        if (auto it = entries.find(key); it != entries.end()) {
            for (const auto& [pid, grade] : it->second) {
                if (grade > 0) {
                    out.insert(pid);
                }
            }
        }
        return out;
    }

    [[nodiscard]] std::size_t size() const
    {
        std::size_t n = 0;
        for (const auto& [key, judged] : entries) {
            n += judged.size();
        }
        return n;
    }
};

inline std::string subtopic_key(const std::string& query_id, const std::string& slug)
{
    return query_id + "/" + slug;
}

/// Per query: paragraph id -> section slug.
using cluster_gold = std::map<std::string, std::map<std::string, std::string>>;

struct gold_article {
    std::string query_id;
    std::string text;
};

struct benchmark {
    std::vector<query> queries;
    qrels title_qrels;
    qrels subtopic_qrels;
    cluster_gold gold;
    std::vector<gold_article> articles;
    std::vector<std::string> skipped;
};

inline std::size_t non_empty_sections(const article_outline& outline)
{
    std::size_t n = 0;
    for (const auto& s : outline.sections) {
        n += s.paragraph_ids.empty() ? 0 : 1;
    }
    return n;
}

/// Derives queries, title/subtopic qrels, cluster labels and gold articles from
/// structured outlines. Outlines with fewer than `min_subtopics` non-empty
/// sections are skipped and listed in `benchmark::skipped`.
inline benchmark derive_benchmark(const std::vector<article_outline>& outlines, const corpus& paragraphs,
                                  std::size_t min_subtopics = 2)
{
    if (min_subtopics < 1) {
        throw usage_error("min_subtopics must be at least 1");
    }
    benchmark out;
    std::unordered_set<std::string> page_ids;
    for (const auto& outline : outlines) {
        if (!page_ids.insert(outline.page_id).second) {
            throw data_error("duplicate page id " + outline.page_id);
        }
        std::unordered_set<std::string> slugs;
        std::unordered_set<std::string> on_page;
        for (const auto& section : outline.sections) {
            if (!slugs.insert(slugify(section.heading)).second) {
                throw data_error("page " + outline.page_id + ": section heading \"" + section.heading +
                                 "\" is not unique");
            }
            for (const auto& pid : section.paragraph_ids) {
                if (!paragraphs.contains(pid)) {
                    throw data_error("page " + outline.page_id + ": unresolvable paragraph id " + pid);
                }
                if (!on_page.insert(pid).second) {
                    throw data_error("page " + outline.page_id + ": paragraph " + pid + " listed twice");
                }
            }
        }
        if (non_empty_sections(outline) < min_subtopics) {
            out.skipped.push_back(outline.page_id);
            continue;
        }

        query q{outline.page_id, outline.title, outline.lead, {}};
        std::vector<std::string> text_parts;
        if (outline.lead && !trim(*outline.lead).empty()) {
            text_parts.push_back(*outline.lead);
        }
        auto& labels = out.gold[q.id];
        for (const auto& section : outline.sections) {
            q.subtopics.push_back(section.heading);
            const auto slug = slugify(section.heading);
            for (const auto& pid : section.paragraph_ids) {
                out.title_qrels.add(q.id, pid, 1);
                out.subtopic_qrels.add(subtopic_key(q.id, slug), pid, 1);
                labels.emplace(pid, slug);
                text_parts.push_back(paragraphs.at(pid).text);
            }
        }
        validate_query(q);
        out.articles.push_back({q.id, join(text_parts, "\n")});
        out.queries.push_back(std::move(q));
    }
    return out;
}

struct coordination_violation {
    enum class kind { unjudged_cluster_member, unrepresented_cluster };
    kind type;
    std::string query_id;
    std::string detail;
};

/// Checks that (a) clustered paragraphs are relevant and (b) every cluster
/// label names a subtopic whose paragraphs appear in the gold article.
inline std::vector<coordination_violation> coordination_check(const std::vector<query>& queries,
                                                              const qrels& title_qrels,
                                                              const cluster_gold& gold,
                                                              const std::vector<gold_article>& articles,
                                                              const corpus& paragraphs)
{
    using kind = coordination_violation::kind;
    std::unordered_map<std::string, const query*> by_id;
    for (const auto& q : queries) {
        by_id.emplace(q.id, &q);
    }
    std::unordered_map<std::string, const std::string*> article_text;
    for (const auto& a : articles) {
        article_text.emplace(a.query_id, &a.text);
    }

    std::vector<coordination_violation> violations;
    for (const auto& [qid, labels] : gold) {
        const auto relevant = title_qrels.relevant(qid);
        std::map<std::string, std::vector<std::string>> members;
        for (const auto& [pid, label] : labels) {
            if (relevant.count(pid) == 0) {
                violations.push_back({kind::unjudged_cluster_member, qid, pid});
            }
            members[label].push_back(pid);
        }

        std::set<std::string> known_slugs;
        if (auto it = by_id.find(qid); it != by_id.end()) {
            for (const auto& s : it->second->subtopics) {
                known_slugs.insert(slugify(s));
            }
        }
        const auto text_it = article_text.find(qid);
        for (const auto& [label, pids] : members) {
            bool ok = known_slugs.count(label) > 0 && text_it != article_text.end();
            for (std::size_t i = 0; ok && i < pids.size(); ++i) {
                ok = paragraphs.contains(pids[i]) &&
                     text_it->second->find(paragraphs.at(pids[i]).text) != std::string::npos;
            }
            if (!ok) {
                violations.push_back({kind::unrepresented_cluster, qid, label});
            }
        }
    }
    return violations;
}

// ---- file formats ----

inline std::vector<article_outline> load_outlines(const fs::path& path)
{
    std::vector<article_outline> outlines;
    for_each_record(path, [&](const json& record, std::size_t line) {
        const auto where = path.string() + ":" + std::to_string(line);
        article_outline o;
        o.page_id = string_field(record, "page_id", path, line);
        o.title = string_field(record, "title", path, line);
        o.lead = optional_string_field(record, "lead", path, line);
        auto it = record.find("sections");
        if (it == record.end() || !it->is_array()) {
            throw data_error(where + ": missing \"sections\" list");
        }
        for (const auto& s : *it) {
            if (!s.is_object() || !s.contains("heading") || !s["heading"].is_string() ||
                !s.contains("paragraph_ids") || !s["paragraph_ids"].is_array()) {
                throw data_error(where + ": malformed section");
            }
            outline_section section{s["heading"].get<std::string>(), {}};
            for (const auto& pid : s["paragraph_ids"]) {
                if (!pid.is_string()) {
                    throw data_error(where + ": non-string paragraph id");
                }
                section.paragraph_ids.push_back(pid.get<std::string>());
            }
            o.sections.push_back(std::move(section));
        }
        outlines.push_back(std::move(o));
    });
    return outlines;
}

/// TREC qrels: `<key> 0 <paragraph-id> <grade>`.
inline std::string format_qrels(const qrels& q)
{
    std::string out;
    for (const auto& [key, judged] : q.entries) {
        for (const auto& [pid, grade] : judged) {
            out += key + " 0 " + pid + " " + std::to_string(grade) + "\n";
        }
    }
    return out;
}

inline qrels load_qrels(const fs::path& path)
{
    qrels q;
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        std::istringstream ss(line);
        std::string key, iter, pid, extra;
        long grade = 0;
        if (!(ss >> key >> iter >> pid >> grade) || (ss >> extra)) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": malformed qrels line");
        }
        try {
            q.add(key, pid, static_cast<int>(grade));
        } catch (const error& e) {
            rethrow_with_context(e, path.string() + ":" + std::to_string(number));
        }
    });
    return q;
}

/// `<query-id> <paragraph-id> <label>` lines.
inline std::string format_cluster_gold(const cluster_gold& gold)
{
    std::string out;
    for (const auto& [qid, labels] : gold) {
        for (const auto& [pid, label] : labels) {
            out += qid + " " + pid + " " + label + "\n";
        }
    }
    return out;
}

inline cluster_gold load_cluster_gold(const fs::path& path)
{
    cluster_gold gold;
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        std::istringstream ss(line);
        std::string qid, pid, label, extra;
        if (!(ss >> qid >> pid >> label) || (ss >> extra)) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": malformed cluster gold line");
        }
        if (!gold[qid].emplace(pid, label).second) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": paragraph " + pid +
                             " labeled twice for " + qid);
        }
    });
    return gold;
}

inline std::string format_gold_articles(const std::vector<gold_article>& articles)
{
    std::string out;
    for (const auto& a : articles) {
        out += json{{"query_id", a.query_id}, {"text", a.text}}.dump() + "\n";
    }
    return out;
}

inline std::vector<gold_article> load_gold_articles(const fs::path& path)
{
    std::vector<gold_article> out;
    for_each_record(path, [&](const json& record, std::size_t line) {
        out.push_back({string_field(record, "query_id", path, line), string_field(record, "text", path, line)});
    });
    return out;
}

}  // namespace rcs

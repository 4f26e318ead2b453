#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "error.hpp"
#include "io.hpp"
#include "text.hpp"

namespace rcs {

struct paragraph {
    std::string id;
    std::string text;
};

struct query {
    std::string id;
    std::string title;
    std::optional<std::string> lead;
    std::vector<std::string> subtopics;
};

/// Immutable, id-indexed paragraph collection. Parse order is kept.
class corpus {
  public:
    corpus() = default;

    /// Throws data_error on empty id, blank text or duplicate id.
    explicit corpus(std::vector<paragraph> paragraphs) : m_paragraphs(std::move(paragraphs))
    {
        std::size_t total_tokens = 0;
        for (std::size_t i = 0; i < m_paragraphs.size(); ++i) {
            const auto& p = m_paragraphs[i];
            if (p.id.empty()) {
                throw data_error("paragraph " + std::to_string(i) + " has an empty id");
            }
            if (trim(p.text).empty()) {
                throw data_error("paragraph " + p.id + " has empty text");
            }
            if (!m_by_id.emplace(p.id, i).second) {
                throw data_error("duplicate paragraph id " + p.id);
            }
            total_tokens += tokenize(p.text).size();
        }
        if (!m_paragraphs.empty()) {
            m_avgdl = static_cast<double>(total_tokens) / static_cast<double>(m_paragraphs.size());
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_paragraphs.size(); }
    [[nodiscard]] bool empty() const noexcept { return m_paragraphs.empty(); }
    [[nodiscard]] double avgdl() const noexcept { return m_avgdl; }
    [[nodiscard]] const std::vector<paragraph>& paragraphs() const noexcept { return m_paragraphs; }

    [[nodiscard]] bool contains(const std::string& id) const { return m_by_id.count(id) > 0; }

    [[nodiscard]] const paragraph& at(const std::string& id) const
    {
        auto it = m_by_id.find(id);
        if (it == m_by_id.end()) {
            throw data_error("unknown paragraph id " + id);
        }
        return m_paragraphs[it->second];
    }

  private:
    std::vector<paragraph> m_paragraphs;
    std::unordered_map<std::string, std::size_t> m_by_id;
    double m_avgdl = 0.0;
};

/// Loads a line-oriented {"id","text"} corpus. With `dedup`, a paragraph whose
/// normalized text repeats an earlier one is dropped (first id wins).
inline corpus ingest_corpus(const fs::path& path, bool dedup)
{
    std::vector<paragraph> paragraphs;
    std::unordered_set<std::string> seen_ids;
    std::unordered_set<std::string> seen_text;
    for_each_record(path, [&](const json& record, std::size_t line) {
        paragraph p{string_field(record, "id", path, line), string_field(record, "text", path, line)};
        const auto where = path.string() + ":" + std::to_string(line);
        if (p.id.empty()) {
            throw data_error(where + ": empty paragraph id");
        }
        if (trim(p.text).empty()) {
            throw data_error(where + ": empty text for paragraph " + p.id);
        }
        if (!seen_ids.insert(p.id).second) {
            throw data_error(where + ": duplicate paragraph id " + p.id);
        }
        if (dedup && !seen_text.insert(normalize_text(p.text)).second) {
            return;
        }
        paragraphs.push_back(std::move(p));
    });
    return corpus(std::move(paragraphs));
}

inline void validate_query(const query& q)
{
    if (q.id.empty()) {
        throw data_error("query with empty id");
    }
    if (trim(q.title).empty()) {
        throw data_error("query " + q.id + " has an empty title");
    }
    std::unordered_set<std::string> seen;
    for (const auto& s : q.subtopics) {
        if (!seen.insert(s).second) {
            throw data_error("query " + q.id + " repeats subtopic \"" + s + "\"");
        }
    }
}

inline json to_json(const query& q)
{
    json j{{"id", q.id}, {"title", q.title}};
    if (q.lead) {
        j["lead"] = *q.lead;
    }
    j["subtopics"] = q.subtopics;
    return j;
}

inline std::vector<query> load_queries(const fs::path& path)
{
    std::vector<query> queries;
    std::unordered_set<std::string> ids;
    for_each_record(path, [&](const json& record, std::size_t line) {
        query q;
        q.id = string_field(record, "id", path, line);
        q.title = string_field(record, "title", path, line);
        q.lead = optional_string_field(record, "lead", path, line);
        if (auto it = record.find("subtopics"); it != record.end() && !it->is_null()) {
            if (!it->is_array()) {
                throw data_error(path.string() + ":" + std::to_string(line) + ": \"subtopics\" is not a list");
            }
            for (const auto& s : *it) {
                if (!s.is_string()) {
                    throw data_error(path.string() + ":" + std::to_string(line) + ": non-string subtopic");
                }
                q.subtopics.push_back(s.get<std::string>());
            }
        }
        try {
            validate_query(q);
        } catch (const error& e) {
            rethrow_with_context(e, path.string() + ":" + std::to_string(line));
        }
        if (!ids.insert(q.id).second) {
            throw data_error(path.string() + ":" + std::to_string(line) + ": duplicate query id " + q.id);
        }
        queries.push_back(std::move(q));
    });
    return queries;
}

inline std::string queries_to_jsonl(const std::vector<query>& queries)
{
    std::string out;
    for (const auto& q : queries) {
        out += to_json(q).dump() + "\n";
    }
    return out;
}

inline std::string corpus_to_jsonl(const corpus& c)
{
    std::string out;
    for (const auto& p : c.paragraphs()) {
        out += json{{"id", p.id}, {"text", p.text}}.dump() + "\n";
    }
    return out;
}

}  // namespace rcs

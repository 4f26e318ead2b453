#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "benchmark.hpp"
#include "clustering.hpp"
#include "error.hpp"
#include "io.hpp"
#include "retrieval.hpp"
#include "rng.hpp"
#include "summarize.hpp"
#include "text.hpp"

namespace rcs {

// ---- retrieval ----

/// Mean of precision@i over the ranks i holding relevant documents, divided by
/// |relevant|; unretrieved relevant documents count as 0.
inline double average_precision(const ranking& r, const std::set<std::string>& relevant)
{
    if (relevant.empty()) {
        return 0.0;
    }
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < r.docs.size(); ++i) {
        if (relevant.count(r.docs[i].id) > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

// ---- clustering ----

/// Pair-counting ARI over two parallel labelings of the same items.
template <typename A, typename B>
double adjusted_rand_index(const std::vector<A>& a, const std::vector<B>& b)
{
    if (a.size() != b.size()) {
        throw usage_error("labelings differ in length");
    }
    if (a.empty()) {
        throw data_error("adjusted rand index of an empty labeling");
    }
    std::map<A, std::size_t> a_index;
    std::map<B, std::size_t> b_index;
    for (const auto& x : a) {
        a_index.emplace(x, a_index.size());
    }
    for (const auto& x : b) {
        b_index.emplace(x, b_index.size());
    }
    std::map<std::pair<std::size_t, std::size_t>, std::int64_t> table;
    std::vector<std::int64_t> row(a_index.size(), 0);
    std::vector<std::int64_t> col(b_index.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto r = a_index.at(a[i]);
        const auto c = b_index.at(b[i]);
        ++table[{r, c}];
        ++row[r];
        ++col[c];
    }
    // Identical partitions: each row and column of the contingency table has one cell.
    if (table.size() == row.size() && table.size() == col.size()) {
        return 1.0;
    }
    const auto choose2 = [](std::int64_t n) { return n * (n - 1) / 2; };
    std::int64_t index = 0;
    for (const auto& [cell, n] : table) {
        index += choose2(n);
    }
    std::int64_t sum_a = 0;
    std::int64_t sum_b = 0;
    for (auto n : row) {
        sum_a += choose2(n);
    }
    for (auto n : col) {
        sum_b += choose2(n);
    }
    const std::int64_t total = choose2(static_cast<std::int64_t>(a.size()));
    // ARI = (index - sa*sb/T) / ((sa+sb)/2 - sa*sb/T), scaled by 2T to stay integral.
    const long double numerator = 2.0L * (static_cast<long double>(index) * total - static_cast<long double>(sum_a) * sum_b);
    const long double denominator = static_cast<long double>(sum_a + sum_b) * total - 2.0L * sum_a * sum_b;
    if (denominator == 0.0L) {
        return 0.0;
    }
    return static_cast<double>(numerator / denominator);
}

using labeling = std::map<std::string, std::string>;

/// ARI over the items labeled in both maps; throws data_error when none are.
inline double adjusted_rand_index(const labeling& a, const labeling& b)
{
    std::vector<std::string> la;
    std::vector<std::string> lb;
    for (const auto& [item, label] : a) {
        if (auto it = b.find(item); it != b.end()) {
            la.push_back(label);
            lb.push_back(it->second);
        }
    }
    if (la.empty()) {
        throw data_error("labelings share no items");
    }
    return adjusted_rand_index(la, lb);
}

inline labeling to_labeling(const clustering& c)
{
    labeling out;
    for (const auto& [pid, idx] : c.assignment) {
        out.emplace(pid, std::to_string(idx));
    }
    return out;
}

// ---- summaries ----

struct rouge_score {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail {

inline std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n,
                                                       std::size_t& total)
{
    std::map<std::string, std::size_t> counts;
    total = 0;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (std::size_t j = 1; j < n; ++j) {
            key += '\x1f';
            key += tokens[i + j];
        }
        ++counts[key];
        ++total;
    }
    return counts;
}

}  // namespace detail

/// ROUGE-N with clipped n-gram matches over the shared tokenizer.
inline rouge_score rouge_n(const std::string& candidate, const std::string& reference, int n)
{
    if (n != 1 && n != 2) {
        throw usage_error("rouge order must be 1 or 2");
    }
    std::size_t cand_total = 0;
    std::size_t ref_total = 0;
    const auto cand = detail::ngram_counts(tokenize(candidate), static_cast<std::size_t>(n), cand_total);
    const auto ref = detail::ngram_counts(tokenize(reference), static_cast<std::size_t>(n), ref_total);
    std::size_t matches = 0;
    for (const auto& [gram, c] : cand) {
        if (auto it = ref.find(gram); it != ref.end()) {
            matches += std::min(c, it->second);
        }
    }
    rouge_score s;
    if (cand_total > 0) {
        s.precision = static_cast<double>(matches) / static_cast<double>(cand_total);
    }
    if (ref_total > 0) {
        s.recall = static_cast<double>(matches) / static_cast<double>(ref_total);
    }
    if (s.precision + s.recall > 0.0) {
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    return s;
}

// ---- significance ----

struct significance_result {
    double p_value = 1.0;
    int direction = 0;  // sign of mean(a - b)
    bool significant = false;
};

struct bootstrap_params {
    std::size_t replicates = 10000;
    std::uint64_t seed = 7;
    double alpha = 0.05;
};

/// Two-sided paired bootstrap over per-query differences a - b: queries are
/// resampled with replacement and p is twice the fraction of resampled means
/// on the other side of zero (inclusive), capped at 1.
inline significance_result paired_significance(const std::map<std::string, double>& a,
                                               const std::map<std::string, double>& b,
                                               const bootstrap_params& params = {})
{
    if (params.replicates < 1000) {
        throw usage_error("paired bootstrap needs at least 1000 replicates");
    }
    if (a.size() != b.size()) {
        throw data_error("paired significance: query sets differ");
    }
    std::vector<double> diff;
    diff.reserve(a.size());
    for (const auto& [qid, va] : a) {
        auto it = b.find(qid);
        if (it == b.end()) {
            throw data_error("paired significance: query " + qid + " missing from the second system");
        }
        diff.push_back(va - it->second);
    }
    significance_result out;
    if (diff.empty()) {
        return out;
    }
    double mean = 0.0;
    for (double d : diff) {
        mean += d;
    }
    mean /= static_cast<double>(diff.size());
    if (mean == 0.0) {
        return out;
    }
    out.direction = mean > 0.0 ? 1 : -1;

    std::size_t crossing = 0;
    const auto n = diff.size();
    for (std::size_t r = 0; r < params.replicates; ++r) {
        auto rng = substream(params.seed, r);
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s += diff[uniform_index(rng, n)];
        }
        const double m = s / static_cast<double>(n);
        if ((out.direction > 0 && m <= 0.0) || (out.direction < 0 && m >= 0.0)) {
            ++crossing;
        }
    }
    out.p_value = std::min(1.0, 2.0 * static_cast<double>(crossing) / static_cast<double>(params.replicates));
    out.significant = out.p_value < params.alpha;
    return out;
}

// ---- reports ----

struct metric_report {
    std::string metric;
    std::map<std::string, double> per_query;
    std::vector<std::string> skipped;

    [[nodiscard]] double aggregate() const
    {
        if (per_query.empty()) {
            return 0.0;
        }
        double s = 0.0;
        for (const auto& [q, v] : per_query) {
            s += v;
        }
        return s / static_cast<double>(per_query.size());
    }
};

inline json to_json(const metric_report& r)
{
    json per_query = json::object();
    for (const auto& [q, v] : r.per_query) {
        per_query[q] = v;
    }
    return json{{"metric", r.metric}, {"aggregate", r.aggregate()}, {"per_query", per_query}, {"skipped", r.skipped}};
}

/// AP per query id; queries without relevant paragraphs are skipped, queries
/// without a ranking score 0.
inline metric_report evaluate_map(const std::vector<ranking>& rankings, const qrels& judgments,
                                  const std::vector<std::string>& query_ids, const std::string& name = "map")
{
    std::unordered_map<std::string, const ranking*> by_query;
    for (const auto& r : rankings) {
        by_query.emplace(r.query_id, &r);
    }
    metric_report report{name, {}, {}};
    for (const auto& qid : query_ids) {
        const auto relevant = judgments.relevant(qid);
        if (relevant.empty()) {
            report.skipped.push_back(qid);
            continue;
        }
        auto it = by_query.find(qid);
        report.per_query[qid] = it == by_query.end() ? 0.0 : average_precision(*it->second, relevant);
    }
    return report;
}

/// ARI of each system clustering against the gold labels of the same query;
/// queries without shared items are skipped.
inline metric_report evaluate_ari(const std::vector<clustering>& system, const cluster_gold& gold,
                                  const std::string& name = "ari")
{
    metric_report report{name, {}, {}};
    for (const auto& c : system) {
        auto it = gold.find(c.query_id);
        if (it == gold.end()) {
            report.skipped.push_back(c.query_id);
            continue;
        }
        try {
            report.per_query[c.query_id] = adjusted_rand_index(to_labeling(c), it->second);
        } catch (const data_error&) {
            report.skipped.push_back(c.query_id);
        }
    }
    return report;
}

inline constexpr std::array<const char*, 6> rouge_columns = {
    "rouge1_precision", "rouge1_recall", "rouge1_f1", "rouge2_precision", "rouge2_recall", "rouge2_f1"};
using rouge_cells = std::array<double, 6>;

inline rouge_cells rouge_all(const std::string& candidate, const std::string& reference)
{
    const auto r1 = rouge_n(candidate, reference, 1);
    const auto r2 = rouge_n(candidate, reference, 2);
    return {r1.precision, r1.recall, r1.f1, r2.precision, r2.recall, r2.f1};
}

/// Per-query ROUGE cells of each article against its gold text.
inline std::map<std::string, rouge_cells> evaluate_rouge(const std::vector<generated_article>& articles,
                                                         const std::vector<gold_article>& gold)
{
    std::unordered_map<std::string, const std::string*> gold_text;
    for (const auto& g : gold) {
        gold_text.emplace(g.query_id, &g.text);
    }
    std::map<std::string, rouge_cells> out;
    for (const auto& a : articles) {
        auto it = gold_text.find(a.query_id);
        if (it == gold_text.end()) {
            throw data_error("no gold article for query " + a.query_id);
        }
        out[a.query_id] = rouge_all(render_plain_text(a), *it->second);
    }
    return out;
}

// ---- system comparison matrix ----

struct matrix_row {
    std::string retrieval;
    std::string clustering;
    std::vector<generated_article> articles;
};

enum class mark { none, up, down, baseline };

struct matrix_cell {
    double value = 0.0;
    mark sign = mark::none;
    bool best = false;
    double p_value = 1.0;
};

struct evaluation_table {
    struct row {
        std::string retrieval;
        std::string clustering;
        std::array<matrix_cell, 6> cells;
        std::map<std::string, rouge_cells> per_query;
    };
    std::vector<row> rows;
    std::size_t baseline = 0;
    std::size_t query_count = 0;
};

/// ROUGE-1/2 P/R/F1 per row with paired-bootstrap marks against the baseline
/// row and the first maximum of each column flagged best.
inline evaluation_table evaluation_matrix(const std::vector<matrix_row>& rows, const std::vector<gold_article>& gold,
                                          std::size_t baseline, const bootstrap_params& params = {})
{
    if (rows.empty()) {
        throw usage_error("evaluation matrix needs at least one row");
    }
    if (baseline >= rows.size()) {
        throw usage_error("baseline row out of range");
    }
    evaluation_table table;
    table.baseline = baseline;
    for (const auto& r : rows) {
        evaluation_table::row out{r.retrieval, r.clustering, {}, evaluate_rouge(r.articles, gold)};
        table.rows.push_back(std::move(out));
    }
    const auto& keys = table.rows[baseline].per_query;
    for (const auto& r : table.rows) {
        bool same = r.per_query.size() == keys.size();
        for (auto it = r.per_query.begin(), jt = keys.begin(); same && it != r.per_query.end(); ++it, ++jt) {
            same = it->first == jt->first;
        }
        if (!same) {
            throw data_error("row " + r.retrieval + "/" + r.clustering + " covers a different query set");
        }
    }
    table.query_count = keys.size();

    for (std::size_t c = 0; c < rouge_columns.size(); ++c) {
        std::vector<std::map<std::string, double>> column(table.rows.size());
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            double sum = 0.0;
            for (const auto& [qid, cells] : table.rows[r].per_query) {
                column[r][qid] = cells[c];
                sum += cells[c];
            }
            table.rows[r].cells[c].value = keys.empty() ? 0.0 : sum / static_cast<double>(keys.size());
        }
        std::size_t best = 0;
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r].cells[c].value > table.rows[best].cells[c].value) {
                best = r;
            }
            auto& cell = table.rows[r].cells[c];
            if (r == baseline) {
                cell.sign = mark::baseline;
                continue;
            }
            const auto sig = paired_significance(column[r], column[baseline], params);
            cell.p_value = sig.p_value;
            if (sig.significant) {
                cell.sign = sig.direction > 0 ? mark::up : mark::down;
            }
        }
        table.rows[best].cells[c].best = true;
    }
    return table;
}

inline const char* mark_symbol(mark m)
{
    switch (m) {
    case mark::up:
        return "▲";
    case mark::down:
        return "▼";
    case mark::baseline:
        return "★";
    case mark::none:
        break;
    }
    return "";
}

inline const char* mark_word(mark m)
{
    switch (m) {
    case mark::up:
        return "up";
    case mark::down:
        return "down";
    case mark::baseline:
        return "baseline";
    case mark::none:
        break;
    }
    return "";
}

inline std::string format_matrix_csv(const evaluation_table& t)
{
    std::string out = "retrieval,clustering";
    for (const auto* col : rouge_columns) {
        out += std::string(",") + col + "," + col + "_mark," + col + "_best";
    }
    out += "\n";
    for (const auto& r : t.rows) {
        out += r.retrieval + "," + r.clustering;
        for (const auto& cell : r.cells) {
            out += "," + format_fixed(cell.value, 6) + "," + mark_word(cell.sign) + "," + (cell.best ? "1" : "0");
        }
        out += "\n";
    }
    return out;
}

inline json matrix_to_json(const evaluation_table& t)
{
    json rows = json::array();
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        json cells = json::object();
        for (std::size_t c = 0; c < rouge_columns.size(); ++c) {
            cells[rouge_columns[c]] = {{"value", r.cells[c].value},
                                       {"mark", mark_word(r.cells[c].sign)},
                                       {"best", r.cells[c].best},
                                       {"p_value", r.cells[c].p_value}};
        }
        json per_query = json::object();
        for (const auto& [qid, v] : r.per_query) {
            per_query[qid] = v;
        }
        rows.push_back({{"retrieval", r.retrieval},
                        {"clustering", r.clustering},
                        {"baseline", i == t.baseline},
                        {"cells", cells},
                        {"per_query", per_query}});
    }
    return json{{"columns", rouge_columns}, {"queries", t.query_count}, {"rows", rows}};
}

/// Aligned text table: ▲/▼ significant vs the ★ row, [x] = column best.
inline std::string format_matrix_text(const evaluation_table& t)
{
    std::size_t w_ret = std::string("Retrieval").size();
    std::size_t w_clu = std::string("Clustering").size();
    for (const auto& r : t.rows) {
        w_ret = std::max(w_ret, r.retrieval.size());
        w_clu = std::max(w_clu, r.clustering.size());
    }
    const auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    const std::array<const char*, 6> heads = {"R1-P", "R1-R", "R1-F", "R2-P", "R2-R", "R2-F"};
    constexpr std::size_t cell_width = 10;
    std::string out = pad("Retrieval", w_ret) + "  " + pad("Clustering", w_clu);
    for (const auto* h : heads) {
        out += "  " + std::string(cell_width - std::string(h).size(), ' ') + h;
    }
    out += "\n";
    for (const auto& r : t.rows) {
        out += pad(r.retrieval, w_ret) + "  " + pad(r.clustering, w_clu);
        for (const auto& cell : r.cells) {
            std::string number = format_fixed(cell.value, 3);
            if (cell.best) {
                number = "[" + number + "]";
            }
            const std::string symbol = mark_symbol(cell.sign);
            const std::size_t visible = number.size() + (symbol.empty() ? 0 : 2);
            out += "  " + std::string(cell_width > visible ? cell_width - visible : 0, ' ') +
                   (symbol.empty() ? "" : symbol + " ") + number;
        }
        out += "\n";
    }
    out += "\n▲/▼: significant (paired bootstrap) vs ★ row; [x]: column maximum\n";
    return out;
}

/// Two-column text table of a metric per method, best bracketed.
inline std::string format_component_table(const std::string& method_header, const std::string& metric_header,
                                          const std::vector<metric_report>& reports)
{
    std::size_t width = method_header.size();
    std::size_t best = 0;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        width = std::max(width, reports[i].metric.size());
        if (reports[i].aggregate() > reports[best].aggregate()) {
            best = i;
        }
    }
    std::string out = method_header + std::string(width - method_header.size() + 2, ' ') + metric_header + "\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        auto value = format_fixed(reports[i].aggregate(), 4);
        if (i == best) {
            value = "[" + value + "]";
        }
        out += reports[i].metric + std::string(width - reports[i].metric.size() + 2, ' ') + value + "\n";
    }
    return out;
}

}  // namespace rcs

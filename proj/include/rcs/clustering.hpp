#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "benchmark.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "io.hpp"

namespace rcs {

struct clustering {
    std::string query_id;
    std::map<std::string, std::size_t> assignment;
    std::size_t k = 0;

    [[nodiscard]] std::vector<std::vector<std::string>> members() const
    {
        std::vector<std::vector<std::string>> out(k);
        for (const auto& [pid, c] : assignment) {
            out.at(c).push_back(pid);
        }
        return out;
    }
};

template <typename F>
concept pair_similarity = std::invocable<F, const std::string&, const std::string&> &&
    std::convertible_to<std::invoke_result_t<F, const std::string&, const std::string&>, double>;

/// Average-linkage agglomerative clustering down to `k` clusters.
///
/// Candidates are processed in ascending id order, so the result does not
/// depend on input order. Among equally similar cluster pairs the one with the
/// lexicographically smallest (min member id, min member id) is merged.
/// Cluster indices are assigned by ascending smallest member id.
template <pair_similarity Sim>
clustering hac_cluster(std::vector<std::string> candidates, Sim&& sim, std::size_t k, std::string query_id = {})
{
    std::sort(candidates.begin(), candidates.end());
    if (std::adjacent_find(candidates.begin(), candidates.end()) != candidates.end()) {
        throw data_error("duplicate candidate id in clustering input");
    }
    const std::size_t n = candidates.size();
    if (k < 1 || k > n) {
        throw usage_error("cluster count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    }

    // pair_sum[i][j]: summed pairwise similarity between clusters led by i and j.
    std::vector<std::vector<double>> pair_sum(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = sim(candidates[i], candidates[j]);
            if (!std::isfinite(s)) {
                throw data_error("non-finite similarity between " + candidates[i] + " and " + candidates[j]);
            }
            pair_sum[i][j] = pair_sum[j][i] = s;
        }
    }
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> leader(n);
    std::vector<bool> active(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        leader[i] = i;
    }

    for (std::size_t clusters = n; clusters > k; --clusters) {
        std::size_t best_a = n;
        std::size_t best_b = n;
        double best = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) {
                continue;
            }
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) {
                    continue;
                }
                const double avg = pair_sum[a][b] / static_cast<double>(size[a] * size[b]);
                if (best_a == n || avg > best) {
                    best = avg;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        for (std::size_t c = 0; c < n; ++c) {
            if (active[c] && c != best_a && c != best_b) {
                pair_sum[best_a][c] += pair_sum[best_b][c];
                pair_sum[c][best_a] = pair_sum[best_a][c];
            }
        }
        size[best_a] += size[best_b];
        active[best_b] = false;
        for (auto& l : leader) {
            if (l == best_b) {
                l = best_a;
            }
        }
    }

    std::map<std::size_t, std::size_t> index_of_leader;
    for (std::size_t i = 0; i < n; ++i) {
        if (active[i]) {
            index_of_leader.emplace(i, index_of_leader.size());
        }
    }
    clustering out{std::move(query_id), {}, k};
    for (std::size_t i = 0; i < n; ++i) {
        out.assignment.emplace(candidates[i], index_of_leader.at(leader[i]));
    }
    return out;
}

/// Number of distinct gold labels for the query.
inline std::size_t true_k(const query& q, const cluster_gold& gold)
{
    auto it = gold.find(q.id);
    if (it == gold.end() || it->second.empty()) {
        throw data_error("query " + q.id + " has no cluster gold labels");
    }
    std::set<std::string> labels;
    for (const auto& [pid, label] : it->second) {
        labels.insert(label);
    }
    return labels.size();
}

/// `<query-id> <paragraph-id> <cluster-index>` lines.
inline std::string format_clusterings(const std::vector<clustering>& clusterings)
{
    std::string out;
    for (const auto& c : clusterings) {
        for (const auto& [pid, idx] : c.assignment) {
            out += c.query_id + " " + pid + " " + std::to_string(idx) + "\n";
        }
    }
    return out;
}

inline std::vector<clustering> load_clusterings(const fs::path& path)
{
    std::map<std::string, clustering> by_query;
    std::vector<std::string> order;
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        std::istringstream ss(line);
        std::string qid, pid, extra;
        long long idx = -1;
        if (!(ss >> qid >> pid >> idx) || (ss >> extra) || idx < 0) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": malformed cluster line");
        }
        auto [it, inserted] = by_query.try_emplace(qid);
        if (inserted) {
            it->second.query_id = qid;
            order.push_back(qid);
        }
        if (!it->second.assignment.emplace(pid, static_cast<std::size_t>(idx)).second) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": paragraph " + pid +
                             " assigned twice");
        }
        it->second.k = std::max(it->second.k, static_cast<std::size_t>(idx) + 1);
    });
    std::vector<clustering> out;
    for (const auto& qid : order) {
        auto& c = by_query.at(qid);
        std::vector<bool> used(c.k, false);
        for (const auto& [pid, idx] : c.assignment) {
            used[idx] = true;
        }
        if (std::find(used.begin(), used.end(), false) != used.end()) {
            throw data_error(path.string() + ": clustering for " + qid + " has an empty cluster index");
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace rcs

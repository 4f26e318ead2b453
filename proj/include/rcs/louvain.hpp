#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace rcs {

/// Undirected weighted graph stored as a symmetric adjacency list. A self-loop
/// entry holds A_ii directly (aggregated graphs put twice the internal weight
/// there), so degree = row sum and 2m = sum of all entries.
class weighted_graph {
  public:
    explicit weighted_graph(std::size_t n) : m_adj(n) {}

    void add_edge(std::size_t i, std::size_t j, double w)
    {
        if (i >= size() || j >= size()) {
            throw usage_error("edge endpoint out of range");
        }
        if (!(w >= 0.0)) {
            throw usage_error("edge weights must be non-negative");
        }
        if (w == 0.0) {
            return;
        }
        if (i == j) {
            m_adj[i][i] += w;
        } else {
            m_adj[i][j] += w;
            m_adj[j][i] += w;
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return m_adj.size(); }
    [[nodiscard]] const std::map<std::size_t, double>& neighbors(std::size_t i) const { return m_adj[i]; }

    [[nodiscard]] double degree(std::size_t i) const
    {
        double d = 0.0;
        for (const auto& [j, w] : m_adj[i]) {
            d += w;
        }
        return d;
    }

    /// Sum of all adjacency entries (2m).
    [[nodiscard]] double total_degree() const
    {
        double t = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            t += degree(i);
        }
        return t;
    }

  private:
    std::vector<std::map<std::size_t, double>> m_adj;
};

/// Q = (1/2m) * sum_ij [A_ij - gamma * k_i k_j / 2m] * [c_i == c_j]; 0 for an edgeless graph.
inline double modularity(const weighted_graph& g, const std::vector<std::size_t>& community, double gamma = 1.0)
{
    const double two_m = g.total_degree();
    if (two_m == 0.0) {
        return 0.0;
    }
    std::map<std::size_t, double> internal;
    std::map<std::size_t, double> total;
    for (std::size_t i = 0; i < g.size(); ++i) {
        total[community[i]] += g.degree(i);
        for (const auto& [j, w] : g.neighbors(i)) {
            if (community[i] == community[j]) {
                internal[community[i]] += w;
            }
        }
    }
    double q = 0.0;
    for (const auto& [c, tot] : total) {
        q += internal[c] / two_m - gamma * (tot / two_m) * (tot / two_m);
    }
    return q;
}

namespace detail {

/// Renumbers labels by first appearance.
inline std::size_t compact_labels(std::vector<std::size_t>& labels)
{
    std::map<std::size_t, std::size_t> remap;
    for (auto& l : labels) {
        auto [it, inserted] = remap.emplace(l, remap.size());
        l = it->second;
    }
    return remap.size();
}

/// One level of local moving. Returns true if any node changed community.
inline bool louvain_local_moving(const weighted_graph& g, std::vector<std::size_t>& community, double gamma,
                                 rng_t& rng)
{
    const std::size_t n = g.size();
    const double two_m = g.total_degree();
    std::vector<double> degree(n);
    std::vector<double> tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        degree[i] = g.degree(i);
        tot[community[i]] += degree[i];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    seeded_shuffle(order, rng);

    constexpr double min_gain = 1e-12;
    bool changed_any = false;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto i : order) {
            const auto own = community[i];
            std::map<std::size_t, double> links;
            for (const auto& [j, w] : g.neighbors(i)) {
                if (j != i) {
                    links[community[j]] += w;
                }
            }
            tot[own] -= degree[i];
            const auto gain = [&](std::size_t c) {
                auto it = links.find(c);
                const double w = it == links.end() ? 0.0 : it->second;
                return w - gamma * degree[i] * tot[c] / two_m;
            };
            auto best = own;
            double best_gain = gain(own);
            for (const auto& [c, w] : links) {
                const double candidate = gain(c);
                if (candidate > best_gain + min_gain) {
                    best = c;
                    best_gain = candidate;
                }
            }
            tot[best] += degree[i];
            if (best != own) {
                community[i] = best;
                changed = true;
                changed_any = true;
            }
        }
    }
    return changed_any;
}

inline weighted_graph aggregate(const weighted_graph& g, const std::vector<std::size_t>& community,
                                std::size_t communities)
{
    weighted_graph out(communities);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (const auto& [j, w] : g.neighbors(i)) {
            const auto ci = community[i];
            const auto cj = community[j];
            if (ci == cj) {
                out.add_edge(ci, ci, w);
            } else if (i < j) {
                out.add_edge(ci, cj, w);
            }
        }
    }
    return out;
}

}  // namespace detail

/// Multi-level Louvain modularity maximization with resolution `gamma`.
/// Node visiting order is shuffled per level from `seed`. Returns a community
/// label per node, numbered by first appearance.
inline std::vector<std::size_t> louvain(const weighted_graph& g, double gamma = 1.0, std::uint64_t seed = 0)
{
    if (!(gamma > 0.0)) {
        throw usage_error("louvain resolution must be positive");
    }
    const std::size_t n = g.size();
    std::vector<std::size_t> membership(n);
    std::iota(membership.begin(), membership.end(), 0);
    if (n == 0 || g.total_degree() == 0.0) {
        return membership;
    }
    rng_t rng(seed);
    weighted_graph level = g;
    while (true) {
        std::vector<std::size_t> community(level.size());
        std::iota(community.begin(), community.end(), 0);
        if (!detail::louvain_local_moving(level, community, gamma, rng)) {
            break;
        }
        const auto count = detail::compact_labels(community);
        for (auto& m : membership) {
            m = community[m];
        }
        if (count == level.size()) {
            break;
        }
        level = detail::aggregate(level, community, count);
    }
    detail::compact_labels(membership);
    return membership;
}

}  // namespace rcs

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "helpers.hpp"
#include "rcs/summarize.hpp"

using namespace rcs;

namespace {

/// Similarity table keyed by unordered text pairs; unlisted pairs score 0.
class table_similarity final : public text_similarity {
  public:
    void set(const std::string& a, const std::string& b, double s)
    {
        m_table[{std::min(a, b), std::max(a, b)}] = s;
    }

    double operator()(const std::string& a, const std::string& b) const override
    {
        if (a == b) {
            return 1.0;
        }
        auto it = m_table.find({std::min(a, b), std::max(a, b)});
        return it == m_table.end() ? 0.0 : it->second;
    }

    [[nodiscard]] std::string name() const override { return "table"; }

  private:
    std::map<std::pair<std::string, std::string>, double> m_table;
};

/// Returns a fixed summary for every call and records the inputs.
class canned_summarizer final : public summarizer {
  public:
    explicit canned_summarizer(std::string reply, bool consolidates = true)
        : m_reply(std::move(reply)), m_consolidates(consolidates)
    {}

    std::string summarize(const std::string& text, int) const override
    {
        calls.push_back(text);
        return m_reply;
    }
    [[nodiscard]] bool consolidates() const override { return m_consolidates; }
    [[nodiscard]] std::string name() const override { return "canned"; }

    mutable std::vector<std::string> calls;

  private:
    std::string m_reply;
    bool m_consolidates;
};

std::vector<preliminary_summary> summaries(const std::vector<std::string>& texts)
{
    std::vector<preliminary_summary> out;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.push_back({"s" + std::to_string(i), texts[i], i + 1});
    }
    return out;
}

redundancy_set make_set(const std::vector<std::pair<std::string, std::string>>& members)
{
    redundancy_set set;
    std::size_t rank = 1;
    for (const auto& [id, text] : members) {
        set.members.push_back({id, text, rank++});
        set.provenance.push_back(id);
    }
    set.representative = set.members.front().text;
    return set;
}

std::set<std::set<std::string>> partition_of(const std::vector<redundancy_set>& sets)
{
    std::set<std::set<std::string>> out;
    for (const auto& s : sets) {
        out.emplace(s.provenance.begin(), s.provenance.end());
    }
    return out;
}

}  // namespace

TEST(Extractive, LeadingSentences)
{
    const extractive_summarizer s;
    EXPECT_EQ(s.summarize("One. Two. Three.", 2), "One. Two.");
    EXPECT_EQ(s.summarize("Only one sentence", 3), "Only one sentence");
    EXPECT_EQ(s.summarize("", 2), "");
    EXPECT_THROW(s.summarize("x", 0), usage_error);
    EXPECT_FALSE(s.consolidates());
    EXPECT_EQ(s.name(), "extractive-lead");
}

TEST(Preliminary, FallsBackToParagraphText)
{
    const paragraph p{"p9", "  Some text without terminal punctuation  "};
    const canned_summarizer empty("   ");
    const auto s = preliminary_summarize(p, empty, 2, 4);
    EXPECT_EQ(s.source_id, "p9");
    EXPECT_EQ(s.text, "Some text without terminal punctuation");
    EXPECT_EQ(s.rank, 4u);
    EXPECT_THROW(preliminary_summarize(p, empty, 0), usage_error);
    EXPECT_EQ(preliminary_summarize({"p", "A. B. C."}, extractive_summarizer{}, 1).text, "A.");
}

TEST(Redundancy, NoEdgesGivesSingletons)
{
    const table_similarity sim;
    const auto sets = redundancy_sets(summaries({"a", "b", "c"}), sim, 0.35, 1.0, 1);
    ASSERT_EQ(sets.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(sets[i].provenance, (std::vector<std::string>{"s" + std::to_string(i)}));
        EXPECT_EQ(sets[i].representative, sets[i].members[0].text);
    }
}

TEST(Redundancy, TwoTrianglesGiveTwoSets)
{
    table_similarity sim;
    for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
             {"a", "b"}, {"b", "c"}, {"a", "c"}, {"d", "e"}, {"e", "f"}, {"d", "f"}}) {
        sim.set(a, b, 0.9);
    }
    sim.set("c", "d", 0.2);  // below tau, not an edge
    const auto sets = redundancy_sets(summaries({"a", "b", "c", "d", "e", "f"}), sim, 0.35, 1.0, 3);
    EXPECT_EQ(partition_of(sets), (std::set<std::set<std::string>>{{"s0", "s1", "s2"}, {"s3", "s4", "s5"}}));
}

TEST(Redundancy, SingleSummaryAndValidation)
{
    const table_similarity sim;
    const auto sets = redundancy_sets(summaries({"solo"}), sim, 0.35, 1.0, 1);
    ASSERT_EQ(sets.size(), 1u);
    EXPECT_EQ(sets[0].representative, "solo");
    EXPECT_TRUE(redundancy_sets({}, sim, 0.35, 1.0, 1).empty());
    EXPECT_THROW(redundancy_sets({}, sim, -0.1, 1.0, 1), usage_error);
    EXPECT_THROW(redundancy_sets({}, sim, 0.35, 0.0, 1), usage_error);
}

TEST(Redundancy, PartitionPropertyOnRandomTables)
{
    std::mt19937 gen(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> texts;
        const std::size_t n = 1 + gen() % 12;
        for (std::size_t i = 0; i < n; ++i) {
            texts.push_back("t" + std::to_string(i));
        }
        table_similarity sim;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                sim.set(texts[i], texts[j], u(gen));
            }
        }
        const auto sets = redundancy_sets(summaries(texts), sim, 0.35, 1.0, trial);
        std::multiset<std::string> seen;
        for (const auto& s : sets) {
            ASSERT_FALSE(s.members.empty());
            for (std::size_t i = 1; i < s.members.size(); ++i) {
                EXPECT_LT(s.members[i - 1].rank, s.members[i].rank);
            }
            seen.insert(s.provenance.begin(), s.provenance.end());
        }
        EXPECT_EQ(seen.size(), n);
        EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), n);
    }
}

TEST(Redundancy, ShortPresetMergesAtLeastAsMuch)
{
    // Two triangles joined by two bridges: gamma 1 keeps them apart, gamma 0.25 merges.
    table_similarity sim;
    for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
             {"a", "b"}, {"b", "c"}, {"a", "c"}, {"d", "e"}, {"e", "f"}, {"d", "f"}}) {
        sim.set(a, b, 0.9);
    }
    sim.set("c", "d", 0.9);
    sim.set("b", "e", 0.9);
    const auto texts = summaries({"a", "b", "c", "d", "e", "f"});
    const auto long_sets = redundancy_sets(texts, sim, 0.35, gamma_for_length("long"), 1);
    const auto short_sets = redundancy_sets(texts, sim, 0.35, gamma_for_length("short"), 1);
    EXPECT_EQ(long_sets.size(), 2u);
    EXPECT_LE(short_sets.size(), long_sets.size());
    EXPECT_EQ(short_sets.size(), 1u);
    EXPECT_THROW(gamma_for_length("medium"), usage_error);
}

TEST(Medoid, PicksMostCentralMember)
{
    table_similarity sim;
    sim.set("A", "B", 0.9);
    sim.set("A", "C", 0.8);
    sim.set("B", "C", 0.1);
    const auto set = make_set({{"s1", "B"}, {"s2", "A"}, {"s3", "C"}});
    EXPECT_EQ(medoid(set, sim).text, "A");
}

TEST(Medoid, IdenticalTextsTieOnSmallestId)
{
    const lexical_similarity sim;
    const auto set = make_set({{"p3", "same text"}, {"p1", "same text"}, {"p2", "same text"}});
    EXPECT_EQ(medoid(set, sim).source_id, "p1");
}

TEST(Consolidate, NativeUsesMedoidRemoteUsesProvider)
{
    table_similarity sim;
    sim.set("A", "B", 0.9);
    sim.set("A", "C", 0.8);
    const auto set = make_set({{"s1", "B"}, {"s2", "A"}, {"s3", "C"}});
    EXPECT_EQ(consolidate_set(set, extractive_summarizer{}, sim, 2).representative, "A");

    const canned_summarizer remote("merged");
    const auto merged = consolidate_set(set, remote, sim, 2);
    EXPECT_EQ(merged.representative, "merged");
    ASSERT_EQ(remote.calls.size(), 1u);
    EXPECT_EQ(remote.calls[0], "B A C");
    EXPECT_EQ(merged.provenance, (std::vector<std::string>{"s1", "s2", "s3"}));

    const canned_summarizer silent(" ");
    EXPECT_EQ(consolidate_set(set, silent, sim, 2).representative, "A");
    EXPECT_THROW(consolidate_set(redundancy_set{}, remote, sim, 2), usage_error);
}

TEST(Order, LargestFirstThenMostSimilar)
{
    table_similarity sim;
    sim.set("big", "far", 0.1);
    sim.set("big", "near", 0.7);
    sim.set("near", "far", 0.6);
    std::vector<redundancy_set> sets{make_set({{"p5", "far"}}), make_set({{"p1", "big"}, {"p2", "x"}}),
                                     make_set({{"p7", "near"}})};
    const auto ordered = order_section(sets, sim);
    ASSERT_EQ(ordered.size(), 3u);
    EXPECT_EQ(ordered[0].representative, "big");
    EXPECT_EQ(ordered[1].representative, "near");
    EXPECT_EQ(ordered[2].representative, "far");
}

TEST(Order, TiesGoToSmallerSourceId)
{
    const table_similarity sim;
    std::vector<redundancy_set> sets{make_set({{"p9", "u"}}), make_set({{"p3", "v"}}), make_set({{"p5", "w"}})};
    const auto ordered = order_section(sets, sim);
    EXPECT_EQ(ordered[0].provenance[0], "p3");
    EXPECT_EQ(ordered[1].provenance[0], "p5");
    EXPECT_EQ(ordered[2].provenance[0], "p9");
    EXPECT_TRUE(order_section({}, sim).empty());
}

namespace {

struct article_case {
    corpus paragraphs;
    ranking retrieved;
    clustering clusters;
};

article_case three_paragraph_case()
{
    article_case c{corpus({{"p1", "Cats purr. Cats sleep a lot."},
                           {"p2", "Dogs bark loudly. Dogs fetch."},
                           {"p3", "Cats purr softly. Cats sleep."}}),
                   {"q", "bm25-title", {{"p2", 3.0, 1}, {"p1", 2.0, 2}, {"p3", 1.0, 3}}},
                   {"q", {{"p1", 0}, {"p2", 1}, {"p3", 0}}, 2}};
    return c;
}

}  // namespace

TEST(Assemble, SectionsFollowBestRank)
{
    auto c = three_paragraph_case();
    const query q{"q", "Pets", {}, {"Cats", "Dogs"}};
    lexical_similarity sim;
    const auto article = assemble_article(q, c.clusters, c.retrieved, c.paragraphs, extractive_summarizer{}, sim,
                                          summarize_config{}, {"bm25-title", "sbert-cosine", "extractive-lead", "long"});
    ASSERT_EQ(article.sections.size(), 2u);
    // The dog cluster holds rank 1, so it comes first.
    ASSERT_EQ(article.sections[0].size(), 1u);
    EXPECT_EQ(article.sections[0][0].provenance, (std::vector<std::string>{"p2"}));
    EXPECT_EQ(article.sections[0][0].text, "Dogs bark loudly. Dogs fetch.");
    // The two cat paragraphs are lexical near-duplicates and collapse to one entry.
    ASSERT_EQ(article.sections[1].size(), 1u);
    EXPECT_EQ(article.sections[1][0].provenance, (std::vector<std::string>{"p1", "p3"}));
    EXPECT_TRUE(article.flags.empty());
    EXPECT_EQ(article.summary_count(), 2u);
    EXPECT_EQ(render_plain_text(article), "Dogs bark loudly. Dogs fetch.\n\n" + article.sections[1][0].text + "\n");
}

TEST(Assemble, EmptyRetrievalIsFlagged)
{
    const query q{"q", "Nothing", {}, {"A", "B"}};
    lexical_similarity sim;
    const auto article = assemble_article(q, clustering{"q", {}, 0}, ranking{"q", "bm25-title", {}}, corpus(std::vector<paragraph>{}),
                                          extractive_summarizer{}, sim, summarize_config{}, {});
    EXPECT_TRUE(article.sections.empty());
    EXPECT_EQ(article.flags, (std::vector<std::string>{"empty-retrieval"}));
    EXPECT_EQ(render_plain_text(article), "");
}

TEST(Assemble, ClusteringMustCoverRanking)
{
    auto c = three_paragraph_case();
    const query q{"q", "Pets", {}, {}};
    lexical_similarity sim;
    c.clusters.assignment.erase("p3");
    EXPECT_THROW(assemble_article(q, c.clusters, c.retrieved, c.paragraphs, extractive_summarizer{}, sim,
                                  summarize_config{}, {}),
                 data_error);
    c.clusters.assignment["p9"] = 0;
    EXPECT_THROW(assemble_article(q, c.clusters, c.retrieved, c.paragraphs, extractive_summarizer{}, sim,
                                  summarize_config{}, {}),
                 data_error);
}

TEST(Assemble, ProvenanceCoversEveryCandidateOnce)
{
    std::mt19937 gen(12);
    const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<paragraph> paras;
        ranking r{"q", "bm25-title", {}};
        clustering cl{"q", {}, 0};
        const std::size_t n = 1 + gen() % 15;
        const std::size_t k = 1 + gen() % n;
        for (std::size_t i = 0; i < n; ++i) {
            std::string text;
            for (int w = 0; w < 6; ++w) {
                text += words[gen() % words.size()] + (w == 5 ? "." : " ");
            }
            const auto id = "d" + std::to_string(i);
            paras.push_back({id, text});
            r.docs.push_back({id, static_cast<double>(n - i), i + 1});
            cl.assignment[id] = i < k ? i : gen() % k;
        }
        cl.k = k;
        lexical_similarity sim;
        for (double gamma : {0.25, 1.0}) {
            summarize_config cfg;
            cfg.gamma = gamma;
            const auto a = assemble_article({"q", "t", {}, {}}, cl, r, corpus(paras), extractive_summarizer{}, sim,
                                            cfg, {});
            EXPECT_EQ(a.sections.size(), k);
            std::multiset<std::string> seen;
            for (const auto& section : a.sections) {
                EXPECT_FALSE(section.empty());
                for (const auto& e : section) {
                    seen.insert(e.provenance.begin(), e.provenance.end());
                }
            }
            EXPECT_EQ(seen.size(), n);
            EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), n);
        }
    }
}

TEST(Assemble, ShortPresetNeverLongerOnFixture)
{
    // Disconnected cliques of near-identical texts plus loosely shared words.
    std::vector<paragraph> paras;
    ranking r{"q", "bm25-title", {}};
    clustering cl{"q", {}, 1};
    std::size_t rank = 1;
    for (const std::string topic : {"river", "mountain", "forest", "desert"}) {
        for (int i = 0; i < 3; ++i) {
            const auto id = topic + std::to_string(i);
            paras.push_back({id, "The " + topic + " region is wide and " + topic + " land " + std::to_string(i) +
                                     " shared common words here."});
            r.docs.push_back({id, 1.0 / static_cast<double>(rank), rank});
            ++rank;
            cl.assignment[id] = 0;
        }
    }
    lexical_similarity sim;
    summarize_config long_cfg;
    summarize_config short_cfg;
    short_cfg.gamma = gamma_for_length("short");
    const query q{"q", "Geography", {}, {}};
    const auto long_a = assemble_article(q, cl, r, corpus(paras), extractive_summarizer{}, sim, long_cfg, {});
    const auto short_a = assemble_article(q, cl, r, corpus(paras), extractive_summarizer{}, sim, short_cfg, {});
    EXPECT_LE(short_a.summary_count(), long_a.summary_count());
    EXPECT_LT(short_a.summary_count(), paras.size());
}

TEST(Articles, JsonRoundTrip)
{
    testing_support::temp_dir dir;
    generated_article a{"q1",
                        {"bm25-title", "qs-title", "extractive-lead", "short"},
                        {{{"text one", {"p1", "p2"}}}, {{"text \"two\"", {"p3"}}}},
                        {"empty-retrieval"}};
    const auto back = load_articles(dir.write("a.jsonl", format_articles({a})));
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(to_json(back[0]), to_json(a));
    EXPECT_THROW(load_articles(dir.write("bad.jsonl", R"({"query_id":"q"})")), data_error);
}

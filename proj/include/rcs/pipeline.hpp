#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "benchmark.hpp"
#include "clustering.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "providers.hpp"
#include "retrieval.hpp"
#include "rng.hpp"
#include "simmetric.hpp"
#include "summarize.hpp"

namespace rcs {

inline constexpr const char* version = "0.1.0";

namespace clustering_method {
inline constexpr const char* sbert_euclid = "sbert-euclid";
inline constexpr const char* sbert_cosine = "sbert-cosine";
inline constexpr const char* qs3m_title = "qs3m-title";
inline constexpr const char* qs3m_lead = "qs3m-lead";
inline constexpr const char* qs3m_mean = "qs3m-mean";
}  // namespace clustering_method

inline const std::vector<std::string>& all_retrieval_methods()
{
    static const std::vector<std::string> methods = {method::bm25_title, method::bm25_topic_expansion,
                                                     method::bm25_topic_aggregation};
    return methods;
}

inline const std::vector<std::string>& all_clustering_methods()
{
    static const std::vector<std::string> methods = {clustering_method::sbert_euclid, clustering_method::sbert_cosine,
                                                     clustering_method::qs3m_title, clustering_method::qs3m_lead,
                                                     clustering_method::qs3m_mean};
    return methods;
}

/// The query model of a qs3m-* method, nullopt for query-agnostic methods.
inline std::optional<query_model> qs_variant(const std::string& clustering)
{
    if (clustering == clustering_method::qs3m_title) {
        return query_model::title;
    }
    if (clustering == clustering_method::qs3m_lead) {
        return query_model::lead;
    }
    if (clustering == clustering_method::qs3m_mean) {
        return query_model::mean;
    }
    if (clustering == clustering_method::sbert_euclid || clustering == clustering_method::sbert_cosine) {
        return std::nullopt;
    }
    throw usage_error("unknown clustering method " + clustering);
}

struct run_seeds {
    std::uint64_t split = 1;
    std::uint64_t metric = 13;
    std::uint64_t louvain = 17;
    std::uint64_t manual = 23;
    std::uint64_t bootstrap = 7;
};

struct run_config {
    std::string corpus;
    std::string benchmark_dir;
    std::string embeddings;
    std::string manual_qrels;   // empty: <benchmark_dir>/qrels.subtopic.txt
    std::string train_queries;  // empty: seeded split by train_fraction
    std::string output_dir;

    std::size_t k = 50;
    double k1 = 1.2;
    double b = 0.75;
    bool dedup = true;
    std::vector<std::string> retrieval = all_retrieval_methods();
    std::vector<std::string> clustering = all_clustering_methods();

    std::string summarizer = "extractive";  // extractive | remote
    std::string summarizer_url;
    std::string embedder_url;
    int max_sentences = 2;
    double tau = 0.35;
    std::string length = "long";
    std::optional<double> gamma;  // overrides the length preset

    double train_fraction = 0.5;
    int epochs = 20;
    double lr = 0.05;
    run_seeds seeds;
    std::size_t bootstrap_replicates = 10000;
    double alpha = 0.05;
    std::string baseline = "bm25-topic-aggregation/qs3m-mean";

    std::size_t jobs = 1;
    bool keep_going = false;

    [[nodiscard]] double resolved_gamma() const { return gamma ? *gamma : gamma_for_length(length); }

    void validate() const
    {
        if (k < 1) {
            throw usage_error("k must be at least 1");
        }
        if (retrieval.empty() || clustering.empty()) {
            throw usage_error("at least one retrieval and one clustering method are required");
        }
        for (const auto& r : retrieval) {
            if (std::find(all_retrieval_methods().begin(), all_retrieval_methods().end(), r) ==
                all_retrieval_methods().end()) {
                throw usage_error("unknown retrieval method " + r);
            }
        }
        for (const auto& c : clustering) {
            qs_variant(c);
        }
        if (summarizer != "extractive" && summarizer != "remote") {
            throw usage_error("summarizer must be extractive or remote");
        }
        if (summarizer == "remote" && summarizer_url.empty()) {
            throw usage_error("remote summarizer needs summarizer_url");
        }
        if (max_sentences < 1) {
            throw usage_error("max_sentences must be at least 1");
        }
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
            throw usage_error("train_fraction must lie in (0, 1)");
        }
        if (!(resolved_gamma() > 0.0) || !(tau >= 0.0)) {
            throw usage_error("gamma must be positive and tau non-negative");
        }
        if (jobs < 1) {
            throw usage_error("jobs must be at least 1");
        }
    }
};

inline json to_json(const run_seeds& s)
{
    return json{{"split", s.split}, {"metric", s.metric}, {"louvain", s.louvain}, {"manual", s.manual},
                {"bootstrap", s.bootstrap}};
}

inline json to_json(const run_config& c)
{
    json j{{"corpus", c.corpus},
           {"benchmark_dir", c.benchmark_dir},
           {"embeddings", c.embeddings},
           {"manual_qrels", c.manual_qrels},
           {"train_queries", c.train_queries},
           {"output_dir", c.output_dir},
           {"k", c.k},
           {"k1", c.k1},
           {"b", c.b},
           {"dedup", c.dedup},
           {"retrieval", c.retrieval},
           {"clustering", c.clustering},
           {"summarizer", c.summarizer},
           {"summarizer_url", c.summarizer_url},
           {"embedder_url", c.embedder_url},
           {"max_sentences", c.max_sentences},
           {"tau", c.tau},
           {"length", c.length},
           {"gamma", c.resolved_gamma()},
           {"train_fraction", c.train_fraction},
           {"epochs", c.epochs},
           {"lr", c.lr},
           {"seeds", to_json(c.seeds)},
           {"bootstrap_replicates", c.bootstrap_replicates},
           {"alpha", c.alpha},
           {"baseline", c.baseline},
           {"jobs", c.jobs},
           {"keep_going", c.keep_going}};
    return j;
}

inline run_config run_config_from_json(const json& j)
{
    try {
        run_config c;
        c.corpus = j.at("corpus").get<std::string>();
        c.benchmark_dir = j.at("benchmark_dir").get<std::string>();
        c.embeddings = j.at("embeddings").get<std::string>();
        c.manual_qrels = j.value("manual_qrels", "");
        c.train_queries = j.value("train_queries", "");
        c.output_dir = j.value("output_dir", "");
        c.k = j.value("k", c.k);
        c.k1 = j.value("k1", c.k1);
        c.b = j.value("b", c.b);
        c.dedup = j.value("dedup", c.dedup);
        c.retrieval = j.value("retrieval", c.retrieval);
        c.clustering = j.value("clustering", c.clustering);
        c.summarizer = j.value("summarizer", c.summarizer);
        c.summarizer_url = j.value("summarizer_url", "");
        c.embedder_url = j.value("embedder_url", "");
        c.max_sentences = j.value("max_sentences", c.max_sentences);
        c.tau = j.value("tau", c.tau);
        c.length = j.value("length", c.length);
        if (j.contains("gamma")) {
            c.gamma = j.at("gamma").get<double>();
        }
        c.train_fraction = j.value("train_fraction", c.train_fraction);
        c.epochs = j.value("epochs", c.epochs);
        c.lr = j.value("lr", c.lr);
        if (j.contains("seeds")) {
            const auto& s = j.at("seeds");
            c.seeds = {s.value("split", c.seeds.split), s.value("metric", c.seeds.metric),
                       s.value("louvain", c.seeds.louvain), s.value("manual", c.seeds.manual),
                       s.value("bootstrap", c.seeds.bootstrap)};
        }
        c.bootstrap_replicates = j.value("bootstrap_replicates", c.bootstrap_replicates);
        c.alpha = j.value("alpha", c.alpha);
        c.baseline = j.value("baseline", c.baseline);
        c.jobs = j.value("jobs", c.jobs);
        c.keep_going = j.value("keep_going", c.keep_going);
        return c;
    } catch (const json::exception& e) {
        throw usage_error(std::string("malformed run configuration: ") + e.what());
    }
}

using log_sink = std::function<void(const std::string&)>;

inline log_sink stderr_log()
{
    return [](const std::string& message) { std::cerr << message << "\n"; };
}

/// Everything the per-query stages read. Immutable once built.
struct experiment {
    run_config config;
    corpus paragraphs;
    std::vector<query> queries;
    qrels title_qrels;
    cluster_gold gold;
    std::vector<gold_article> gold_articles;
    qrels manual_qrels;
    std::optional<embedding_store> embeddings;
    std::optional<inverted_index> index;
    std::map<query_model, qs_metric_model> metrics;
    std::unique_ptr<summarizer> summary_provider;
    std::shared_ptr<const remote_embedder> embedder;

    [[nodiscard]] std::unique_ptr<text_similarity> make_text_similarity() const
    {
        if (embedder) {
            return std::make_unique<embedding_similarity>(embedder);
        }
        return std::make_unique<lexical_similarity>();
    }

    [[nodiscard]] summarize_config summary_settings() const
    {
        return {config.max_sentences, config.tau, config.resolved_gamma(), config.seeds.louvain, config.length};
    }
};

inline std::unique_ptr<summarizer> make_summarizer(const run_config& c)
{
    if (c.summarizer == "remote") {
        return std::make_unique<remote_summarizer>(c.summarizer_url);
    }
    return std::make_unique<extractive_summarizer>();
}

/// Pairwise similarity over paragraph ids for a clustering method. For the
/// mean query model the query vector is the centroid of `candidates`.
inline std::function<double(const std::string&, const std::string&)>
make_pair_similarity(const experiment& ex, const query& q, const std::string& method,
                     const std::vector<std::string>& candidates)
{
    if (!ex.embeddings) {
        throw usage_error("clustering needs embeddings");
    }
    const auto& store = *ex.embeddings;
    const auto variant = qs_variant(method);
    if (!variant) {
        const auto kind = method == clustering_method::sbert_cosine ? base_kind::cosine : base_kind::euclidean;
        return [&store, kind](const std::string& a, const std::string& b) {
            return base_similarity(store, paragraph_key(a), paragraph_key(b), kind);
        };
    }
    auto it = ex.metrics.find(*variant);
    if (it == ex.metrics.end()) {
        throw usage_error("no trained metric for query model " + to_string(*variant));
    }
    const auto model = it->second;
    auto qv = std::make_shared<vec>(query_vector(store, q, *variant, candidates));
    return [&store, model, qv](const std::string& a, const std::string& b) {
        return qs_similarity(model, store.at(paragraph_key(a)), store.at(paragraph_key(b)), *qv);
    };
}

/// Single clustering entry point shared by component-wise and system-wise evaluation.
inline clustering cluster_candidates(const experiment& ex, const query& q, const std::string& method,
                                     const std::vector<std::string>& candidates, std::size_t k)
{
    return hac_cluster(candidates, make_pair_similarity(ex, q, method, candidates), k, q.id);
}

struct pipeline_output {
    ranking retrieved;
    clustering clusters;
    generated_article article;
};

/// Retrieve -> cluster into the true subtopic count (clamped to the number of
/// candidates) -> summarize. Errors carry the failing stage.
inline pipeline_output run_pipeline(const experiment& ex, const query& q, const std::string& retrieval_method,
                                    const std::string& clustering_method_name, const log_sink& log = stderr_log())
{
    pipeline_output out;
    const auto stage = [&](const char* name) {
        return std::string("stage ") + name + " (" + retrieval_method + "/" + clustering_method_name + ") query " +
               q.id;
    };
    try {
        out.retrieved = retrieve(*ex.index, q, retrieval_method, ex.config.k);
    } catch (const error& e) {
        rethrow_with_context(e, stage("retrieve"));
    }
    std::vector<std::string> candidates;
    for (const auto& d : out.retrieved.docs) {
        candidates.push_back(d.id);
    }
    article_method meta{retrieval_method, clustering_method_name, ex.summary_provider->name(), ex.config.length};
    if (candidates.empty()) {
        out.clusters = {q.id, {}, 0};
        out.article = {q.id, meta, {}, {"empty-retrieval"}};
        return out;
    }
    try {
        auto k = true_k(q, ex.gold);
        if (k > candidates.size()) {
            log("warning: query " + q.id + ": " + std::to_string(k) + " subtopics but only " +
                std::to_string(candidates.size()) + " candidates (" + retrieval_method + "); clamping K");
            k = candidates.size();
        }
        out.clusters = cluster_candidates(ex, q, clustering_method_name, candidates, k);
    } catch (const error& e) {
        rethrow_with_context(e, stage("cluster"));
    }
    try {
        auto sim = ex.make_text_similarity();
        out.article =
            assemble_article(q, out.clusters, out.retrieved, ex.paragraphs, *ex.summary_provider, *sim,
                             ex.summary_settings(), meta);
    } catch (const error& e) {
        rethrow_with_context(e, stage("summarize"));
    }
    return out;
}

namespace detail {

inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

struct manual_selection {
    ranking pseudo_ranking;
    clustering clusters;
};

/// Oracle clusters from subtopic-level assessments: each positively judged
/// paragraph joins its highest-graded subtopic, grade ties broken uniformly at
/// random from `seed` (mixed with the query id). The pseudo ranking orders
/// paragraphs by best grade, then id.
inline manual_selection manual_clusters(const query& q, const qrels& manual, std::uint64_t seed)
{
    const auto prefix = q.id + "/";
    std::map<std::string, std::vector<std::pair<int, std::string>>> judged;
    for (const auto& [key, grades] : manual.entries) {
        if (key.compare(0, prefix.size(), prefix) != 0) {
            continue;
        }
        const auto slug = key.substr(prefix.size());
        for (const auto& [pid, grade] : grades) {
            if (grade > 0) {
                judged[pid].emplace_back(grade, slug);
            }
        }
    }
    rng_t rng(seed ^ detail::fnv1a(q.id));
    std::map<std::string, std::string> chosen;
    std::map<std::string, int> best_grade;
    for (auto& [pid, options] : judged) {
        std::sort(options.begin(), options.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::size_t ties = 1;
        while (ties < options.size() && options[ties].first == options.front().first) {
            ++ties;
        }
        const auto pick = ties > 1 ? uniform_index(rng, ties) : 0;
        chosen.emplace(pid, options[pick].second);
        best_grade.emplace(pid, options.front().first);
    }

    // Cluster indices follow the query's section order; unknown slugs go last.
    std::vector<std::string> slug_order;
    for (const auto& s : q.subtopics) {
        slug_order.push_back(slugify(s));
    }
    std::set<std::string> used;
    for (const auto& [pid, slug] : chosen) {
        used.insert(slug);
    }
    std::map<std::string, std::size_t> cluster_of;
    for (const auto& slug : slug_order) {
        if (used.count(slug) > 0 && cluster_of.count(slug) == 0) {
            cluster_of.emplace(slug, cluster_of.size());
        }
    }
    for (const auto& slug : used) {
        cluster_of.emplace(slug, cluster_of.size());
    }

    manual_selection out;
    out.clusters = {q.id, {}, cluster_of.size()};
    for (const auto& [pid, slug] : chosen) {
        out.clusters.assignment.emplace(pid, cluster_of.at(slug));
    }
    std::vector<std::pair<std::string, double>> scored;
    for (const auto& [pid, grade] : best_grade) {
        scored.emplace_back(pid, static_cast<double>(grade));
    }
    out.pseudo_ranking = {q.id, "manual", detail::top_k(std::move(scored), std::max<std::size_t>(1, judged.size()))};
    return out;
}

inline generated_article run_manual(const experiment& ex, const query& q, const qrels& manual, std::uint64_t seed)
{
    article_method meta{"manual", "manual", ex.summary_provider->name(), ex.config.length};
    try {
        const auto selection = manual_clusters(q, manual, seed);
        if (selection.clusters.assignment.empty()) {
            return {q.id, meta, {}, {"no-positive-assessments"}};
        }
        auto sim = ex.make_text_similarity();
        return assemble_article(q, selection.clusters, selection.pseudo_ranking, ex.paragraphs,
                                *ex.summary_provider, *sim, ex.summary_settings(), meta);
    } catch (const error& e) {
        rethrow_with_context(e, "stage manual query " + q.id);
    }
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; returns one captured
/// exception slot per index.
inline std::vector<std::exception_ptr> parallel_for(std::size_t n, std::size_t jobs,
                                                    const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> failures(n);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const auto threads = std::min(jobs, n);
    if (threads <= 1) {
        worker();
        return failures;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    return failures;
}

inline std::string describe(const std::exception_ptr& p)
{
    try {
        std::rethrow_exception(p);
    } catch (const std::exception& e) {
        return e.what();
    } catch (...) {
        return "unknown error";
    }
}

struct query_split {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

/// Train/test ids: explicit list when given, else a seeded shuffle of the
/// sorted ids with round(train_fraction * n) training queries.
inline query_split split_queries(const std::vector<query>& queries, const run_config& config)
{
    std::vector<std::string> ids;
    for (const auto& q : queries) {
        ids.push_back(q.id);
    }
    std::sort(ids.begin(), ids.end());
    query_split split;
    if (!config.train_queries.empty()) {
        std::set<std::string> train;
        for_each_line(config.train_queries, [&](const std::string& line, std::size_t) { train.insert(trim(line)); });
        for (const auto& id : ids) {
            (train.count(id) ? split.train : split.test).push_back(id);
        }
    } else {
        rng_t rng(config.seeds.split);
        seeded_shuffle(ids, rng);
        auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * static_cast<double>(ids.size())));
        n_train = std::clamp<std::size_t>(n_train, ids.size() > 1 ? 1 : 0, ids.size() > 1 ? ids.size() - 1 : ids.size());
        split.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
        split.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
        std::sort(split.train.begin(), split.train.end());
        std::sort(split.test.begin(), split.test.end());
    }
    std::vector<std::string> overlap;
    std::set_intersection(split.train.begin(), split.train.end(), split.test.begin(), split.test.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) {
        throw data_error("train and test queries overlap");
    }
    if (split.test.empty()) {
        throw data_error("no test queries left after the split");
    }
    return split;
}

inline std::string benchmark_file(const run_config& c, const char* name)
{
    return (fs::path(c.benchmark_dir) / name).string();
}

/// Loads inputs and the index; metrics are trained separately.
inline experiment load_experiment(const run_config& config)
{
    config.validate();
    experiment ex;
    ex.config = config;
    const auto stage = [](const char* name, const auto& fn) {
        try {
            fn();
        } catch (const error& e) {
            rethrow_with_context(e, std::string("stage ") + name);
        }
    };
    stage("load", [&] {
        ex.paragraphs = ingest_corpus(config.corpus, config.dedup);
        ex.queries = load_queries(benchmark_file(config, "queries.jsonl"));
        ex.title_qrels = load_qrels(benchmark_file(config, "qrels.title.txt"));
        ex.gold = load_cluster_gold(benchmark_file(config, "cluster_gold.txt"));
        ex.gold_articles = load_gold_articles(benchmark_file(config, "gold_articles.jsonl"));
        ex.manual_qrels = load_qrels(config.manual_qrels.empty() ? benchmark_file(config, "qrels.subtopic.txt")
                                                                 : config.manual_qrels);
        ex.embeddings = load_embeddings(config.embeddings);
    });
    stage("index", [&] { ex.index = build_index(ex.paragraphs, {config.k1, config.b}); });
    ex.summary_provider = make_summarizer(config);
    if (!config.embedder_url.empty()) {
        ex.embedder = std::make_shared<remote_embedder>(config.embedder_url);
    }
    return ex;
}

struct matrix_result {
    query_split split;
    std::vector<metric_report> retrieval_map;
    std::vector<metric_report> clustering_ari;
    evaluation_table table;
    std::vector<std::pair<std::string, std::string>> failures;  // query, message
    std::map<std::string, std::string> files;                   // relative path -> contents
    json manifest;
};

/// Full experiment: metric training on the train split, then retrieval MAP,
/// component ARI on gold-relevant paragraphs, and the ROUGE system matrix
/// (every retrieval x clustering pair plus Manual) on the test split. Files
/// are written under config.output_dir only after every stage succeeded.
inline matrix_result run_matrix(const run_config& config, const log_sink& log = stderr_log())
{
    auto ex = load_experiment(config);
    matrix_result result;
    result.split = split_queries(ex.queries, config);

    std::map<std::string, const query*> query_by_id;
    for (const auto& q : ex.queries) {
        query_by_id.emplace(q.id, &q);
    }
    std::vector<query> train_queries;
    for (const auto& id : result.split.train) {
        train_queries.push_back(*query_by_id.at(id));
    }

    // metric training
    for (const auto& method_name : config.clustering) {
        const auto variant = qs_variant(method_name);
        if (!variant || ex.metrics.count(*variant)) {
            continue;
        }
        try {
            auto trained = train_qs_metric(*ex.embeddings, ex.gold, train_queries, *variant,
                                           {config.epochs, config.lr, config.seeds.metric});
            ex.metrics.emplace(*variant, trained.model);
            result.files["models/qs3m-" + to_string(*variant) + ".json"] = to_json(trained.model).dump(2) + "\n";
        } catch (const error& e) {
            rethrow_with_context(e, "stage train-metric (" + method_name + ")");
        }
    }

    struct per_query {
        std::map<std::string, ranking> rankings;
        std::map<std::string, clustering> component;
        std::map<std::pair<std::string, std::string>, pipeline_output> system;
        generated_article manual;
    };
    const auto& test_ids = result.split.test;
    std::vector<per_query> outputs(test_ids.size());
    const auto failures = parallel_for(test_ids.size(), config.jobs, [&](std::size_t i) {
        const auto& q = *query_by_id.at(test_ids[i]);
        auto& out = outputs[i];
        for (const auto& m : config.clustering) {
            try {
                std::vector<std::string> relevant;
                for (const auto& [pid, label] : ex.gold.at(q.id)) {
                    relevant.push_back(pid);
                }
                out.component[m] = cluster_candidates(ex, q, m, relevant, true_k(q, ex.gold));
            } catch (const error& e) {
                rethrow_with_context(e, "stage component-cluster (" + m + ") query " + q.id);
            } catch (const std::out_of_range&) {
                throw data_error("stage component-cluster query " + q.id + ": no cluster gold");
            }
        }
        for (const auto& r : config.retrieval) {
            for (const auto& c : config.clustering) {
                auto run = run_pipeline(ex, q, r, c, log);
                out.rankings[r] = run.retrieved;
                out.system.emplace(std::make_pair(r, c), std::move(run));
            }
        }
        out.manual = run_manual(ex, q, ex.manual_qrels, config.seeds.manual);
    });

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < test_ids.size(); ++i) {
        if (!failures[i]) {
            kept.push_back(i);
            continue;
        }
        if (!config.keep_going) {
            try {
                std::rethrow_exception(failures[i]);
            } catch (const error&) {
                throw;
            } catch (const std::exception& e) {
                throw data_error("query " + test_ids[i] + ": " + e.what());
            }
        }
        result.failures.emplace_back(test_ids[i], describe(failures[i]));
        log("query " + test_ids[i] + " failed: " + result.failures.back().second);
    }
    if (kept.empty()) {
        throw data_error("every test query failed");
    }

    std::vector<std::string> kept_ids;
    for (auto i : kept) {
        kept_ids.push_back(test_ids[i]);
    }

    // retrieval
    for (const auto& r : config.retrieval) {
        std::vector<ranking> rankings;
        for (auto i : kept) {
            rankings.push_back(outputs[i].rankings.at(r));
        }
        result.retrieval_map.push_back(evaluate_map(rankings, ex.title_qrels, kept_ids, r));
        result.files["runs/" + r + ".run"] = format_run(rankings);
    }

    // component clustering
    for (const auto& c : config.clustering) {
        std::vector<clustering> clusters;
        for (auto i : kept) {
            clusters.push_back(outputs[i].component.at(c));
        }
        result.clustering_ari.push_back(evaluate_ari(clusters, ex.gold, c));
        result.files["clusters/component__" + c + ".txt"] = format_clusterings(clusters);
    }

    // system matrix
    std::vector<matrix_row> rows;
    std::size_t baseline = 0;
    for (const auto& r : config.retrieval) {
        for (const auto& c : config.clustering) {
            matrix_row row{r, c, {}};
            std::vector<clustering> clusters;
            for (auto i : kept) {
                const auto& run = outputs[i].system.at({r, c});
                row.articles.push_back(run.article);
                clusters.push_back(run.clusters);
            }
            const auto name = r + "__" + c;
            result.files["clusters/" + name + ".txt"] = format_clusterings(clusters);
            result.files["articles/" + name + ".jsonl"] = format_articles(row.articles);
            for (const auto& a : row.articles) {
                result.files["text/" + name + "/" + safe_file_name(a.query_id) + ".txt"] = render_plain_text(a);
            }
            if (r + "/" + c == config.baseline) {
                baseline = rows.size();
            }
            rows.push_back(std::move(row));
        }
    }
    matrix_row manual_row{"manual", "manual", {}};
    for (auto i : kept) {
        manual_row.articles.push_back(outputs[i].manual);
    }
    result.files["articles/manual.jsonl"] = format_articles(manual_row.articles);
    for (const auto& a : manual_row.articles) {
        result.files["text/manual/" + safe_file_name(a.query_id) + ".txt"] = render_plain_text(a);
    }
    rows.push_back(std::move(manual_row));
    try {
        result.table = evaluation_matrix(rows, ex.gold_articles, baseline,
                                         {config.bootstrap_replicates, config.seeds.bootstrap, config.alpha});
    } catch (const error& e) {
        rethrow_with_context(e, "stage evaluate");
    }

    json map_json = json::array();
    for (const auto& r : result.retrieval_map) {
        map_json.push_back(to_json(r));
    }
    json ari_json = json::array();
    for (const auto& r : result.clustering_ari) {
        ari_json.push_back(to_json(r));
    }
    result.files["retrieval_map.json"] = map_json.dump(2) + "\n";
    result.files["retrieval_map.txt"] = format_component_table("Retrieval Method", "MAP", result.retrieval_map);
    result.files["clustering_ari.json"] = ari_json.dump(2) + "\n";
    result.files["clustering_ari.txt"] = format_component_table("Clustering Method", "ARI", result.clustering_ari);
    result.files["rouge_matrix.csv"] = format_matrix_csv(result.table);
    result.files["rouge_matrix.txt"] = format_matrix_text(result.table);
    result.files["rouge_matrix.json"] = matrix_to_json(result.table).dump(2) + "\n";
    result.files["split.json"] =
        json{{"train", result.split.train}, {"test", result.split.test}}.dump(2) + "\n";
    if (!result.failures.empty()) {
        json f = json::array();
        for (const auto& [qid, message] : result.failures) {
            f.push_back({{"query_id", qid}, {"error", message}});
        }
        result.files["failures.json"] = f.dump(2) + "\n";
    }

    json outputs_list = json::array();
    for (const auto& [path, contents] : result.files) {
        outputs_list.push_back(path);
    }
    result.manifest = json{{"config", to_json(config)},
                           {"seeds", to_json(config.seeds)},
                           {"versions",
                            {{"rcs", version},
                             {"tokenizer", "ascii-lower-alnum-v1"},
                             {"qs_features", qs_feature_version},
                             {"rouge", "clipped-ngram-no-stem-no-stopwords"},
                             {"significance", "paired-bootstrap-v1"},
                             {"summarizer", ex.summary_provider->name()},
                             {"summary_similarity", ex.make_text_similarity()->name()}}},
                           {"outputs", outputs_list}};

    if (!config.output_dir.empty()) {
        std::vector<fs::path> written;
        try {
            for (const auto& [path, contents] : result.files) {
                const auto full = fs::path(config.output_dir) / path;
                write_file_atomic(full, contents);
                written.push_back(full);
            }
            const auto manifest_path = fs::path(config.output_dir) / "manifest.json";
            write_file_atomic(manifest_path, result.manifest.dump(2) + "\n");
        } catch (...) {
            std::error_code ec;
            for (const auto& p : written) {
                fs::remove(p, ec);
            }
            throw;
        }
    }
    return result;
}

}  // namespace rcs

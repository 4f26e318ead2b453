// Command-line front end: one subcommand per pipeline stage plus run-matrix.

#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rcs/benchmark.hpp"
#include "rcs/clustering.hpp"
#include "rcs/corpus.hpp"
#include "rcs/eval.hpp"
#include "rcs/pipeline.hpp"
#include "rcs/retrieval.hpp"
#include "rcs/simmetric.hpp"
#include "rcs/summarize.hpp"

namespace {

using namespace rcs;

const char* config_help = R"(Configuration files
  Any option can also be given in a file passed with --config. One
  "key = value" per line, lists as "key = [a, b, c]", '#' starts a comment.
  Options of a subcommand go under a "[subcommand]" header, e.g.

    [run-matrix]
    corpus = data/corpus.jsonl
    benchmark-dir = data/benchmark
    embeddings = data/embeddings.tsv
    retrieval = [bm25-title, bm25-topic-aggregation]
    out-dir = out

  Flags given on the command line take precedence over the file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider/network error.)";

std::map<std::string, const query*> index_queries(const std::vector<query>& queries)
{
    std::map<std::string, const query*> out;
    for (const auto& q : queries) {
        out.emplace(q.id, &q);
    }
    return out;
}

const query& find_query(const std::map<std::string, const query*>& by_id, const std::string& id)
{
    auto it = by_id.find(id);
    if (it == by_id.end()) {
        throw data_error("query " + id + " is not in the query file");
    }
    return *it->second;
}

void emit(const std::string& path, const std::string& contents)
{
    if (path.empty() || path == "-") {
        std::cout << contents;
    } else {
        write_file_atomic(path, contents);
    }
}

struct ingest_options {
    std::string input;
    std::string output;
    bool no_dedup = false;
};

void cmd_ingest(const ingest_options& o)
{
    const auto c = ingest_corpus(o.input, !o.no_dedup);
    if (!o.output.empty()) {
        write_file_atomic(o.output, corpus_to_jsonl(c));
    }
    std::cerr << "paragraphs " << c.size() << " avgdl " << format_fixed(c.avgdl(), 3) << "\n";
}

struct derive_options {
    std::string outlines;
    std::string corpus;
    std::string out_dir;
    std::size_t min_subtopics = 2;
    bool no_dedup = false;
};

void cmd_derive(const derive_options& o)
{
    const auto c = ingest_corpus(o.corpus, !o.no_dedup);
    const auto b = derive_benchmark(load_outlines(o.outlines), c, o.min_subtopics);
    const fs::path dir(o.out_dir);
    write_file_atomic(dir / "queries.jsonl", queries_to_jsonl(b.queries));
    write_file_atomic(dir / "qrels.title.txt", format_qrels(b.title_qrels));
    write_file_atomic(dir / "qrels.subtopic.txt", format_qrels(b.subtopic_qrels));
    write_file_atomic(dir / "cluster_gold.txt", format_cluster_gold(b.gold));
    write_file_atomic(dir / "gold_articles.jsonl", format_gold_articles(b.articles));
    std::cerr << "queries " << b.queries.size() << " skipped " << b.skipped.size() << "\n";
    const auto violations = coordination_check(b.queries, b.title_qrels, b.gold, b.articles, c);
    for (const auto& v : violations) {
        std::cerr << "coordination violation ("
                  << (v.type == coordination_violation::kind::unjudged_cluster_member ? "a" : "b") << ") "
                  << v.query_id << " " << v.detail << "\n";
    }
    if (!violations.empty()) {
        throw data_error(std::to_string(violations.size()) + " coordination violations");
    }
}

struct index_options {
    std::string corpus;
    std::string output;
    double k1 = 1.2;
    double b = 0.75;
    bool no_dedup = false;
};

void cmd_index(const index_options& o)
{
    const auto index = build_index(ingest_corpus(o.corpus, !o.no_dedup), {o.k1, o.b});
    write_file_atomic(o.output, index_snapshot(index).dump() + "\n");
    std::cerr << "documents " << index.num_docs() << " terms " << index.all_postings().size() << "\n";
}

struct retrieve_options {
    std::string index;
    std::string corpus;
    std::string queries;
    std::string method = method::bm25_title;
    std::size_t k = 50;
    double k1 = 1.2;
    double b = 0.75;
    std::string output;
};

void cmd_retrieve(const retrieve_options& o)
{
    if (o.index.empty() == o.corpus.empty()) {
        throw usage_error("give exactly one of --index or --corpus");
    }
    const auto index = o.index.empty() ? build_index(ingest_corpus(o.corpus, true), {o.k1, o.b})
                                       : index_from_snapshot(json::parse(read_file(o.index)));
    std::vector<ranking> rankings;
    for (const auto& q : load_queries(o.queries)) {
        rankings.push_back(retrieve(index, q, o.method, o.k));
    }
    emit(o.output, format_run(rankings));
}

struct train_options {
    std::string embeddings;
    std::string cluster_gold;
    std::string queries;
    std::string train_queries;
    std::string query_model = "title";
    int epochs = 20;
    double lr = 0.05;
    std::uint64_t seed = 13;
    std::string output;
};

void cmd_train(const train_options& o)
{
    auto queries = load_queries(o.queries);
    if (!o.train_queries.empty()) {
        std::set<std::string> keep;
        for_each_line(o.train_queries, [&](const std::string& line, std::size_t) { keep.insert(trim(line)); });
        std::erase_if(queries, [&](const query& q) { return keep.count(q.id) == 0; });
    }
    const auto result = train_qs_metric(load_embeddings(o.embeddings), load_cluster_gold(o.cluster_gold), queries,
                                        parse_query_model(o.query_model), {o.epochs, o.lr, o.seed});
    emit(o.output, to_json(result.model).dump(2) + "\n");
    std::cerr << "log-loss " << format_fixed(result.initial_loss, 6) << " -> " << format_fixed(result.final_loss, 6)
              << "\n";
}

struct cluster_options {
    std::string run;
    std::string embeddings;
    std::string queries;
    std::string cluster_gold;
    std::string method = clustering_method::sbert_euclid;
    std::string model;
    std::string output;
};

void cmd_cluster(const cluster_options& o)
{
    experiment ex;
    ex.embeddings = load_embeddings(o.embeddings);
    ex.gold = load_cluster_gold(o.cluster_gold);
    if (const auto variant = qs_variant(o.method)) {
        if (o.model.empty()) {
            throw usage_error(o.method + " needs --model");
        }
        auto model = qs_model_from_json(json::parse(read_file(o.model)));
        if (model.model != *variant) {
            throw usage_error("model was trained for the " + to_string(model.model) + " query model");
        }
        ex.metrics.emplace(*variant, model);
    }
    const auto queries = load_queries(o.queries);
    const auto by_id = index_queries(queries);
    std::vector<clustering> out;
    for (const auto& r : load_run(o.run)) {
        const auto& q = find_query(by_id, r.query_id);
        std::vector<std::string> candidates;
        for (const auto& d : r.docs) {
            candidates.push_back(d.id);
        }
        auto k = true_k(q, ex.gold);
        if (k > candidates.size()) {
            std::cerr << "warning: query " << q.id << ": clamping K from " << k << " to " << candidates.size() << "\n";
            k = candidates.size();
        }
        out.push_back(cluster_candidates(ex, q, o.method, candidates, k));
    }
    emit(o.output, format_clusterings(out));
}

struct summarize_options {
    std::string run;
    std::string clusters;
    std::string manual_qrels;
    std::string corpus;
    std::string queries;
    std::string output;
    std::string text_dir;
    std::string clustering_tag = "unknown";
    int max_sentences = 2;
    double tau = 0.35;
    std::string length = "long";
    double gamma = 0.0;
    std::uint64_t seed = 17;
    std::uint64_t manual_seed = 23;
    std::string summarizer_url;
    std::string embedder_url;
};

void cmd_summarize(const summarize_options& o)
{
    run_config config;
    config.max_sentences = o.max_sentences;
    config.tau = o.tau;
    config.length = o.length;
    if (o.gamma > 0.0) {
        config.gamma = o.gamma;
    }
    config.seeds.louvain = o.seed;
    config.summarizer = o.summarizer_url.empty() ? "extractive" : "remote";
    config.summarizer_url = o.summarizer_url;
    config.embedder_url = o.embedder_url;

    experiment ex;
    ex.config = config;
    ex.paragraphs = ingest_corpus(o.corpus, true);
    ex.summary_provider = make_summarizer(config);
    if (!o.embedder_url.empty()) {
        ex.embedder = std::make_shared<remote_embedder>(o.embedder_url);
    }
    const auto queries = load_queries(o.queries);
    const auto by_id = index_queries(queries);

    std::vector<generated_article> articles;
    if (!o.manual_qrels.empty()) {
        const auto manual = load_qrels(o.manual_qrels);
        for (const auto& q : queries) {
            articles.push_back(run_manual(ex, q, manual, o.manual_seed));
        }
    } else {
        if (o.run.empty() || o.clusters.empty()) {
            throw usage_error("summarize needs --run and --clusters (or --manual-qrels)");
        }
        std::map<std::string, clustering> clusters;
        for (auto& c : load_clusterings(o.clusters)) {
            auto id = c.query_id;
            clusters.emplace(std::move(id), std::move(c));
        }
        for (const auto& r : load_run(o.run)) {
            const auto& q = find_query(by_id, r.query_id);
            auto it = clusters.find(q.id);
            if (it == clusters.end()) {
                throw data_error("no clustering for query " + q.id);
            }
            auto sim = ex.make_text_similarity();
            articles.push_back(assemble_article(q, it->second, r, ex.paragraphs, *ex.summary_provider, *sim,
                                                ex.summary_settings(),
                                                {r.method, o.clustering_tag, ex.summary_provider->name(), o.length}));
        }
    }
    emit(o.output, format_articles(articles));
    if (!o.text_dir.empty()) {
        for (const auto& a : articles) {
            write_file_atomic(fs::path(o.text_dir) / (safe_file_name(a.query_id) + ".txt"), render_plain_text(a));
        }
    }
}

struct evaluate_options {
    std::string run;
    std::string qrels;
    std::string clusters;
    std::string cluster_gold;
    std::string articles;
    std::string gold;
    std::string output;
};

void cmd_evaluate(const evaluate_options& o)
{
    json reports = json::array();
    bool any = false;
    if (!o.run.empty() || !o.qrels.empty()) {
        if (o.run.empty() || o.qrels.empty()) {
            throw usage_error("MAP evaluation needs both --run and --qrels");
        }
        const auto rankings = load_run(o.run);
        const auto judgments = load_qrels(o.qrels);
        std::vector<std::string> ids;
        for (const auto& r : rankings) {
            ids.push_back(r.query_id);
        }
        reports.push_back(to_json(evaluate_map(rankings, judgments, ids)));
        any = true;
    }
    if (!o.clusters.empty() || !o.cluster_gold.empty()) {
        if (o.clusters.empty() || o.cluster_gold.empty()) {
            throw usage_error("ARI evaluation needs both --clusters and --cluster-gold");
        }
        reports.push_back(to_json(evaluate_ari(load_clusterings(o.clusters), load_cluster_gold(o.cluster_gold))));
        any = true;
    }
    if (!o.articles.empty() || !o.gold.empty()) {
        if (o.articles.empty() || o.gold.empty()) {
            throw usage_error("ROUGE evaluation needs both --articles and --gold");
        }
        const auto per_query = evaluate_rouge(load_articles(o.articles), load_gold_articles(o.gold));
        for (std::size_t c = 0; c < rouge_columns.size(); ++c) {
            metric_report r{rouge_columns[c], {}, {}};
            for (const auto& [qid, cells] : per_query) {
                r.per_query[qid] = cells[c];
            }
            reports.push_back(to_json(r));
        }
        any = true;
    }
    if (!any) {
        throw usage_error("nothing to evaluate: give --run/--qrels, --clusters/--cluster-gold or --articles/--gold");
    }
    emit(o.output, reports.dump(2) + "\n");
}

struct matrix_options {
    run_config config;
    std::string manifest;
    double gamma = 0.0;
};

void cmd_run_matrix(matrix_options o, const CLI::App& sub)
{
    run_config config = o.config;
    if (!o.manifest.empty()) {
        const auto manifest = json::parse(read_file(o.manifest));
        config = run_config_from_json(manifest.at("config"));
        if (sub.count("--out-dir") > 0) {
            config.output_dir = o.config.output_dir;
        }
        if (sub.count("--jobs") > 0) {
            config.jobs = o.config.jobs;
        }
    } else {
        if (config.corpus.empty() || config.benchmark_dir.empty() || config.embeddings.empty()) {
            throw usage_error("run-matrix needs --corpus, --benchmark-dir and --embeddings (or --manifest)");
        }
        if (o.gamma > 0.0) {
            config.gamma = o.gamma;
        }
        for (auto* path : {&config.corpus, &config.benchmark_dir, &config.embeddings, &config.manual_qrels,
                           &config.train_queries}) {
            if (!path->empty()) {
                *path = fs::absolute(*path).lexically_normal().string();
            }
        }
    }
    if (config.output_dir.empty()) {
        throw usage_error("run-matrix needs --out-dir");
    }
    config.output_dir = fs::absolute(config.output_dir).lexically_normal().string();
    const auto result = run_matrix(config);
    std::cout << result.files.at("retrieval_map.txt") << "\n"
              << result.files.at("clustering_ari.txt") << "\n"
              << result.files.at("rouge_matrix.txt");
    if (!result.failures.empty()) {
        std::cerr << result.failures.size() << " queries failed; see failures.json\n";
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Retrieve, cluster and summarize passages into query-specific articles"};
    app.set_config("--config", "", "Read options from a key = value configuration file");
    app.footer(config_help);
    app.require_subcommand(1);

    ingest_options ingest;
    auto* s_ingest = app.add_subcommand("ingest", "Load, validate and deduplicate a paragraph corpus");
    s_ingest->add_option("--input", ingest.input, "Corpus file ({\"id\",\"text\"} per line)")->required();
    s_ingest->add_option("--output", ingest.output, "Write the cleaned corpus here");
    s_ingest->add_flag("--no-dedup", ingest.no_dedup, "Keep paragraphs with duplicate text");

    derive_options derive;
    auto* s_derive = app.add_subcommand("derive-benchmark", "Derive queries, qrels, cluster gold and gold articles");
    s_derive->add_option("--outlines", derive.outlines, "Outline file")->required();
    s_derive->add_option("--corpus", derive.corpus, "Corpus file")->required();
    s_derive->add_option("--out-dir", derive.out_dir, "Output directory")->required();
    s_derive->add_option("--min-subtopics", derive.min_subtopics, "Minimum non-empty sections per page")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    s_derive->add_flag("--no-dedup", derive.no_dedup, "Keep paragraphs with duplicate text");

    index_options idx;
    auto* s_index = app.add_subcommand("index", "Build a BM25 index snapshot");
    s_index->add_option("--corpus", idx.corpus, "Corpus file")->required();
    s_index->add_option("--output", idx.output, "Snapshot path")->required();
    s_index->add_option("--k1", idx.k1, "BM25 k1")->capture_default_str();
    s_index->add_option("--b", idx.b, "BM25 b")->capture_default_str();
    s_index->add_flag("--no-dedup", idx.no_dedup, "Keep paragraphs with duplicate text");

    retrieve_options ret;
    auto* s_retrieve = app.add_subcommand("retrieve", "Write a TREC run for every query");
    s_retrieve->add_option("--index", ret.index, "Index snapshot");
    s_retrieve->add_option("--corpus", ret.corpus, "Corpus file (index built on the fly)");
    s_retrieve->add_option("--queries", ret.queries, "Query file")->required();
    s_retrieve->add_option("--method", ret.method, "bm25-title | bm25-topic-expansion | bm25-topic-aggregation")
        ->capture_default_str()
        ->check(CLI::IsMember({"bm25-title", "bm25-topic-expansion", "bm25-topic-aggregation"}));
    s_retrieve->add_option("--k", ret.k, "Ranking depth")->capture_default_str()->check(CLI::PositiveNumber);
    s_retrieve->add_option("--k1", ret.k1, "BM25 k1 (with --corpus)")->capture_default_str();
    s_retrieve->add_option("--b", ret.b, "BM25 b (with --corpus)")->capture_default_str();
    s_retrieve->add_option("--output", ret.output, "Run file (default stdout)");

    train_options train;
    auto* s_train = app.add_subcommand("train-metric", "Train the query-specific similarity metric");
    s_train->add_option("--embeddings", train.embeddings, "Embedding file")->required();
    s_train->add_option("--cluster-gold", train.cluster_gold, "Cluster gold file")->required();
    s_train->add_option("--queries", train.queries, "Query file")->required();
    s_train->add_option("--train-queries", train.train_queries, "Restrict training to these query ids");
    s_train->add_option("--query-model", train.query_model, "title | lead | mean")->capture_default_str();
    s_train->add_option("--epochs", train.epochs, "SGD epochs")->capture_default_str();
    s_train->add_option("--lr", train.lr, "Learning rate")->capture_default_str();
    s_train->add_option("--seed", train.seed, "Seed")->capture_default_str();
    s_train->add_option("--output", train.output, "Model file (default stdout)");

    cluster_options clu;
    auto* s_cluster = app.add_subcommand("cluster", "Cluster each query's ranking into its subtopic count");
    s_cluster->add_option("--run", clu.run, "Run file")->required();
    s_cluster->add_option("--embeddings", clu.embeddings, "Embedding file")->required();
    s_cluster->add_option("--queries", clu.queries, "Query file")->required();
    s_cluster->add_option("--cluster-gold", clu.cluster_gold, "Cluster gold (for the subtopic count)")->required();
    s_cluster->add_option("--method", clu.method, "sbert-euclid | sbert-cosine | qs3m-title | qs3m-lead | qs3m-mean")
        ->capture_default_str()
        ->check(CLI::IsMember({"sbert-euclid", "sbert-cosine", "qs3m-title", "qs3m-lead", "qs3m-mean"}));
    s_cluster->add_option("--model", clu.model, "Trained metric (qs3m-* methods)");
    s_cluster->add_option("--output", clu.output, "Cluster file (default stdout)");

    summarize_options sum;
    auto* s_summarize = app.add_subcommand("summarize", "Turn clusters into articles with provenance");
    s_summarize->add_option("--run", sum.run, "Run file");
    s_summarize->add_option("--clusters", sum.clusters, "Cluster file");
    s_summarize->add_option("--manual-qrels", sum.manual_qrels, "Build oracle clusters from subtopic qrels instead");
    s_summarize->add_option("--corpus", sum.corpus, "Corpus file")->required();
    s_summarize->add_option("--queries", sum.queries, "Query file")->required();
    s_summarize->add_option("--output", sum.output, "Article file (default stdout)");
    s_summarize->add_option("--text-dir", sum.text_dir, "Also write one plain-text article per query here");
    s_summarize->add_option("--clustering-tag", sum.clustering_tag, "Clustering method recorded in metadata");
    s_summarize->add_option("--max-sentences", sum.max_sentences, "Sentences per preliminary summary")
        ->capture_default_str();
    s_summarize->add_option("--tau", sum.tau, "Redundancy edge threshold")->capture_default_str();
    s_summarize->add_option("--length", sum.length, "short | long")->capture_default_str();
    s_summarize->add_option("--gamma", sum.gamma, "Louvain resolution (overrides --length)");
    s_summarize->add_option("--seed", sum.seed, "Louvain seed")->capture_default_str();
    s_summarize->add_option("--manual-seed", sum.manual_seed, "Tie-break seed for --manual-qrels")
        ->capture_default_str();
    s_summarize->add_option("--summarizer-url", sum.summarizer_url, "Remote summarizer endpoint");
    s_summarize->add_option("--embedder-url", sum.embedder_url, "Remote embedding endpoint for summary similarity");

    evaluate_options ev;
    auto* s_evaluate = app.add_subcommand("evaluate", "MAP, ARI or ROUGE reports");
    s_evaluate->add_option("--run", ev.run, "Run file");
    s_evaluate->add_option("--qrels", ev.qrels, "Qrels file");
    s_evaluate->add_option("--clusters", ev.clusters, "Cluster file");
    s_evaluate->add_option("--cluster-gold", ev.cluster_gold, "Cluster gold file");
    s_evaluate->add_option("--articles", ev.articles, "Article file");
    s_evaluate->add_option("--gold", ev.gold, "Gold article file");
    s_evaluate->add_option("--output", ev.output, "Report file (default stdout)");

    matrix_options mx;
    auto& rc = mx.config;
    auto* s_matrix = app.add_subcommand("run-matrix", "Train, run and evaluate every method combination");
    s_matrix->add_option("--manifest", mx.manifest, "Re-run the configuration recorded in a manifest");
    s_matrix->add_option("--corpus", rc.corpus, "Corpus file");
    s_matrix->add_option("--benchmark-dir", rc.benchmark_dir, "derive-benchmark output directory");
    s_matrix->add_option("--embeddings", rc.embeddings, "Embedding file");
    s_matrix->add_option("--manual-qrels", rc.manual_qrels, "Subtopic-level assessments for the Manual row");
    s_matrix->add_option("--train-queries", rc.train_queries, "Training query ids (default: seeded split)");
    s_matrix->add_option("--out-dir", rc.output_dir, "Output directory");
    s_matrix->add_option("--k", rc.k, "Ranking depth")->capture_default_str();
    s_matrix->add_option("--k1", rc.k1, "BM25 k1")->capture_default_str();
    s_matrix->add_option("--b", rc.b, "BM25 b")->capture_default_str();
    s_matrix->add_option("--retrieval", rc.retrieval, "Retrieval methods")->capture_default_str();
    s_matrix->add_option("--clustering", rc.clustering, "Clustering methods")->capture_default_str();
    s_matrix->add_option("--summarizer", rc.summarizer, "extractive | remote")->capture_default_str();
    s_matrix->add_option("--summarizer-url", rc.summarizer_url, "Remote summarizer endpoint");
    s_matrix->add_option("--embedder-url", rc.embedder_url, "Remote embedding endpoint for summary similarity");
    s_matrix->add_option("--max-sentences", rc.max_sentences, "Sentences per preliminary summary")
        ->capture_default_str();
    s_matrix->add_option("--tau", rc.tau, "Redundancy edge threshold")->capture_default_str();
    s_matrix->add_option("--length", rc.length, "short | long")->capture_default_str();
    s_matrix->add_option("--gamma", mx.gamma, "Louvain resolution (overrides --length)");
    s_matrix->add_option("--train-fraction", rc.train_fraction, "Share of queries used for training")
        ->capture_default_str();
    s_matrix->add_option("--epochs", rc.epochs, "Metric SGD epochs")->capture_default_str();
    s_matrix->add_option("--lr", rc.lr, "Metric learning rate")->capture_default_str();
    s_matrix->add_option("--split-seed", rc.seeds.split, "Train/test split seed")->capture_default_str();
    s_matrix->add_option("--metric-seed", rc.seeds.metric, "Metric training seed")->capture_default_str();
    s_matrix->add_option("--louvain-seed", rc.seeds.louvain, "Redundancy detection seed")->capture_default_str();
    s_matrix->add_option("--manual-seed", rc.seeds.manual, "Manual tie-break seed")->capture_default_str();
    s_matrix->add_option("--bootstrap-seed", rc.seeds.bootstrap, "Significance seed")->capture_default_str();
    s_matrix->add_option("--bootstrap", rc.bootstrap_replicates, "Bootstrap replicates")->capture_default_str();
    s_matrix->add_option("--alpha", rc.alpha, "Significance level")->capture_default_str();
    s_matrix->add_option("--baseline", rc.baseline, "Reference row as retrieval/clustering")->capture_default_str();
    s_matrix->add_option("--jobs", rc.jobs, "Queries processed in parallel")->capture_default_str();
    s_matrix->add_flag("--keep-going", rc.keep_going, "Record per-query failures and continue");
    s_matrix->add_flag("!--no-dedup", rc.dedup, "Keep paragraphs with duplicate text");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*s_ingest) {
            cmd_ingest(ingest);
        } else if (*s_derive) {
            cmd_derive(derive);
        } else if (*s_index) {
            cmd_index(idx);
        } else if (*s_retrieve) {
            cmd_retrieve(ret);
        } else if (*s_train) {
            cmd_train(train);
        } else if (*s_cluster) {
            cmd_cluster(clu);
        } else if (*s_summarize) {
            cmd_summarize(sum);
        } else if (*s_evaluate) {
            cmd_evaluate(ev);
        } else if (*s_matrix) {
            cmd_run_matrix(mx, *s_matrix);
        }
    } catch (const rcs::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

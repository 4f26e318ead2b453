#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "rcs/providers.hpp"
#include "rcs/summarize.hpp"

using namespace rcs;

namespace {

/// Local HTTP stub for the remote summarize and embed endpoints.
class stub_server {
  public:
    stub_server()
    {
        m_server.Post("/summarize", [this](const httplib::Request& req, httplib::Response& res) {
            ++summarize_calls;
            const auto body = json::parse(req.body);
            const auto text = body.at("text").get<std::string>();
            const int n = body.at("max_sentences").get<int>();
            auto sentences = split_sentences(text);
            if (sentences.size() > static_cast<std::size_t>(n)) {
                sentences.resize(static_cast<std::size_t>(n));
            }
            res.set_content(json{{"summary", "R: " + join(sentences, " ")}}.dump(), "application/json");
        });
        m_server.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
            ++embed_calls;
            const auto body = json::parse(req.body);
            json vectors = json::array();
            for (const auto& t : body.at("texts")) {
                const auto s = t.get<std::string>();
                vectors.push_back(
                    json::array({static_cast<double>(s.size()), s.empty() ? 0.0 : static_cast<double>(s[0]), 1.0}));
            }
            res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
        });
        m_server.Post("/wrong-count", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"vectors": [[1.0]]})", "application/json");
        });
        m_server.Post("/ragged", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"vectors": [[1.0, 2.0], [1.0]]})", "application/json");
        });
        m_server.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
            res.set_content("not json", "text/plain");
        });
        m_server.Post("/empty-summary", [](const httplib::Request&, httplib::Response& res) {
            res.set_content(R"({"summary": "  "})", "application/json");
        });
        m_server.Post("/fail", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
        m_port = m_server.bind_to_any_port("127.0.0.1");
        m_thread = std::thread([this] { m_server.listen_after_bind(); });
        m_server.wait_until_ready();
    }
    ~stub_server()
    {
        m_server.stop();
        m_thread.join();
    }

    [[nodiscard]] std::string url(const std::string& path) const
    {
        return "http://127.0.0.1:" + std::to_string(m_port) + path;
    }

    std::atomic<int> summarize_calls{0};
    std::atomic<int> embed_calls{0};

  private:
    httplib::Server m_server;
    int m_port = 0;
    std::thread m_thread;
};

/// A port nothing listens on: bind, read the port, close.
std::string dead_url()
{
    httplib::Server s;
    const int port = s.bind_to_any_port("127.0.0.1");
    s.stop();
    return "http://127.0.0.1:" + std::to_string(port) + "/summarize";
}

}  // namespace

TEST(Endpoint, Parsing)
{
    const auto ep = parse_endpoint("http://localhost:8080/v1/summarize");
    EXPECT_EQ(ep.base, "http://localhost:8080");
    EXPECT_EQ(ep.path, "/v1/summarize");
    EXPECT_EQ(parse_endpoint("http://host").path, "/");
    EXPECT_THROW(parse_endpoint("localhost:8080"), usage_error);
    EXPECT_THROW(parse_endpoint("ftp://host/x"), usage_error);
    EXPECT_THROW(remote_summarizer("nope"), usage_error);
}

TEST(RemoteSummarizer, RequestAndResponseShape)
{
    stub_server server;
    const remote_summarizer s(server.url("/summarize"), 5);
    EXPECT_EQ(s.summarize("One. Two. Three.", 2), "R: One. Two.");
    EXPECT_TRUE(s.consolidates());
    EXPECT_EQ(s.name(), "remote");
    EXPECT_EQ(server.summarize_calls.load(), 1);
}

TEST(RemoteSummarizer, ConsolidatesRedundancySets)
{
    stub_server server;
    const remote_summarizer s(server.url("/summarize"), 5);
    const lexical_similarity sim;
    redundancy_set set;
    set.members = {{"p1", "Cats purr.", 1}, {"p2", "Cats purr loudly.", 2}};
    set.provenance = {"p1", "p2"};
    set.representative = "Cats purr.";
    EXPECT_EQ(consolidate_set(set, s, sim, 3).representative, "R: Cats purr. Cats purr loudly.");
}

TEST(RemoteSummarizer, Failures)
{
    stub_server server;
    EXPECT_THROW(remote_summarizer(dead_url(), 2).summarize("x.", 1), provider_error);
    EXPECT_THROW(remote_summarizer(server.url("/garbage"), 5).summarize("x.", 1), provider_error);
    EXPECT_THROW(remote_summarizer(server.url("/empty-summary"), 5).summarize("x.", 1), provider_error);
    EXPECT_THROW(remote_summarizer(server.url("/fail"), 5).summarize("x.", 1), provider_error);
    try {
        remote_summarizer(server.url("/fail"), 5).summarize("x.", 1);
    } catch (const error& e) {
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(RemoteEmbedder, VectorsAndCaching)
{
    stub_server server;
    auto embedder = std::make_shared<const remote_embedder>(server.url("/embed"), 5);
    const auto v = embedder->embed(std::vector<std::string>{"ab", "xyz"});
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], (vec{2.0, 97.0, 1.0}));
    EXPECT_TRUE(embedder->embed({}).empty());
    EXPECT_EQ(server.embed_calls.load(), 1);

    embedding_similarity sim(embedder);
    sim.prepare({"ab", "ab", "xyz"});
    sim.prepare({"ab"});
    EXPECT_EQ(server.embed_calls.load(), 2);
    EXPECT_NEAR(sim("ab", "ab"), 1.0, 1e-12);
    EXPECT_LT(sim("ab", "xyz"), 1.0);
    EXPECT_THROW(sim("ab", "unprepared"), provider_error);
    EXPECT_EQ(sim.name(), "embedding-cosine");
}

TEST(RemoteEmbedder, MalformedResponses)
{
    stub_server server;
    EXPECT_THROW(remote_embedder(server.url("/wrong-count"), 5).embed(std::vector<std::string>{"a", "b"}), provider_error);
    EXPECT_THROW(remote_embedder(server.url("/ragged"), 5).embed(std::vector<std::string>{"a", "b"}), provider_error);
    EXPECT_THROW(remote_embedder(server.url("/garbage"), 5).embed({"a"}), provider_error);
    EXPECT_THROW(remote_embedder(dead_url(), 2).embed({"a"}), provider_error);
}

TEST(LexicalCosine, Values)
{
    EXPECT_DOUBLE_EQ(lexical_cosine("a b", "a b"), 1.0);
    EXPECT_DOUBLE_EQ(lexical_cosine("a", "b"), 0.0);
    EXPECT_DOUBLE_EQ(lexical_cosine("", "a"), 0.0);
    EXPECT_NEAR(lexical_cosine("a a b", "a"), 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_DOUBLE_EQ(lexical_cosine("Cat!", "cat"), 1.0);
    EXPECT_DOUBLE_EQ(lexical_cosine("x y z", "z y x"), lexical_cosine("z y x", "x y z"));
}

#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <httplib.h>

#include "error.hpp"
#include "io.hpp"
#include "simmetric.hpp"
#include "text.hpp"

namespace rcs {

struct endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline endpoint parse_endpoint(const std::string& url)
{
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
        throw usage_error("provider url must look like http://host:port/path, got \"" + url + "\"");
    }
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

namespace detail {

inline json post_json(const std::string& url, const json& request, int timeout_seconds)
{
    const auto ep = parse_endpoint(url);
    httplib::Client client(ep.base);
    client.set_connection_timeout(timeout_seconds, 0);
    client.set_read_timeout(timeout_seconds, 0);
    client.set_write_timeout(timeout_seconds, 0);
    auto res = client.Post(ep.path, request.dump(), "application/json");
    if (!res) {
        throw provider_error("provider " + url + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw provider_error("provider " + url + " answered HTTP " + std::to_string(res->status));
    }
    try {
        return json::parse(res->body);
    } catch (const json::parse_error&) {
        throw provider_error("provider " + url + " returned invalid JSON");
    }
}

}  // namespace detail

// ---- summarizers ----

class summarizer {
  public:
    virtual ~summarizer() = default;

    virtual std::string summarize(const std::string& text, int max_sentences) const = 0;

    /// True when the provider can condense a concatenation of several
    /// summaries; otherwise redundancy sets fall back to their medoid.
    [[nodiscard]] virtual bool consolidates() const = 0;

    [[nodiscard]] virtual std::string name() const = 0;
};

/// Leading sentences of the text.
class extractive_summarizer final : public summarizer {
  public:
    std::string summarize(const std::string& text, int max_sentences) const override
    {
        if (max_sentences < 1) {
            throw usage_error("max_sentences must be at least 1");
        }
        auto sentences = split_sentences(text);
        if (sentences.size() > static_cast<std::size_t>(max_sentences)) {
            sentences.resize(static_cast<std::size_t>(max_sentences));
        }
        return join(sentences, " ");
    }

    [[nodiscard]] bool consolidates() const override { return false; }
    [[nodiscard]] std::string name() const override { return "extractive-lead"; }
};

/// POST {"text", "max_sentences"} -> {"summary"}.
class remote_summarizer final : public summarizer {
  public:
    explicit remote_summarizer(std::string url, int timeout_seconds = 60)
        : m_url(std::move(url)), m_timeout(timeout_seconds)
    {
        parse_endpoint(m_url);
    }

    std::string summarize(const std::string& text, int max_sentences) const override
    {
        const auto response =
            detail::post_json(m_url, json{{"text", text}, {"max_sentences", max_sentences}}, m_timeout);
        auto it = response.find("summary");
        if (it == response.end() || !it->is_string() || trim(it->get<std::string>()).empty()) {
            throw provider_error("summarizer " + m_url + " returned no usable \"summary\"");
        }
        return it->get<std::string>();
    }

    [[nodiscard]] bool consolidates() const override { return true; }
    [[nodiscard]] std::string name() const override { return "remote"; }

  private:
    std::string m_url;
    int m_timeout;
};

// ---- embedding provider ----

/// POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class remote_embedder {
  public:
    explicit remote_embedder(std::string url, int timeout_seconds = 60) : m_url(std::move(url)), m_timeout(timeout_seconds)
    {
        parse_endpoint(m_url);
    }

    [[nodiscard]] std::vector<vec> embed(const std::vector<std::string>& texts) const
    {
        if (texts.empty()) {
            return {};
        }
        const auto response = detail::post_json(m_url, json{{"texts", texts}}, m_timeout);
        auto it = response.find("vectors");
        if (it == response.end() || !it->is_array() || it->size() != texts.size()) {
            throw provider_error("embedder " + m_url + " returned a malformed \"vectors\" list");
        }
        std::vector<vec> out;
        std::size_t dim = 0;
        for (const auto& row : *it) {
            if (!row.is_array() || row.empty()) {
                throw provider_error("embedder " + m_url + " returned a malformed vector");
            }
            vec v;
            for (const auto& x : row) {
                if (!x.is_number() || !std::isfinite(x.get<double>())) {
                    throw provider_error("embedder " + m_url + " returned a non-numeric value");
                }
                v.push_back(x.get<double>());
            }
            if (dim != 0 && v.size() != dim) {
                throw provider_error("embedder " + m_url + " returned vectors of differing length");
            }
            dim = v.size();
            out.push_back(std::move(v));
        }
        return out;
    }

    [[nodiscard]] const std::string& url() const noexcept { return m_url; }

  private:
    std::string m_url;
    int m_timeout;
};

// ---- summary-pair similarity ----

/// Cosine over term-frequency vectors of the shared tokenizer; 0 when either
/// text has no tokens.
inline double lexical_cosine(const std::string& a, const std::string& b)
{
    std::map<std::string, double> ta;
    std::map<std::string, double> tb;
    for (auto& t : tokenize(a)) {
        ta[std::move(t)] += 1.0;
    }
    for (auto& t : tokenize(b)) {
        tb[std::move(t)] += 1.0;
    }
    if (ta.empty() || tb.empty()) {
        return 0.0;
    }
    double d = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (const auto& [t, c] : ta) {
        na += c * c;
        if (auto it = tb.find(t); it != tb.end()) {
            d += c * it->second;
        }
    }
    for (const auto& [t, c] : tb) {
        nb += c * c;
    }
    return std::clamp(d / std::sqrt(na * nb), 0.0, 1.0);
}

class text_similarity {
  public:
    virtual ~text_similarity() = default;

    /// Called with every text before similarities are requested.
    virtual void prepare(const std::vector<std::string>& texts) { (void)texts; }

    virtual double operator()(const std::string& a, const std::string& b) const = 0;

    [[nodiscard]] virtual std::string name() const = 0;
};

class lexical_similarity final : public text_similarity {
  public:
    double operator()(const std::string& a, const std::string& b) const override { return lexical_cosine(a, b); }
    [[nodiscard]] std::string name() const override { return "lexical-tf-cosine"; }
};

/// Cosine over vectors fetched from a remote embedder, cached per text.
class embedding_similarity final : public text_similarity {
  public:
    explicit embedding_similarity(std::shared_ptr<const remote_embedder> embedder) : m_embedder(std::move(embedder))
    {}

    void prepare(const std::vector<std::string>& texts) override
    {
        std::vector<std::string> missing;
        {
            std::lock_guard lock(m_mutex);
            for (const auto& t : texts) {
                if (m_cache.count(t) == 0 && std::find(missing.begin(), missing.end(), t) == missing.end()) {
                    missing.push_back(t);
                }
            }
        }
        auto vectors = m_embedder->embed(missing);
        std::lock_guard lock(m_mutex);
        for (std::size_t i = 0; i < missing.size(); ++i) {
            m_cache.emplace(missing[i], std::move(vectors[i]));
        }
    }

    double operator()(const std::string& a, const std::string& b) const override
    {
        std::lock_guard lock(m_mutex);
        auto ia = m_cache.find(a);
        auto ib = m_cache.find(b);
        if (ia == m_cache.end() || ib == m_cache.end()) {
            throw provider_error("embedding for a summary was not prepared");
        }
        const double na = norm(ia->second);
        const double nb = norm(ib->second);
        if (na == 0.0 || nb == 0.0 || ia->second.size() != ib->second.size()) {
            return 0.0;
        }
        return std::clamp(dot(ia->second, ib->second) / (na * nb), -1.0, 1.0);
    }

    [[nodiscard]] std::string name() const override { return "embedding-cosine"; }

  private:
    std::shared_ptr<const remote_embedder> m_embedder;
    mutable std::mutex m_mutex;
    std::unordered_map<std::string, vec> m_cache;
};

}  // namespace rcs

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rcs {

namespace detail {

// Bytes >= 0x80 belong to UTF-8 sequences and are kept inside tokens, so
// non-ASCII words survive as single tokens.
constexpr bool is_word_byte(unsigned char c) noexcept
{
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

constexpr char ascii_lower(char c) noexcept
{
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

constexpr bool is_space(char c) noexcept
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

/// Shared tokenizer for BM25 and ROUGE: ASCII-lowercase, split on maximal
/// runs of non-alphanumeric bytes. No stemming, no stopwords.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        if (detail::is_word_byte(static_cast<unsigned char>(c))) {
            current.push_back(detail::ascii_lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

inline std::string trim(std::string_view s)
{
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && detail::is_space(s[begin])) {
        ++begin;
    }
    while (end > begin && detail::is_space(s[end - 1])) {
        --end;
    }
    return std::string(s.substr(begin, end - begin));
}

/// Lowercase + whitespace collapse; the dedup key for paragraphs.
inline std::string normalize_text(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (detail::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(detail::ascii_lower(c));
    }
    return out;
}

/// Lowercased heading with every non-alphanumeric byte mapped to '-'.
inline std::string slugify(std::string_view heading)
{
    std::string out;
    out.reserve(heading.size());
    for (char c : heading) {
        const auto uc = static_cast<unsigned char>(c);
        out.push_back(detail::is_word_byte(uc) && uc < 0x80 ? detail::ascii_lower(c) : '-');
    }
    return out;
}

/// Sentence split on '.', '!' or '?' followed by whitespace. Abbreviations
/// such as "Dr." are split too.
inline std::vector<std::string> split_sentences(std::string_view text)
{
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() && detail::is_space(text[i + 1])) {
            auto sentence = trim(text.substr(start, i + 1 - start));
            if (!sentence.empty()) {
                sentences.push_back(std::move(sentence));
            }
            start = i + 1;
        }
    }
    auto tail = trim(text.substr(start));
    if (!tail.empty()) {
        sentences.push_back(std::move(tail));
    }
    return sentences;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.append(sep);
        }
        out.append(parts[i]);
    }
    return out;
}

}  // namespace rcs

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace rcs {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline std::ifstream open_input(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw data_error("cannot open " + path.string());
    }
    return in;
}

inline std::string read_file(const fs::path& path)
{
    auto in = open_input(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Calls `fn(line, line_number)` for every non-blank line; line numbers start at 1.
inline void for_each_line(const fs::path& path, const std::function<void(const std::string&, std::size_t)>& fn)
{
    auto in = open_input(path);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        fn(line, number);
    }
}

/// Parses one JSON object per line.
inline void for_each_record(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn)
{
    for_each_line(path, [&](const std::string& line, std::size_t number) {
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": malformed record: " + e.what());
        }
        if (!record.is_object()) {
            throw data_error(path.string() + ":" + std::to_string(number) + ": record is not an object");
        }
        fn(record, number);
    });
}

/// Required string field of a record; errors name file and line.
inline std::string string_field(const json& record, const char* key, const fs::path& path, std::size_t line)
{
    auto it = record.find(key);
    if (it == record.end() || !it->is_string()) {
        throw data_error(path.string() + ":" + std::to_string(line) + ": missing or non-string field \"" + key + "\"");
    }
    return it->get<std::string>();
}

inline std::optional<std::string>
optional_string_field(const json& record, const char* key, const fs::path& path, std::size_t line)
{
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw data_error(path.string() + ":" + std::to_string(line) + ": field \"" + key + "\" is not a string");
    }
    return it->get<std::string>();
}

/// Writes via a sibling temp file and rename, so readers never see a partial file.
inline void write_file_atomic(const fs::path& path, const std::string& contents)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw data_error("cannot write " + tmp.string());
        }
        out << contents;
        if (!out) {
            throw data_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

/// Fixed-precision decimal rendering ("%.6f" style).
inline std::string format_fixed(double value, int decimals)
{
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(decimals);
    ss << value;
    return ss.str();
}

/// Maps an id onto a portable file name: [A-Za-z0-9._-] kept, rest %-escaped.
inline std::string safe_file_name(std::string_view id)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (char c : id) {
        const auto uc = static_cast<unsigned char>(c);
        if ((uc >= '0' && uc <= '9') || (uc >= 'a' && uc <= 'z') || (uc >= 'A' && uc <= 'Z') || c == '.' ||
            c == '_' || c == '-') {
            out.push_back(c);
        } else {
            out.push_back('%');
            out.push_back(hex[uc >> 4]);
            out.push_back(hex[uc & 0xF]);
        }
    }
    if (out.empty() || out == "." || out == "..") {
        out.insert(0, "_");
    }
    return out;
}

}  // namespace rcs

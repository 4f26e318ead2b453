#pragma once

#include <stdexcept>
#include <string>

namespace rcs {

/// Error categories map one-to-one onto CLI exit codes.
enum class error_kind { usage = 1, data = 2, provider = 3 };

class error : public std::runtime_error {
  public:
    error(error_kind kind, const std::string& what) : std::runtime_error(what), m_kind(kind) {}

    [[nodiscard]] error_kind kind() const noexcept { return m_kind; }
    [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(m_kind); }

  private:
    error_kind m_kind;
};

struct usage_error : error {
    explicit usage_error(const std::string& what) : error(error_kind::usage, what) {}
};

struct data_error : error {
    explicit data_error(const std::string& what) : error(error_kind::data, what) {}
};

struct provider_error : error {
    explicit provider_error(const std::string& what) : error(error_kind::provider, what) {}
};

// Re-raise with a prefix while keeping the category and its exception type.
[[noreturn]] inline void rethrow_with_context(const error& e, const std::string& context)
{
    const auto what = context + ": " + e.what();
    switch (e.kind()) {
    case error_kind::usage:
        throw usage_error(what);
    case error_kind::data:
        throw data_error(what);
    case error_kind::provider:
        throw provider_error(what);
    }
    throw error(e.kind(), what);
}

}  // namespace rcs

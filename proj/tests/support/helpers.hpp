#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "rcs/io.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class temp_dir {
  public:
    temp_dir()
    {
        static std::atomic<int> counter{0};
        m_path = std::filesystem::temp_directory_path() /
                 ("rcs-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(m_path);
        std::filesystem::create_directories(m_path);
    }
    ~temp_dir()
    {
        std::error_code ec;
        std::filesystem::remove_all(m_path, ec);
    }
    temp_dir(const temp_dir&) = delete;
    temp_dir& operator=(const temp_dir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return m_path; }

    std::filesystem::path write(const std::string& name, const std::string& contents) const
    {
        const auto p = m_path / name;
        rcs::write_file_atomic(p, contents);
        return p;
    }

  private:
    std::filesystem::path m_path;
};

inline std::filesystem::path fixture(const std::string& name)
{
    return std::filesystem::path(RCS_FIXTURE_DIR) / name;
}

}  // namespace testing_support

#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace test_helpers {

// Scratch directory under the test binary's cwd; wiped on construction.
class TempDir {
public:
    explicit TempDir(const std::string& name) : path_("test_tmp/" + name) {
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace test_helpers

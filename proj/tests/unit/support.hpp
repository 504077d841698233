#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "spmtnet/params.hpp"

namespace support {

inline std::filesystem::path data_dir()
{
    return SPMTNET_DATA_DIR;
}

inline std::filesystem::path params_file()
{
    return data_dir() / "params" / "lco_graphite.json";
}

inline const spmtnet::CellParameters& params()
{
    static const spmtnet::CellParameters p = spmtnet::load_parameters(params_file());
    return p;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("spmtnet-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

} // namespace support

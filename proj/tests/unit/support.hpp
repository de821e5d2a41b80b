#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sntlab/population.hpp"

namespace sntlab::test {

/// Fresh scratch directory under the build tree (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
    const char* root = std::getenv("SNTLAB_TEST_TMP");
    std::filesystem::path base = root ? std::filesystem::path(root) : std::filesystem::temp_directory_path() / "sntlab";
    auto dir = base / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Individual from a severity path and potential-outcome columns, given as
/// 0/1 per visit.
inline Individual person(std::uint32_t id, std::array<int, 3> severity, std::array<int, 3> y0,
                         std::array<int, 3> y1, bool decision2 = true) {
    Individual ind;
    ind.person_id = id;
    for (std::size_t v = 0; v < 3; ++v) {
        ind.severity[v] = severity[v] ? Severity::high : Severity::low;
        ind.po[v][0] = y0[v] != 0;
        ind.po[v][1] = y1[v] != 0;
    }
    ind.decision2 = decision2;
    derive_event_times(ind);
    return ind;
}

}  // namespace sntlab::test

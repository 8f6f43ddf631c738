#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>

#include "chainsight/hash.hpp"

namespace testing {

// Relative path -> SHA-256 of every regular file under `root`.
inline std::map<std::string, std::string> tree_hashes(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[std::filesystem::relative(e.path(), root).generic_string()] = chainsight::sha256_file(e.path());
    return out;
}

} // namespace testing

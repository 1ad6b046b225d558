#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace treefanova {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit content hash, hex encoded. Not cryptographic; identifies
// inputs for reproducibility records.
std::string fnv1a64_hex(const std::string& bytes);
std::string hash_file(const std::string& path);

// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::string& path, const std::string& content);

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::ordered_json config;
    std::map<std::string, std::string> input_hashes;  // path -> fnv1a64
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    std::optional<std::string> timestamp;  // omitted by default

    nlohmann::ordered_json to_json() const;
};

void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace treefanova

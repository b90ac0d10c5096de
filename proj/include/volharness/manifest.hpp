#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace volharness {

inline constexpr const char* kVersion = "0.3.0";

struct InputDigest {
    std::string path;
    std::string sha256;
};

struct RunManifest {
    std::string command;
    nlohmann::json options = nlohmann::json::object();
    std::vector<InputDigest> inputs;
    std::string version = kVersion;
    std::string timestamp;  // SOURCE_DATE_EPOCH when set, else now
};

std::string sha256_file(const std::filesystem::path& path);
std::string manifest_timestamp();

nlohmann::json to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace volharness

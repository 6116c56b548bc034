#pragma once

#include "biokg/models.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

enum class SourceFormat { Obo, TripleTsv };

struct SourceConfig {
    std::string kg_name;
    std::string url;  // http(s)://, file:// or a local path
    std::chrono::seconds poll_interval{std::chrono::hours(24)};
    std::vector<ModelKind> models{kAllModelKinds.begin(), kAllModelKinds.end()};
    SourceFormat format = SourceFormat::Obo;
    bool include_obsolete = false;
    // Applied to every model; dimension, epochs and seed also seed the
    // RDF2Vec skip-gram settings before skipgram overrides.
    nlohmann::json train_overrides = nlohmann::json::object();
    std::map<ModelKind, nlohmann::json> model_overrides;
    nlohmann::json walk_overrides = nlohmann::json::object();
    nlohmann::json skipgram_overrides = nlohmann::json::object();
};

struct ApiConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::size_t cache_capacity = 6;
    std::chrono::seconds refresh_interval{5};
    std::optional<std::filesystem::path> static_dir;
};

struct AppConfig {
    std::vector<SourceConfig> sources;
    std::filesystem::path store_path = "store";
    ApiConfig api;
};

inline constexpr const char* kConfigEnvVar = "BIOKG_CONFIG";

// Throws InvalidArgument on schema violations (duplicate kg_name, poll
// interval under one minute, unknown model names, ...).
SourceConfig parse_source_config(const nlohmann::json& j);
AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
// Relative store/static paths resolve against the config file's directory.
AppConfig load_config(const std::filesystem::path& path);

} // namespace biokg

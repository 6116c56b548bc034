#pragma once

// Versioned on-disk store of published embeddings.
//
//   {root}/{kg}/manifest.json                    array of VersionManifest
//   {root}/{kg}/{version}/labels.json
//   {root}/{kg}/{version}/{model}/vectors.json
//   {root}/{kg}/{version}/{model}/prov.json
//
//   {root}/{kg}/{version}/source                 original release bytes
//
// A version is assembled under {root}/{kg}/.staging-*, renamed into place and
// only then appended to manifest.json (itself replaced by rename). Readers
// list versions from the manifest, so a partially written version is never
// visible.

#include "biokg/clock.hpp"
#include "biokg/knowledge_graph.hpp"
#include "biokg/models.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

struct VersionManifest {
    std::string kg_name;
    std::string version_tag;
    std::string source_url;
    std::string sha256;
    SysTime retrieved_at{};
    std::vector<ModelKind> models;
    std::string source_format = "obo";  // "obo" or "tsv"
    // Relative path -> sha256 of every file in the version, for read-back checks.
    std::map<std::string, std::string> files;

    bool has_model(ModelKind kind) const;
};

nlohmann::json to_json(const VersionManifest& m);
VersionManifest manifest_from_json(const nlohmann::json& j);

// Safe single path component: [A-Za-z0-9._-]+, not starting with '.'.
bool is_valid_name(std::string_view name) noexcept;

// Version tag from an OBO data-version header (last path segment, sanitised)
// or, if that is empty, the retrieval date.
std::string derive_version_tag(std::string_view data_version, SysTime retrieved_at);

struct VectorTable {
    std::string kg;
    std::string version;
    std::string model;
    std::size_t dimension = 0;
    std::vector<std::string> iris;  // sorted ascending
    std::vector<double> values;     // iris.size() x dimension

    std::size_t size() const noexcept { return iris.size(); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values).subspan(i * dimension, dimension);
    }
};

// Canonical vectors.json text: sorted keys, shortest round-trip decimals.
// Obsolete entities are skipped. Throws DimensionMismatch on shape mismatch
// or non-finite components.
std::string export_vectors_json(const ModelArtifact& artifact, std::span<const EntityRecord> entities,
                                std::string_view kg, std::string_view version);
std::string export_vectors_json(const VectorTable& table);
// Throws MalformedInput.
VectorTable parse_vectors_json(std::string_view text);

struct LabelEntry {
    std::string label;
    std::string ontology_namespace;
    std::vector<std::string> alt_ids;
};
using LabelTable = std::map<std::string, LabelEntry>;

LabelTable labels_from_graph(const KnowledgeGraph& graph);
nlohmann::json to_json(const LabelTable& labels);
LabelTable labels_from_json(const nlohmann::json& j);

struct ModelOutput {
    ModelKind kind;
    std::string vectors_json;
    std::string prov_json;
};

struct LoadedVersion {
    VersionManifest manifest;
    std::map<ModelKind, VectorTable> vectors;
    LabelTable labels;
};

class VectorStore {
public:
    explicit VectorStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    // Throws VersionExists, InvalidArgument, IoFailure. `manifest.files` is
    // filled in by the store. Non-empty `source_bytes` are kept as the
    // version's `source` file so it can be retrained later.
    VersionManifest save_version(VersionManifest manifest, std::span<const ModelOutput> outputs,
                                 const LabelTable& labels, std::string_view source_bytes = {});

    std::vector<std::string> list_kgs() const;
    // Published manifests in publication order. Unknown kg -> empty.
    std::vector<VersionManifest> history(std::string_view kg) const;
    std::vector<std::string> list_versions(std::string_view kg) const;
    std::optional<VersionManifest> latest(std::string_view kg) const;
    // Accepts a tag or "latest". Throws NotFound.
    VersionManifest resolve(std::string_view kg, std::string_view version) const;

    // Verified file bytes. Throws NotFound, CorruptStore.
    std::string read_vectors_file(std::string_view kg, std::string_view version, ModelKind model) const;
    std::string read_prov_file(std::string_view kg, std::string_view version, ModelKind model) const;
    // Throws NotFound if the version was published without its source.
    std::string read_source_file(std::string_view kg, std::string_view version) const;
    VectorTable load_vectors(std::string_view kg, std::string_view version, ModelKind model) const;
    LabelTable load_labels(std::string_view kg, std::string_view version) const;
    LoadedVersion load_version(std::string_view kg, std::string_view version) const;

    // Test hook run after the staging directory is complete, before it is
    // renamed into place.
    std::function<void()> before_publish;

private:
    std::string read_verified(const VersionManifest& m, const std::string& relative) const;

    std::filesystem::path root_;
};

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

} // namespace biokg

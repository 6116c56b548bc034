#pragma once

// Shared fixtures for the unit and acceptance tests.

#include "biokg/clock.hpp"
#include "biokg/knowledge_graph.hpp"
#include "biokg/random.hpp"
#include "biokg/vector_store.hpp"

#include <filesystem>
#include <string>

namespace biokg::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

// Complete `branching`-ary is_a tree with `levels` levels below the root
// (levels=3, branching=4 gives 1+4+16+64 = 85 terms). Ids are TT:0000000
// upward in breadth-first order; labels are "node N".
std::string tree_obo(std::size_t levels = 3, std::size_t branching = 4,
                     const std::string& data_version = "releases/2025-01-01");
KnowledgeGraph tree_graph(std::size_t levels = 3, std::size_t branching = 4);

// Small GO-like document exercising obsolete terms, alt ids, relationships
// and duplicate labels.
std::string toy_obo();

// Random table of `n` concepts FX:0000000.. with d-dimensional values.
// When `quantize` is set, components are small integers so cosine ties occur.
VectorTable random_table(std::size_t n, std::size_t d, std::uint64_t seed, bool quantize = false);
LabelTable labels_for(const VectorTable& table);

// Publishes `table` as a single-model version.
VersionManifest publish_table(VectorStore& store, const VectorTable& table, ModelKind kind,
                              SysTime retrieved_at = parse_utc("2025-01-01T00:00:00Z"));

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace biokg::testing

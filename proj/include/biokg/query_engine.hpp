#pragma once

// Concept resolution, cosine similarity and exact top-k over one loaded
// (kg, version, model) vector table.

#include "biokg/vector_store.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

// Trims, collapses internal whitespace runs to one space and applies Unicode
// simple case folding. Input is UTF-8.
std::string normalize(std::string_view text);

// a.b / (|a| |b|) clamped to [-1, 1]. Throws ZeroVector, DimensionMismatch.
double cosine(std::span<const double> a, std::span<const double> b);

// http://purl.obolibrary.org/obo/ + iri with ':' replaced by '_'.
std::string obo_purl(std::string_view iri);

struct QueryRow {
    std::string iri;
    std::string label;
    double score = 0.0;
    std::string url;
};

struct QueryResult {
    std::string query;  // resolved iri
    std::vector<QueryRow> rows;
};

nlohmann::json to_json(const QueryRow& row);
nlohmann::json to_json(const QueryResult& result);

class ConceptIndex {
public:
    ConceptIndex(VectorTable vectors, const LabelTable& labels);

    const VectorTable& vectors() const noexcept { return vectors_; }
    std::size_t size() const noexcept { return vectors_.size(); }

    std::optional<std::size_t> row_of(std::string_view iri) const;
    std::span<const double> vector_of(std::string_view iri) const;  // throws NotFound
    std::string label_of(std::string_view iri) const;
    std::string namespace_of(std::string_view iri) const;

    // Exact iri (case-sensitive), then normalized label, then normalized
    // alt_id. Throws NotFound, AmbiguousLabelError.
    std::string resolve(std::string_view query) const;

    double similarity(std::string_view iri_a, std::string_view iri_b) const;

    // Exhaustive scan excluding the query; score descending, iri ascending.
    // Throws NotFound, ZeroVector, InvalidArgument (k == 0).
    QueryResult top_k(std::string_view iri, std::size_t k = 10,
                      std::optional<std::string_view> namespace_filter = std::nullopt) const;

private:
    VectorTable vectors_;
    std::vector<double> norms_;
    std::vector<std::string> labels_;      // by row
    std::vector<std::string> namespaces_;  // by row
    std::unordered_map<std::string, std::size_t> row_by_iri_;
    std::unordered_map<std::string, std::vector<std::string>> by_label_;
    std::unordered_map<std::string, std::vector<std::string>> by_alt_id_;
};

} // namespace biokg

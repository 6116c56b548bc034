#pragma once

// OBO 1.4 flat-file ingestion (the GO and HP release format).

#include "biokg/knowledge_graph.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

struct TermStanza {
    std::string id;
    std::string name;
    std::string ontology_namespace;
    std::vector<std::string> is_a;
    std::vector<std::pair<std::string, std::string>> relationships;  // (relation, target)
    bool is_obsolete = false;
    std::vector<std::string> alt_ids;
};

struct OntologyDocument {
    std::string ontology_id;
    std::string data_version;
    std::vector<TermStanza> terms;
    // Edges found on obsolete stanzas and discarded while parsing.
    std::size_t dropped_obsolete_edges = 0;
};

// Throws MalformedStanza (term without id, duplicate live id) and
// MalformedTagLine (a tag line without ':').
OntologyDocument parse_obo(std::string_view text);

struct IngestReport {
    std::size_t terms = 0;
    std::size_t obsolete = 0;
    std::size_t triples = 0;
    std::size_t dropped_edges = 0;
};

nlohmann::json to_json(const IngestReport& report);

struct IngestResult {
    KnowledgeGraph graph;
    IngestReport report;
};

// One entity per live term (obsolete terms become isolated nodes when
// `include_obsolete`), one triple per is_a / relationship line. Edges whose
// target is not an entity are dropped and counted.
IngestResult to_graph(const OntologyDocument& doc, bool include_obsolete = false);

} // namespace biokg

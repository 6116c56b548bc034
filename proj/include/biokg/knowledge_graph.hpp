#pragma once

// KnowledgeGraph: dense integer dictionaries for entities and relations, a
// deduplicated triple list and a CSR out-adjacency index. Immutable once
// built; shared read-only by the trainers, the walker and the exporters.

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace biokg {

struct EntityRecord {
    std::string iri;  // CURIE, e.g. GO:0008150
    std::string label;
    bool obsolete = false;
    std::string ontology_namespace;
    std::vector<std::string> alt_ids;
};

struct RelationRecord {
    std::string iri;  // e.g. is_a, part_of
};

struct Triple {
    std::uint32_t head = 0;
    std::uint32_t relation = 0;
    std::uint32_t tail = 0;

    friend bool operator==(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = t.head;
        h = h * 0x9e3779b97f4a7c15ULL ^ t.relation;
        h = h * 0x9e3779b97f4a7c15ULL ^ t.tail;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

// A triple by IRI, as read from a source file.
struct IriTriple {
    std::string head;
    std::string relation;
    std::string tail;
};

struct OutEdge {
    std::uint32_t relation = 0;
    std::uint32_t tail = 0;
};

// True when `iri` has the PREFIX:LOCALID shape (non-empty on both sides).
bool is_curie(std::string_view iri) noexcept;

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    // Indices follow first appearance in `entities` and `relations`.
    // Duplicate triples are collapsed. Throws UnknownIri, DuplicateEntity,
    // InvalidIri.
    static KnowledgeGraph build(std::vector<EntityRecord> entities,
                                std::vector<RelationRecord> relations,
                                std::span<const IriTriple> triples);

    std::size_t num_entities() const noexcept { return entities_.size(); }
    std::size_t num_relations() const noexcept { return relations_.size(); }
    std::size_t num_triples() const noexcept { return triples_.size(); }

    const std::vector<EntityRecord>& entities() const noexcept { return entities_; }
    const std::vector<RelationRecord>& relations() const noexcept { return relations_; }
    const std::vector<Triple>& triples() const noexcept { return triples_; }

    // Throws NotFound.
    const EntityRecord& entity(std::size_t index) const;
    const EntityRecord& entity(std::string_view iri) const;
    const RelationRecord& relation(std::size_t index) const;

    std::optional<std::uint32_t> entity_index(std::string_view iri) const;
    std::optional<std::uint32_t> relation_index(std::string_view iri) const;

    std::span<const OutEdge> out_edges(std::uint32_t entity) const;

    bool contains(const Triple& t) const;

private:
    std::vector<EntityRecord> entities_;
    std::vector<RelationRecord> relations_;
    std::vector<Triple> triples_;
    std::unordered_map<std::string, std::uint32_t> entity_by_iri_;
    std::unordered_map<std::string, std::uint32_t> relation_by_iri_;
    std::vector<std::uint32_t> adjacency_offsets_;
    std::vector<OutEdge> adjacency_;
};

// Reads `head<TAB>relation<TAB>tail` lines; blank and '#' lines are skipped.
// Entities and relations are registered in first-appearance order.
// Throws MalformedInput on lines without exactly three columns.
KnowledgeGraph read_triples_tsv(std::istream& in);

} // namespace biokg

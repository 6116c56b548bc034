#include "biokg/knowledge_graph.hpp"

#include "biokg/error.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

namespace biokg {

bool is_curie(std::string_view iri) noexcept {
    const auto colon = iri.find(':');
    return colon != std::string_view::npos && colon > 0 && colon + 1 < iri.size();
}

KnowledgeGraph KnowledgeGraph::build(std::vector<EntityRecord> entities,
                                     std::vector<RelationRecord> relations,
                                     std::span<const IriTriple> triples) {
    if (entities.size() >= std::numeric_limits<std::uint32_t>::max() ||
        relations.size() >= std::numeric_limits<std::uint32_t>::max())
        throw Error(ErrorCode::InvalidArgument, "graph too large for 32-bit indices");

    KnowledgeGraph g;
    g.entity_by_iri_.reserve(entities.size());
    for (auto& e : entities) {
        if (!is_curie(e.iri))
            throw Error(ErrorCode::InvalidIri, "entity IRI is not PREFIX:LOCALID: '" + e.iri + "'");
        const auto index = static_cast<std::uint32_t>(g.entities_.size());
        if (!g.entity_by_iri_.emplace(e.iri, index).second)
            throw Error(ErrorCode::DuplicateEntity, "duplicate entity " + e.iri);
        g.entities_.push_back(std::move(e));
    }
    for (auto& r : relations) {
        if (r.iri.empty())
            throw Error(ErrorCode::InvalidIri, "empty relation IRI");
        const auto index = static_cast<std::uint32_t>(g.relations_.size());
        if (!g.relation_by_iri_.emplace(r.iri, index).second)
            throw Error(ErrorCode::DuplicateEntity, "duplicate relation " + r.iri);
        g.relations_.push_back(std::move(r));
    }

    std::unordered_set<Triple, TripleHash> seen;
    seen.reserve(triples.size());
    g.triples_.reserve(triples.size());
    for (const auto& t : triples) {
        auto h = g.entity_index(t.head);
        auto r = g.relation_index(t.relation);
        auto tl = g.entity_index(t.tail);
        if (!h)
            throw Error(ErrorCode::UnknownIri, "triple head not listed: " + t.head);
        if (!r)
            throw Error(ErrorCode::UnknownIri, "triple relation not listed: " + t.relation);
        if (!tl)
            throw Error(ErrorCode::UnknownIri, "triple tail not listed: " + t.tail);
        const Triple triple{*h, *r, *tl};
        if (seen.insert(triple).second)
            g.triples_.push_back(triple);
    }

    // CSR grouped by head, stable in triple order.
    g.adjacency_offsets_.assign(g.entities_.size() + 1, 0);
    for (const auto& t : g.triples_)
        ++g.adjacency_offsets_[t.head + 1];
    for (std::size_t i = 1; i < g.adjacency_offsets_.size(); ++i)
        g.adjacency_offsets_[i] += g.adjacency_offsets_[i - 1];
    g.adjacency_.resize(g.triples_.size());
    std::vector<std::uint32_t> cursor(g.adjacency_offsets_.begin(), g.adjacency_offsets_.end() - 1);
    for (const auto& t : g.triples_)
        g.adjacency_[cursor[t.head]++] = OutEdge{t.relation, t.tail};
    return g;
}

const EntityRecord& KnowledgeGraph::entity(std::size_t index) const {
    if (index >= entities_.size())
        throw Error(ErrorCode::NotFound, "entity index " + std::to_string(index) + " out of range");
    return entities_[index];
}

const EntityRecord& KnowledgeGraph::entity(std::string_view iri) const {
    auto index = entity_index(iri);
    if (!index)
        throw Error(ErrorCode::NotFound, "entity not found: " + std::string(iri));
    return entities_[*index];
}

const RelationRecord& KnowledgeGraph::relation(std::size_t index) const {
    if (index >= relations_.size())
        throw Error(ErrorCode::NotFound, "relation index " + std::to_string(index) + " out of range");
    return relations_[index];
}

std::optional<std::uint32_t> KnowledgeGraph::entity_index(std::string_view iri) const {
    auto it = entity_by_iri_.find(std::string(iri));
    if (it == entity_by_iri_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::uint32_t> KnowledgeGraph::relation_index(std::string_view iri) const {
    auto it = relation_by_iri_.find(std::string(iri));
    if (it == relation_by_iri_.end())
        return std::nullopt;
    return it->second;
}

std::span<const OutEdge> KnowledgeGraph::out_edges(std::uint32_t entity) const {
    if (entity >= entities_.size())
        return {};
    const auto begin = adjacency_offsets_[entity];
    const auto end = adjacency_offsets_[entity + 1];
    return std::span<const OutEdge>(adjacency_).subspan(begin, end - begin);
}

bool KnowledgeGraph::contains(const Triple& t) const {
    for (const auto& e : out_edges(t.head))
        if (e.relation == t.relation && e.tail == t.tail)
            return true;
    return false;
}

KnowledgeGraph read_triples_tsv(std::istream& in) {
    std::vector<EntityRecord> entities;
    std::vector<RelationRecord> relations;
    std::vector<IriTriple> triples;
    std::unordered_set<std::string> seen_entities;
    std::unordered_set<std::string> seen_relations;

    auto add_entity = [&](const std::string& iri) {
        if (seen_entities.insert(iri).second)
            entities.push_back(EntityRecord{iri, {}, false, {}, {}});
    };

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos)
                break;
            start = tab + 1;
        }
        if (cols.size() != 3 || cols[0].empty() || cols[1].empty() || cols[2].empty())
            throw Error(ErrorCode::MalformedInput,
                        "line " + std::to_string(line_no) + ": expected head<TAB>relation<TAB>tail");
        add_entity(cols[0]);
        add_entity(cols[2]);
        if (seen_relations.insert(cols[1]).second)
            relations.push_back(RelationRecord{cols[1]});
        triples.push_back(IriTriple{std::move(cols[0]), std::move(cols[1]), std::move(cols[2])});
    }
    return KnowledgeGraph::build(std::move(entities), std::move(relations), triples);
}

} // namespace biokg

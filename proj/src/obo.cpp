#include "biokg/obo.hpp"

#include "biokg/error.hpp"

#include <unordered_map>
#include <unordered_set>

namespace biokg {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

// Drops a trailing "! comment" and any "{qualifier=...}" block.
std::string_view strip_annotations(std::string_view value) {
    const auto bang = value.find('!');
    if (bang != std::string_view::npos)
        value = value.substr(0, bang);
    const auto brace = value.find('{');
    if (brace != std::string_view::npos)
        value = value.substr(0, brace);
    return trim(value);
}

// First whitespace-delimited token.
std::string_view first_token(std::string_view value) {
    const auto end = value.find_first_of(" \t");
    return end == std::string_view::npos ? value : value.substr(0, end);
}

enum class Section { Header, Term, Other };

} // namespace

OntologyDocument parse_obo(std::string_view text) {
    OntologyDocument doc;
    Section section = Section::Header;
    TermStanza current;
    std::size_t line_no = 0;
    std::size_t stanza_line = 0;
    std::unordered_set<std::string> live_ids;

    auto finish_term = [&] {
        if (section != Section::Term)
            return;
        if (current.id.empty())
            throw Error(ErrorCode::MalformedStanza,
                        "[Term] stanza at line " + std::to_string(stanza_line) + " has no id");
        if (current.is_obsolete) {
            doc.dropped_obsolete_edges += current.is_a.size() + current.relationships.size();
            current.is_a.clear();
            current.relationships.clear();
        } else if (!live_ids.insert(current.id).second) {
            throw Error(ErrorCode::MalformedStanza, "duplicate term id " + current.id);
        }
        doc.terms.push_back(std::move(current));
        current = TermStanza{};
    };

    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        if (eol == std::string_view::npos)
            eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);

        const auto content = trim(line);
        if (content.empty() || content.front() == '!')
            continue;
        if (content.front() == '[') {
            finish_term();
            section = content == "[Term]" ? Section::Term : Section::Other;
            stanza_line = line_no;
            continue;
        }

        const auto colon = content.find(':');
        if (colon == std::string_view::npos)
            throw Error(ErrorCode::MalformedTagLine,
                        "line " + std::to_string(line_no) + ": tag line without ':'");
        const auto tag = trim(content.substr(0, colon));
        const auto value = trim(content.substr(colon + 1));

        if (section == Section::Header) {
            if (tag == "ontology")
                doc.ontology_id = std::string(strip_annotations(value));
            else if (tag == "data-version")
                doc.data_version = std::string(strip_annotations(value));
            continue;
        }
        if (section != Section::Term)
            continue;

        if (tag == "id") {
            current.id = std::string(first_token(strip_annotations(value)));
        } else if (tag == "name") {
            current.name = std::string(value);
        } else if (tag == "namespace") {
            current.ontology_namespace = std::string(strip_annotations(value));
        } else if (tag == "is_a") {
            const auto target = first_token(strip_annotations(value));
            if (!target.empty())
                current.is_a.emplace_back(target);
        } else if (tag == "relationship") {
            const auto body = strip_annotations(value);
            const auto rel = first_token(body);
            const auto target = first_token(trim(body.substr(rel.size())));
            if (rel.empty() || target.empty())
                throw Error(ErrorCode::MalformedTagLine,
                            "line " + std::to_string(line_no) + ": relationship needs REL TARGET");
            current.relationships.emplace_back(std::string(rel), std::string(target));
        } else if (tag == "is_obsolete") {
            current.is_obsolete = strip_annotations(value) == "true";
        } else if (tag == "alt_id") {
            const auto alt = first_token(strip_annotations(value));
            if (!alt.empty())
                current.alt_ids.emplace_back(alt);
        }
    }
    finish_term();
    return doc;
}

nlohmann::json to_json(const IngestReport& report) {
    return nlohmann::json{{"terms", report.terms},
                          {"obsolete", report.obsolete},
                          {"triples", report.triples},
                          {"dropped_edges", report.dropped_edges}};
}

IngestResult to_graph(const OntologyDocument& doc, bool include_obsolete) {
    IngestReport report;
    report.terms = doc.terms.size();

    std::vector<EntityRecord> entities;
    std::unordered_set<std::string> entity_ids;
    entities.reserve(doc.terms.size());
    for (const auto& term : doc.terms) {
        if (term.is_obsolete) {
            ++report.obsolete;
            if (!include_obsolete)
                continue;
        }
        // An obsolete stanza sharing a live id never shadows the live term.
        if (!entity_ids.insert(term.id).second)
            continue;
        entities.push_back(EntityRecord{term.id, term.name, term.is_obsolete,
                                        term.ontology_namespace, term.alt_ids});
    }

    std::vector<RelationRecord> relations{RelationRecord{"is_a"}};
    std::unordered_set<std::string> relation_names{"is_a"};
    std::vector<IriTriple> triples;
    for (const auto& term : doc.terms) {
        if (term.is_obsolete)
            continue;
        for (const auto& target : term.is_a) {
            if (!entity_ids.count(target)) {
                ++report.dropped_edges;
                continue;
            }
            triples.push_back(IriTriple{term.id, "is_a", target});
        }
        for (const auto& [rel, target] : term.relationships) {
            if (!entity_ids.count(target)) {
                ++report.dropped_edges;
                continue;
            }
            if (relation_names.insert(rel).second)
                relations.push_back(RelationRecord{rel});
            triples.push_back(IriTriple{term.id, rel, target});
        }
    }

    auto graph = KnowledgeGraph::build(std::move(entities), std::move(relations), triples);
    report.triples = graph.num_triples();
    return IngestResult{std::move(graph), report};
}

} // namespace biokg

#include "biokg/error.hpp"
#include "biokg/obo.hpp"

#include "test_support.hpp"

#include <doctest.h>

using namespace biokg;

namespace {

std::size_t count_terms(const std::string& text) {
    std::size_t n = 0;
    for (auto pos = text.find("[Term]"); pos != std::string::npos; pos = text.find("[Term]", pos + 1))
        ++n;
    return n;
}

ErrorCode parse_error(const std::string& text) {
    try {
        parse_obo(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

} // namespace

TEST_SUITE("obo") {

TEST_CASE("minimal stanza") {
    auto doc = parse_obo("[Term]\nid: HP:0000001\nname: All\n");
    REQUIRE(doc.terms.size() == 1);
    CHECK(doc.terms[0].id == "HP:0000001");
    CHECK(doc.terms[0].name == "All");
    CHECK(doc.terms[0].is_a.empty());
    CHECK(doc.terms[0].relationships.empty());
    CHECK_FALSE(doc.terms[0].is_obsolete);
}

TEST_CASE("is_a comments are stripped") {
    auto doc = parse_obo("[Term]\nid: GO:0009987\nis_a: GO:0008150 ! biological_process\n");
    REQUIRE(doc.terms[0].is_a.size() == 1);
    CHECK(doc.terms[0].is_a[0] == "GO:0008150");
}

TEST_CASE("qualifier blocks are stripped") {
    auto doc = parse_obo("[Term]\nid: GO:1\nis_a: GO:2 {source=\"x\"} ! two\n"
                         "relationship: part_of GO:3 {cardinality=1} ! three\n");
    CHECK(doc.terms[0].is_a == std::vector<std::string>{"GO:2"});
    REQUIRE(doc.terms[0].relationships.size() == 1);
    CHECK(doc.terms[0].relationships[0] == std::pair<std::string, std::string>{"part_of", "GO:3"});
}

TEST_CASE("obsolete stanzas carry no edges") {
    auto doc = parse_obo("[Term]\nid: GO:1\nis_obsolete: true\nis_a: GO:2\nrelationship: part_of GO:3\n");
    REQUIRE(doc.terms.size() == 1);
    CHECK(doc.terms[0].is_obsolete);
    CHECK(doc.terms[0].is_a.empty());
    CHECK(doc.terms[0].relationships.empty());
    CHECK(doc.dropped_obsolete_edges == 2);
}

TEST_CASE("header tags, alt ids and typedefs") {
    auto doc = parse_obo(testing::toy_obo());
    CHECK(doc.ontology_id == "go");
    CHECK(doc.data_version == "go/releases/2025-03-16");
    CHECK(doc.terms.size() == 8);
    CHECK(doc.terms[1].alt_ids == std::vector<std::string>{"GO:0008151"});
    CHECK(doc.terms[1].ontology_namespace == "biological_process");
    for (const auto& t : doc.terms)
        CHECK(t.id != "part_of");
}

TEST_CASE("malformed input") {
    CHECK(parse_error("[Term]\nname: no id\n") == ErrorCode::MalformedStanza);
    CHECK(parse_error("[Term]\nid: A:1\nthis line has no separator\n") == ErrorCode::MalformedTagLine);
    CHECK(parse_error("[Term]\nid: A:1\n\n[Term]\nid: A:1\n") == ErrorCode::MalformedStanza);
}

TEST_CASE("unknown tags and comment lines are ignored") {
    auto doc = parse_obo("! a comment\n[Term]\nid: A:1\nsynonym: \"x\" EXACT []\nxref: Y:1\ndef: \"d\" []\n");
    REQUIRE(doc.terms.size() == 1);
    CHECK(doc.terms[0].id == "A:1");
}

TEST_CASE("three terms with is_a and part_of") {
    auto doc = parse_obo("[Term]\nid: A:1\nis_a: A:2\n\n[Term]\nid: A:2\nrelationship: part_of A:3\n\n"
                         "[Term]\nid: A:3\n");
    auto result = to_graph(doc);
    CHECK(result.graph.num_entities() == 3);
    CHECK(result.graph.num_relations() == 2);
    CHECK(result.graph.num_triples() == 2);
    CHECK(result.report.terms == 3);
    CHECK(result.report.triples == 2);
    CHECK(result.report.dropped_edges == 0);
}

TEST_CASE("obsolete terms are excluded unless requested") {
    const auto doc = parse_obo(testing::toy_obo());
    auto live = to_graph(doc);
    CHECK(live.graph.num_entities() == 7);
    CHECK_FALSE(live.graph.entity_index("GO:0000001"));
    CHECK(live.report.obsolete == 1);

    auto all = to_graph(doc, true);
    CHECK(all.graph.num_entities() == 8);
    const auto idx = all.graph.entity_index("GO:0000001");
    REQUIRE(idx);
    CHECK(all.graph.entity(*idx).obsolete);
    CHECK(all.graph.out_edges(*idx).empty());
}

TEST_CASE("edges to missing ids are dropped and counted") {
    auto doc = parse_obo("[Term]\nid: A:1\nis_a: A:9\n\n[Term]\nid: A:2\nis_a: A:1\n");
    auto result = to_graph(doc);
    CHECK(result.graph.num_triples() == 1);
    CHECK(result.report.dropped_edges == 1);
    CHECK(to_json(result.report) ==
          nlohmann::json{{"terms", 2}, {"obsolete", 0}, {"triples", 1}, {"dropped_edges", 1}});
}

TEST_CASE("is_a-only input yields a single relation") {
    auto result = to_graph(parse_obo(testing::tree_obo(2, 3)));
    CHECK(result.graph.num_relations() == 1);
    CHECK(result.graph.relation(0).iri == "is_a");
    CHECK(result.graph.num_entities() == 13);
    CHECK(result.graph.num_triples() == 12);
}

TEST_CASE("term count round-trips and parsing is deterministic") {
    for (const auto& text : {testing::toy_obo(), testing::tree_obo(), testing::tree_obo(2, 5)}) {
        const auto a = parse_obo(text), b = parse_obo(text);
        CHECK(a.terms.size() == count_terms(text));
        REQUIRE(a.terms.size() == b.terms.size());
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            CHECK(a.terms[i].id == b.terms[i].id);
            CHECK(a.terms[i].is_a == b.terms[i].is_a);
        }
    }
}

TEST_CASE("labels, namespaces and alt ids reach the graph") {
    auto g = to_graph(parse_obo(testing::toy_obo())).graph;
    const auto& e = g.entity("GO:0009987");
    CHECK(e.label == "cellular process");
    CHECK(e.ontology_namespace == "biological_process");
    CHECK(e.alt_ids == std::vector<std::string>{"GO:0008151"});
    CHECK(g.relation_index("part_of"));
}

}

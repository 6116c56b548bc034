#include "biokg/error.hpp"
#include "biokg/knowledge_graph.hpp"

#include <sstream>

#include <doctest.h>

using namespace biokg;

namespace {

std::vector<EntityRecord> ents(std::initializer_list<const char*> iris) {
    std::vector<EntityRecord> out;
    for (auto* i : iris)
        out.push_back(EntityRecord{i, {}, false, {}, {}});
    return out;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Internal;
}

} // namespace

TEST_SUITE("knowledge_graph") {

TEST_CASE("is_curie") {
    CHECK(is_curie("GO:0008150"));
    CHECK(is_curie("HP:0000118"));
    CHECK_FALSE(is_curie("GO0008150"));
    CHECK_FALSE(is_curie(":0008150"));
    CHECK_FALSE(is_curie("GO:"));
}

TEST_CASE("build assigns dense indices in first-appearance order") {
    std::vector<IriTriple> triples{{"A:2", "is_a", "A:1"}, {"A:3", "is_a", "A:1"}, {"A:2", "is_a", "A:1"}};
    auto g = KnowledgeGraph::build(ents({"A:1", "A:2", "A:3"}), {{"is_a"}}, triples);
    CHECK(g.num_entities() == 3);
    CHECK(g.num_relations() == 1);
    CHECK(g.num_triples() == 2);
    CHECK(*g.entity_index("A:3") == 2);
    CHECK(g.entity(1).iri == "A:2");
    CHECK(g.entity("A:1").iri == "A:1");
    CHECK(g.contains({1, 0, 0}));
    CHECK_FALSE(g.contains({0, 0, 1}));
    CHECK(g.out_edges(0).empty());
    REQUIRE(g.out_edges(1).size() == 1);
    CHECK(g.out_edges(1)[0].tail == 0);
}

TEST_CASE("index bijection holds for every entity and relation") {
    std::vector<EntityRecord> e;
    std::vector<IriTriple> t;
    for (int i = 0; i < 200; ++i) {
        e.push_back({"X:" + std::to_string(i), {}, false, {}, {}});
        if (i)
            t.push_back({"X:" + std::to_string(i), i % 3 ? "is_a" : "part_of", "X:" + std::to_string(i / 2)});
    }
    auto g = KnowledgeGraph::build(e, {{"is_a"}, {"part_of"}}, t);
    for (std::uint32_t i = 0; i < g.num_entities(); ++i)
        CHECK(*g.entity_index(g.entity(i).iri) == i);
    for (std::uint32_t r = 0; r < g.num_relations(); ++r)
        CHECK(*g.relation_index(g.relation(r).iri) == r);
    std::size_t edges = 0;
    for (std::uint32_t i = 0; i < g.num_entities(); ++i)
        for (const auto& oe : g.out_edges(i)) {
            CHECK(g.contains({i, oe.relation, oe.tail}));
            ++edges;
        }
    CHECK(edges == g.num_triples());
}

TEST_CASE("build rejects bad input") {
    std::vector<IriTriple> none;
    CHECK(code_of([&] { KnowledgeGraph::build(ents({"A:1", "A:1"}), {{"is_a"}}, none); }) ==
          ErrorCode::DuplicateEntity);
    CHECK(code_of([&] { KnowledgeGraph::build(ents({"bad"}), {{"is_a"}}, none); }) == ErrorCode::InvalidIri);
    std::vector<IriTriple> dangling{{"A:1", "is_a", "A:9"}};
    CHECK(code_of([&] { KnowledgeGraph::build(ents({"A:1"}), {{"is_a"}}, dangling); }) == ErrorCode::UnknownIri);
    std::vector<IriTriple> badrel{{"A:1", "part_of", "A:1"}};
    CHECK(code_of([&] { KnowledgeGraph::build(ents({"A:1"}), {{"is_a"}}, badrel); }) == ErrorCode::UnknownIri);
}

TEST_CASE("lookups of unknown items") {
    auto g = KnowledgeGraph::build(ents({"A:1"}), {{"is_a"}}, {});
    CHECK_FALSE(g.entity_index("A:2"));
    CHECK(code_of([&] { (void)g.entity("A:2"); }) == ErrorCode::NotFound);
    CHECK(code_of([&] { (void)g.entity(5); }) == ErrorCode::NotFound);
}

TEST_CASE("triple tsv reader") {
    std::istringstream in("# comment\nA:1\tis_a\tA:2\n\nA:3\tpart_of\tA:1\nA:1\tis_a\tA:2\n");
    auto g = read_triples_tsv(in);
    CHECK(g.num_entities() == 3);
    CHECK(g.num_relations() == 2);
    CHECK(g.num_triples() == 2);
    CHECK(g.entity(0).iri == "A:1");
    CHECK(g.relation(1).iri == "part_of");

    std::istringstream bad("A:1\tis_a\n");
    CHECK(code_of([&] { read_triples_tsv(bad); }) == ErrorCode::MalformedInput);
}

}

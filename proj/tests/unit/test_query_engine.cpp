#include "biokg/error.hpp"
#include "biokg/query_engine.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace biokg;

namespace {

ConceptIndex hp_index() {
    VectorTable t;
    t.kg = "hp";
    t.version = "v1";
    t.model = "TransE";
    t.dimension = 2;
    t.iris = {"HP:0000001", "HP:0000118", "HP:0000152", "HP:0000153", "HP:0000707"};
    t.values = {1, 0, 0.9, 0.1, 0, 1, 0, 1, -1, 0};
    LabelTable labels{{"HP:0000001", {"All", "", {"HP:0009999"}}},
                      {"HP:0000118", {"Phenotypic abnormality", "", {}}},
                      {"HP:0000152", {"Abnormality of head", "", {}}},
                      {"HP:0000153", {"abnormality  of HEAD", "", {}}},
                      {"HP:0000707", {"Abnormality of the nervous system", "", {}}}};
    return ConceptIndex(t, labels);
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

TEST_SUITE("query_engine") {

TEST_CASE("normalize") {
    CHECK(normalize("  Biological   Process ") == "biological process");
    CHECK(normalize("GO:0008150") == "go:0008150");
    CHECK(normalize("") == "");
    CHECK(normalize("\tA\n\nB  ") == "a b");
    CHECK(normalize("ÄRGER") == "ärger");
    CHECK(normalize("Ω Cell") == "ω cell");
}

TEST_CASE("resolve order") {
    const auto idx = hp_index();
    CHECK(idx.resolve("HP:0000001") == "HP:0000001");
    CHECK(idx.resolve(" all ") == "HP:0000001");
    CHECK(idx.resolve("PHENOTYPIC abnormality") == "HP:0000118");
    CHECK(idx.resolve("hp:0009999") == "HP:0000001");
    CHECK(code_of([&] { idx.resolve("nothing like this"); }) == ErrorCode::NotFound);
    try {
        idx.resolve("Abnormality of head");
        FAIL("expected ambiguity");
    } catch (const AmbiguousLabelError& e) {
        CHECK(e.candidates() == std::vector<std::string>{"HP:0000152", "HP:0000153"});
    }
}

TEST_CASE("cosine examples") {
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
    CHECK(cosine(std::vector<double>{1, 2}, std::vector<double>{2, 4}) == doctest::Approx(1.0));
    CHECK(cosine(std::vector<double>{1, 0}, std::vector<double>{-1, 0}) == -1.0);
    CHECK(code_of([] { cosine(std::vector<double>{0, 0}, std::vector<double>{1, 0}); }) == ErrorCode::ZeroVector);
    CHECK(code_of([] { cosine(std::vector<double>{1}, std::vector<double>{1, 0}); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("cosine properties") {
    Rng rng(3);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + uniform_index(rng, 32);
        std::vector<double> a(d), b(d), sa(d);
        const double alpha = uniform_real(rng, 0.01, 100);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = uniform_real(rng, -1, 1);
            b[i] = uniform_real(rng, -1, 1);
            sa[i] = alpha * a[i];
        }
        const double ab = cosine(a, b);
        CHECK(ab == cosine(b, a));
        CHECK(ab >= -1.0);
        CHECK(ab <= 1.0);
        CHECK(std::abs(cosine(sa, b) - ab) <= 1e-12);
        CHECK(cosine(a, std::vector<double>(a)) == 1.0);
    }
}

TEST_CASE("top k on a small index") {
    const auto idx = hp_index();
    const auto r = idx.top_k("HP:0000001", 10);
    CHECK(r.query == "HP:0000001");
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].iri == "HP:0000118");
    // HP:0000152 and HP:0000153 tie at 0; iri ascending.
    CHECK(r.rows[1].iri == "HP:0000152");
    CHECK(r.rows[2].iri == "HP:0000153");
    CHECK(r.rows[3].iri == "HP:0000707");
    CHECK(r.rows[3].score == -1.0);
    CHECK(r.rows[0].url == "http://purl.obolibrary.org/obo/HP_0000118");
    CHECK(r.rows[0].label == "Phenotypic abnormality");
    CHECK(idx.top_k("HP:0000001", 2).rows.size() == 2);
    CHECK(code_of([&] { idx.top_k("HP:0000001", 0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { idx.top_k("HP:1234567", 3); }) == ErrorCode::NotFound);
    CHECK(obo_purl("GO:0008150") == "http://purl.obolibrary.org/obo/GO_0008150");
}

TEST_CASE("top k equals the brute-force oracle on random stores") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        const std::size_t n = 2 + uniform_index(rng, 999);
        const std::size_t d = 1 + uniform_index(rng, 16);
        const bool quantize = seed % 2 == 0;
        const auto table = testing::random_table(n, d, seed, quantize);
        const ConceptIndex idx(table, testing::labels_for(table));
        const auto& q = table.iris[uniform_index(rng, n)];
        const std::size_t k = 1 + uniform_index(rng, 20);
        const auto got = idx.top_k(q, k);
        const auto want = testing::brute_force_top_k(table, q, k);
        REQUIRE(got.rows.size() == want.size());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.rows[i].iri == want[i].iri);
            CHECK(got.rows[i].score == want[i].score);
            CHECK(got.rows[i].iri != q);
        }
    }
}

TEST_CASE("k beyond the store size returns everyone else") {
    const auto table = testing::random_table(7, 3, 1);
    const ConceptIndex idx(table, testing::labels_for(table));
    CHECK(idx.top_k("FX:0000000", 50).rows.size() == 6);
}

TEST_CASE("namespace filter") {
    const auto table = testing::random_table(20, 3, 1);
    const ConceptIndex idx(table, testing::labels_for(table));
    const auto r = idx.top_k("FX:0000000", 50, "odd");
    CHECK(r.rows.size() == 10);
    for (const auto& row : r.rows)
        CHECK(idx.namespace_of(row.iri) == "odd");
}

TEST_CASE("zero vectors are errors") {
    auto table = testing::random_table(4, 2, 1);
    table.values[2] = table.values[3] = 0.0;
    const ConceptIndex idx(table, {});
    CHECK(code_of([&] { idx.similarity("FX:0000000", "FX:0000001"); }) == ErrorCode::ZeroVector);
    CHECK(code_of([&] { idx.top_k("FX:0000001", 3); }) == ErrorCode::ZeroVector);
    CHECK(code_of([&] { idx.top_k("FX:0000000", 3); }) == ErrorCode::ZeroVector);
}

TEST_CASE("similarity equals the oracle") {
    const auto table = testing::random_table(50, 8, 4);
    const ConceptIndex idx(table, {});
    for (std::size_t i = 0; i < 50; ++i)
        for (std::size_t j = 0; j < 50; ++j)
            REQUIRE(idx.similarity(table.iris[i], table.iris[j]) ==
                    testing::cosine_oracle(table.row(i), table.row(j)));
    CHECK(idx.similarity("FX:0000003", "FX:0000003") == 1.0);
}

TEST_CASE("query result json") {
    QueryResult r{"A:1", {{"A:2", "two", 0.5, obo_purl("A:2")}}};
    CHECK(to_json(r) == nlohmann::json::parse(
                            R"({"query":"A:1","rows":[{"iri":"A:2","label":"two","score":0.5,
                                "url":"http://purl.obolibrary.org/obo/A_2"}]})"));
}

}

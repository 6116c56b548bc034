#include "biokg/error.hpp"
#include "biokg/models.hpp"
#include "biokg/random.hpp"

#include "oracles.hpp"

#include <cmath>

#include <doctest.h>

using namespace biokg;
using testing::correlation_dft;
using testing::correlation_direct;

namespace {

// Two entities (h=0, t=1) and one relation with the given vectors.
ModelArtifact simple(ModelKind kind, std::vector<double> h, std::vector<double> r, std::vector<double> t,
                     Norm norm = Norm::L2) {
    auto a = ModelArtifact::zeros({kind, h.size(), norm}, 2, 1);
    std::copy(h.begin(), h.end(), a.table(ParamSlot::Entity).row(0).begin());
    std::copy(t.begin(), t.end(), a.table(ParamSlot::Entity).row(1).begin());
    std::copy(r.begin(), r.end(), a.table(ParamSlot::Relation).row(0).begin());
    return a;
}

double inv_softplus(double y) { return std::log(std::expm1(y)); }

ModelArtifact random_artifact(ModelKind kind, std::size_t d, std::uint64_t seed, std::size_t entities = 4) {
    Rng rng(seed);
    auto a = ModelArtifact::zeros({kind, d, Norm::L2}, entities, 2);
    for (auto& t : a.tables)
        for (auto& x : t.data)
            x = uniform_real(rng, -1.0, 1.0);
    return a;
}

} // namespace

TEST_SUITE("models") {

TEST_CASE("model kind names") {
    CHECK(to_string(ModelKind::TransE) == "TransE");
    CHECK(to_string(ModelKind::RDF2Vec) == "RDF2Vec");
    CHECK(*parse_model_kind("distmult") == ModelKind::DistMult);
    CHECK(*parse_model_kind("HolE") == ModelKind::HolE);
    CHECK_FALSE(parse_model_kind("ComplEx"));
    CHECK(kAllModelKinds.size() == 6);
    CHECK(kScoringModelKinds.size() == 5);
}

TEST_CASE("transe examples") {
    CHECK(score_transe(simple(ModelKind::TransE, {1, 0}, {1, 1}, {2, 1}), 0, 0, 1) == 0.0);
    CHECK(score_transe(simple(ModelKind::TransE, {0, 0}, {0, 0}, {3, 4}), 0, 0, 1) == doctest::Approx(-5.0));
    CHECK(score_transe(simple(ModelKind::TransE, {0, 0}, {1, -2}, {0, 0}, Norm::L1), 0, 0, 1) == -3.0);
}

TEST_CASE("transr examples") {
    auto a = simple(ModelKind::TransR, {0.3, -1.2}, {0.5, 2.0}, {1.1, 0.4});
    auto& m = a.table(ParamSlot::Projection);
    m.data = {1, 0, 0, 1};
    auto e = simple(ModelKind::TransE, {0.3, -1.2}, {0.5, 2.0}, {1.1, 0.4});
    CHECK(score_transr(a, 0, 0, 1) == doctest::Approx(score_transe(e, 0, 0, 1)).epsilon(1e-15));

    m.data = {0, 0, 0, 0};
    a.table(ParamSlot::Relation).data = {3, 4};
    CHECK(score_transr(a, 0, 0, 1) == doctest::Approx(-5.0));

    auto s = simple(ModelKind::TransR, {1, 0}, {0, 0}, {0, 1});
    s.table(ParamSlot::Projection).data = {0, 1, 1, 0};
    CHECK(score_transr(s, 0, 0, 1) == doctest::Approx(-std::sqrt(2.0)));
}

TEST_CASE("distmult examples") {
    CHECK(score_distmult(simple(ModelKind::DistMult, {1, 2}, {0.5, 1}, {2, 1}), 0, 0, 1) == 3.0);
    CHECK(score_distmult(simple(ModelKind::DistMult, {1, 2}, {0, 0}, {2, 1}), 0, 0, 1) == 0.0);
}

TEST_CASE("hole examples") {
    CHECK(score_hole(simple(ModelKind::HolE, {2}, {1}, {3}), 0, 0, 1) == 6.0);
    CHECK(circular_correlation(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == std::vector<double>{11, 10});
    CHECK(score_hole(simple(ModelKind::HolE, {1, 2}, {1, 1}, {3, 4}), 0, 0, 1) == 21.0);
    CHECK(score_hole(simple(ModelKind::HolE, {1, 2}, {0, 0}, {3, 4}), 0, 0, 1) == 0.0);
}

TEST_CASE("boxe examples") {
    auto a = ModelArtifact::zeros({ModelKind::BoxE, 2, Norm::L2}, 2, 1);
    a.table(ParamSlot::Entity).data = {0.3, -0.7, 1.5, 2.0};
    a.table(ParamSlot::HeadCenter).data = {0.3, -0.7};
    a.table(ParamSlot::TailCenter).data = {1.5, 2.0};
    CHECK(score_boxe(a, 0, 0, 1) == 0.0);

    const double hw = 0.5;
    CHECK(boxe_distance(0.75, 0.5, hw) == doctest::Approx(0.125));
    CHECK(boxe_distance(2.0, 0.5, hw) == doctest::Approx(2.25));

    // Same box through the raw parameterization.
    auto b = ModelArtifact::zeros({ModelKind::BoxE, 1, Norm::L2}, 2, 1);
    b.table(ParamSlot::Entity).data = {0.75, 0.5};
    b.table(ParamSlot::HeadCenter).data = {0.5};
    b.table(ParamSlot::HeadWidth).data = {inv_softplus(0.5)};
    b.table(ParamSlot::TailCenter).data = {0.5};
    b.table(ParamSlot::TailWidth).data = {inv_softplus(0.5)};
    CHECK(score_boxe(b, 0, 0, 1) == doctest::Approx(-0.125));
    b.table(ParamSlot::Entity).data = {2.0, 0.5};
    CHECK(score_boxe(b, 0, 0, 1) == doctest::Approx(-2.25));
    // The tail's bump pulls the head point back to the box center.
    b.table(ParamSlot::Bump).data = {0.0, -1.5};
    CHECK(score_boxe(b, 0, 0, 1) == 0.0);
    b.table(ParamSlot::Bump).data = {1.5, 0.0};
    CHECK(score_boxe(b, 0, 0, 1) == doctest::Approx(-(2.25 + 2.25)));
}

TEST_CASE("score dispatch refuses rdf2vec") {
    auto a = ModelArtifact::zeros({ModelKind::RDF2Vec, 2, Norm::L2}, 2, 1);
    CHECK_THROWS_AS(score(a, 0, 0, 1), Error);
}

TEST_CASE("closed-form gradients") {
    auto a = simple(ModelKind::TransE, {1, 2}, {0.5, -1}, {0, 0});
    auto g = score_gradient(a, 0, 0, 1);
    const double n = std::sqrt(1.5 * 1.5 + 1.0);
    bool saw_head = false;
    for (const auto& b : g.blocks())
        if (b.slot == ParamSlot::Entity && b.row == 0) {
            saw_head = true;
            CHECK(g.values(b)[0] == doctest::Approx(-1.5 / n));
            CHECK(g.values(b)[1] == doctest::Approx(-1.0 / n));
        }
    CHECK(saw_head);

    auto dm = simple(ModelKind::DistMult, {1, 2}, {0.5, 1}, {2, 3});
    auto gd = score_gradient(dm, 0, 0, 1);
    for (const auto& b : gd.blocks())
        if (b.slot == ParamSlot::Relation) {
            CHECK(gd.values(b)[0] == 2.0);
            CHECK(gd.values(b)[1] == 6.0);
        }
}

TEST_CASE("transe zero residual has a zero subgradient") {
    auto a = simple(ModelKind::TransE, {1, 0}, {1, 1}, {2, 1});
    auto g = score_gradient(a, 0, 0, 1);
    for (const auto& b : g.blocks())
        for (double v : g.values(b))
            CHECK(v == 0.0);
}

TEST_CASE("analytic gradients match finite differences") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        CAPTURE(seed);
        CHECK(testing::score_gradient_error(ModelKind::TransE, Norm::L1, seed) < 1e-4);
        CHECK(testing::score_gradient_error(ModelKind::TransE, Norm::L2, seed) < 1e-4);
        CHECK(testing::score_gradient_error(ModelKind::TransR, Norm::L2, seed) < 1e-4);
        CHECK(testing::score_gradient_error(ModelKind::DistMult, Norm::L2, seed) < 1e-4);
        CHECK(testing::score_gradient_error(ModelKind::HolE, Norm::L2, seed) < 1e-4);
        CHECK(testing::score_gradient_error(ModelKind::BoxE, Norm::L2, seed) < 1e-4);
    }
}

TEST_CASE("circular correlation matches both oracles") {
    Rng rng(5);
    for (std::size_t d = 1; d <= 16; ++d)
        for (int pair = 0; pair < 20; ++pair) {
            std::vector<double> a(d), b(d);
            for (auto& x : a)
                x = uniform_real(rng, -3, 3);
            for (auto& x : b)
                x = uniform_real(rng, -3, 3);
            const auto got = circular_correlation(a, b);
            const auto direct = correlation_direct(a, b);
            const auto spectral = correlation_dft(a, b);
            for (std::size_t k = 0; k < d; ++k) {
                CHECK(std::abs(got[k] - direct[k]) <= 1e-9);
                CHECK(std::abs(got[k] - spectral[k]) <= 1e-9);
            }
        }
}

TEST_CASE("circular correlation is bilinear") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + uniform_index(rng, 16);
        std::vector<double> a(d), b(d), sa(d);
        const double alpha = uniform_real(rng, -2, 2);
        for (std::size_t i = 0; i < d; ++i) {
            a[i] = uniform_real(rng, -1, 1);
            b[i] = uniform_real(rng, -1, 1);
            sa[i] = alpha * a[i];
        }
        const auto lhs = circular_correlation(sa, b), rhs = circular_correlation(a, b);
        for (std::size_t k = 0; k < d; ++k)
            CHECK(std::abs(lhs[k] - alpha * rhs[k]) <= 1e-12);
    }
}

TEST_CASE("boxe distance is continuous at the box boundary") {
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double c = uniform_real(rng, -5, 5);
        const double hw = softplus(uniform_real(rng, -6, 6));
        for (double u : {c + hw, c - hw})
            CHECK(std::abs(boxe_inside_distance(u, c, hw) - boxe_outside_distance(u, c, hw)) <= 1e-9);
    }
}

TEST_CASE("boxe distance grows outside the box") {
    CHECK(boxe_distance(0.5, 0.5, 0.5) == 0.0);
    CHECK(boxe_distance(1.5, 0.5, 0.5) > boxe_distance(1.0, 0.5, 0.5));
    CHECK(boxe_distance(-1.5, 0.5, 0.5) == doctest::Approx(boxe_distance(2.5, 0.5, 0.5)));
}

TEST_CASE("transe is translation invariant") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        auto a = random_artifact(ModelKind::TransE, 8, 100 + static_cast<std::uint64_t>(trial));
        const double before = score_transe(a, 0, 0, 1);
        for (std::size_t j = 0; j < 8; ++j) {
            const double c = uniform_real(rng, -0.5, 0.5);
            a.table(ParamSlot::Entity).row(0)[j] += c;
            a.table(ParamSlot::Entity).row(1)[j] += c;
        }
        CHECK(score_transe(a, 0, 0, 1) == doctest::Approx(before).epsilon(1e-12));
    }
}

TEST_CASE("distmult is symmetric") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto a = random_artifact(ModelKind::DistMult, 8, seed);
        CHECK(score_distmult(a, 0, 1, 2) == doctest::Approx(score_distmult(a, 2, 1, 0)).epsilon(1e-15));
    }
}

TEST_CASE("distance-based scores are never positive") {
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        for (auto kind : {ModelKind::TransE, ModelKind::TransR, ModelKind::BoxE}) {
            auto a = random_artifact(kind, 6, seed);
            CHECK(score(a, 0, 0, 1) <= 0.0);
            CHECK(score(a, 2, 1, 2) <= 0.0);
        }
}

TEST_CASE("artifact shapes per kind") {
    auto r = ModelArtifact::zeros({ModelKind::TransR, 3, Norm::L2}, 5, 2);
    CHECK(r.table(ParamSlot::Projection).rows == 2);
    CHECK(r.table(ParamSlot::Projection).cols == 9);
    auto b = ModelArtifact::zeros({ModelKind::BoxE, 3, Norm::L2}, 5, 2);
    CHECK(b.table(ParamSlot::Bump).rows == 5);
    CHECK(b.table(ParamSlot::Relation).empty());
    CHECK(b.table(ParamSlot::TailWidth).rows == 2);
    CHECK(b.all_finite());
    b.table(ParamSlot::Bump).data[0] = std::nan("");
    CHECK_FALSE(b.all_finite());
    CHECK_THROWS_AS(ModelArtifact::zeros({ModelKind::TransE, 0, Norm::L2}, 1, 1), Error);
}

}

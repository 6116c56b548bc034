#include "biokg/error.hpp"
#include "biokg/obo.hpp"
#include "biokg/trainer.hpp"

#include "test_support.hpp"

#include <cmath>

#include <doctest.h>

using namespace biokg;

namespace {

KnowledgeGraph graph_of(std::vector<std::string> iris, std::vector<IriTriple> triples) {
    std::vector<EntityRecord> e;
    for (auto& i : iris)
        e.push_back({i, {}, false, {}, {}});
    return KnowledgeGraph::build(e, {{"is_a"}}, triples);
}

KnowledgeGraph chain(std::size_t n) {
    std::vector<std::string> iris;
    std::vector<IriTriple> triples;
    for (std::size_t i = 0; i < n; ++i) {
        iris.push_back("C:" + std::to_string(i));
        if (i)
            triples.push_back({iris[i], "is_a", iris[i - 1]});
    }
    return graph_of(iris, triples);
}

TrainConfig small(ModelKind kind) {
    TrainConfig c;
    c.kind = kind;
    c.dimension = 16;
    c.epochs = 100;
    c.batch_size = 16;
    c.learning_rate = 0.01;
    return c;
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

TEST_SUITE("trainer") {

TEST_CASE("margin loss") {
    CHECK(margin_loss(0, -5, 1) == 0.0);
    CHECK(margin_loss(-2, -2, 1) == 1.0);
    CHECK(margin_loss(-3, -1, 1) == 3.0);
}

TEST_CASE("single adam step matches hand computation") {
    // f(x) = 0.5 x^2, gradient x.
    std::vector<double> x{2.0, -0.5}, m{0, 0}, v{0, 0};
    std::vector<double> g = x;
    adam_update(x, g, m, v, 1, 0.1, AdamParams{});
    CHECK(std::abs(x[0] - (2.0 - 0.1 * 2.0 / (2.0 + 1e-8))) <= 1e-12);
    CHECK(std::abs(x[1] - (-0.5 + 0.1 * 0.5 / (0.5 + 1e-8))) <= 1e-12);
    CHECK(std::abs(m[0] - 0.2) <= 1e-12);
    CHECK(std::abs(v[0] - 0.004) <= 1e-12);

    // Second step with the new gradient.
    g = x;
    const double m2 = 0.9 * 0.2 + 0.1 * g[0];
    const double v2 = 0.999 * 0.004 + 0.001 * g[0] * g[0];
    const double expect = x[0] - 0.1 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
    adam_update(x, g, m, v, 2, 0.1, AdamParams{});
    CHECK(std::abs(x[0] - expect) <= 1e-12);
}

TEST_CASE("sgd step") {
    std::vector<double> x{1.0, 2.0};
    std::vector<double> g{0.5, -1.0};
    sgd_update(x, g, 0.1);
    CHECK(x[0] == doctest::Approx(0.95));
    CHECK(x[1] == doctest::Approx(2.1));
}

TEST_CASE("init params") {
    auto g = chain(5);
    TrainConfig c;
    c.kind = ModelKind::TransR;
    c.dimension = 200;
    Rng r1(3), r2(3);
    auto a = init_params(g, c, r1);
    auto b = init_params(g, c, r2);
    CHECK(a.tables == b.tables);
    CHECK(a.table(ParamSlot::Entity).cols == 200);
    const double bound = 6.0 / std::sqrt(200.0);
    for (double x : a.table(ParamSlot::Entity).data)
        CHECK(std::abs(x) <= bound);
    const auto& m = a.table(ParamSlot::Projection);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 200; ++j)
            REQUIRE(m.row(0)[i * 200 + j] == (i == j ? 1.0 : 0.0));

    c.kind = ModelKind::BoxE;
    Rng r3(3);
    auto box = init_params(g, c, r3);
    for (double s : box.table(ParamSlot::HeadWidth).data)
        REQUIRE(s == 0.0);
    CHECK(softplus(0.0) == doctest::Approx(0.693147).epsilon(1e-6));

    auto empty = graph_of({"A:1", "A:2"}, {});
    Rng r4(1);
    CHECK(code_of([&] { init_params(empty, c, r4); }) == ErrorCode::EmptyGraph);
}

TEST_CASE("negative sampling") {
    auto two = graph_of({"A:1", "A:2"}, {{"A:1", "is_a", "A:1"}});
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto n = negative_sample({0, 0, 0}, two, rng);
        const bool head = n.head == 1 && n.tail == 0;
        const bool tail = n.head == 0 && n.tail == 1;
        CHECK((head || tail));
    }

    auto three = graph_of({"A:1", "A:2", "A:3"}, {{"A:1", "is_a", "A:2"}});
    std::size_t head_corruptions = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        const Triple t{0, 0, 1};
        const auto n = negative_sample(t, three, rng);
        CHECK(!(n == t));
        if (n.head != t.head)
            ++head_corruptions;
    }
    CHECK(std::abs(static_cast<double>(head_corruptions) / draws - 0.5) <= 0.03);

    auto one = graph_of({"A:1"}, {{"A:1", "is_a", "A:1"}});
    CHECK(code_of([&] { negative_sample({0, 0, 0}, one, rng); }) == ErrorCode::SingleEntityGraph);
}

TEST_CASE("config validation and overrides") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.epochs = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.margin = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.learning_rate = -1;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    apply_overrides(c, {{"epochs", 7}, {"learning_rate", 0.5}, {"optimizer", "sgd"}, {"transe_norm", "L1"}});
    CHECK(c.epochs == 7);
    CHECK(c.learning_rate == 0.5);
    CHECK(c.optimizer == OptimizerKind::SGD);
    CHECK(c.transe_norm == Norm::L1);
    CHECK_THROWS_AS(apply_overrides(c, {{"no_such_key", 1}}), Error);
    CHECK(to_json(TrainConfig{})["epochs"] == 100);
    CHECK(to_json(TrainConfig{})["dimension"] == 200);
    CHECK(TrainConfig{}.effective_norm_constraint());
    TrainConfig dm;
    dm.kind = ModelKind::DistMult;
    CHECK_FALSE(dm.effective_norm_constraint());
}

TEST_CASE("every model reduces loss on a chain and is deterministic") {
    auto g = chain(12);
    for (auto kind : kScoringModelKinds) {
        CAPTURE(to_string(kind));
        auto cfg = small(kind);
        auto a = train(g, cfg);
        auto b = train(g, cfg);
        REQUIRE(a.report.epoch_losses.size() == cfg.epochs);
        CHECK(a.report.epoch_losses.back() < a.report.epoch_losses.front());
        CHECK(a.report.epoch_losses == b.report.epoch_losses);
        CHECK(a.artifact.tables == b.artifact.tables);
        for (double l : a.report.epoch_losses)
            CHECK(l >= 0.0);
        CHECK(a.report.triples_seen == cfg.epochs * g.num_triples());
    }
}

TEST_CASE("norm constraint bounds entity norms") {
    auto g = chain(10);
    for (auto kind : {ModelKind::TransE, ModelKind::TransR, ModelKind::HolE}) {
        auto cfg = small(kind);
        cfg.epochs = 20;
        auto r = train(g, cfg);
        const auto& e = r.artifact.table(ParamSlot::Entity);
        for (std::size_t i = 0; i < e.rows; ++i) {
            double s = 0;
            for (double x : e.row(i))
                s += x * x;
            CHECK(std::sqrt(s) <= 1.0 + 1e-6);
        }
    }
}

TEST_CASE("sgd trains too") {
    auto cfg = small(ModelKind::TransE);
    cfg.optimizer = OptimizerKind::SGD;
    cfg.learning_rate = 0.05;
    auto r = train(chain(8), cfg);
    CHECK(r.report.epoch_losses.back() < r.report.epoch_losses.front());
}

TEST_CASE("divergence aborts with NonFiniteLoss") {
    auto cfg = small(ModelKind::DistMult);
    cfg.learning_rate = 1e300;
    cfg.optimizer = OptimizerKind::SGD;
    CHECK(code_of([&] { train(chain(8), cfg); }) == ErrorCode::NonFiniteLoss);
}

TEST_CASE("epoch callback sees every epoch") {
    auto cfg = small(ModelKind::TransE);
    cfg.epochs = 5;
    std::vector<double> seen;
    auto r = train(chain(5), cfg, [&](std::size_t, double loss) { seen.push_back(loss); });
    CHECK(seen == r.report.epoch_losses);
}

TEST_CASE("link prediction with a perfect scorer") {
    auto g = testing::tree_graph(2, 3);
    Rng rng(1);
    auto m = evaluate_link_prediction(
        [&](std::uint32_t h, std::uint32_t r, std::uint32_t t) { return g.contains({h, r, t}) ? 1.0 : 0.0; }, g,
        0, rng);
    CHECK(m.mrr == 1.0);
    CHECK(m.hits_at_10 == 1.0);
    CHECK(m.ranks == 2 * g.num_triples());
}

TEST_CASE("constant scorer ranks by index among filtered survivors") {
    auto g = testing::tree_graph(3, 4);
    Rng rng(1);
    auto m = evaluate_link_prediction([](std::uint32_t, std::uint32_t, std::uint32_t) { return 0.0; }, g, 0, rng);

    // Independent count of survivors ahead of the true entity.
    std::size_t hits = 0;
    double rr = 0;
    for (const auto& t : g.triples()) {
        std::size_t tail_rank = 1, head_rank = 1;
        for (std::uint32_t e = 0; e < t.tail; ++e)
            tail_rank += g.contains({t.head, t.relation, e}) ? 0 : 1;
        for (std::uint32_t e = 0; e < t.head; ++e)
            head_rank += g.contains({e, t.relation, t.tail}) ? 0 : 1;
        for (auto rank : {tail_rank, head_rank}) {
            hits += rank <= 10;
            rr += 1.0 / static_cast<double>(rank);
        }
    }
    const double n = 2.0 * static_cast<double>(g.num_triples());
    CHECK(m.hits_at_10 == doctest::Approx(hits / n));
    CHECK(m.mrr == doctest::Approx(rr / n));
}

TEST_CASE("trained artifact beats its initialization") {
    auto g = testing::tree_graph(2, 4);
    auto cfg = small(ModelKind::TransE);
    Rng init_rng(cfg.seed);
    auto init = init_params(g, cfg, init_rng);
    auto trained = train(g, cfg).artifact;
    Rng r1(2), r2(2);
    CHECK(evaluate_link_prediction(trained, g, 0, r1).mrr > evaluate_link_prediction(init, g, 0, r2).mrr);
}

TEST_CASE("train rejects degenerate graphs") {
    auto cfg = small(ModelKind::TransE);
    CHECK(code_of([&] { train(graph_of({"A:1", "A:2"}, {}), cfg); }) == ErrorCode::EmptyGraph);
    CHECK(code_of([&] { train(graph_of({"A:1"}, {{"A:1", "is_a", "A:1"}}), cfg); }) ==
          ErrorCode::SingleEntityGraph);
}

}

#include "biokg/trainer.hpp"

#include "biokg/error.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

namespace biokg {

bool TrainConfig::effective_norm_constraint() const {
    if (norm_constraint)
        return *norm_constraint;
    return kind == ModelKind::TransE || kind == ModelKind::TransR || kind == ModelKind::HolE;
}

void TrainConfig::validate() const {
    if (kind == ModelKind::RDF2Vec)
        throw Error(ErrorCode::InvalidArgument, "RDF2Vec is trained by the walk pipeline, not the triple trainer");
    if (epochs < 1)
        throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (dimension < 1)
        throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    if (batch_size < 1)
        throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
    if (negatives_per_positive < 1)
        throw Error(ErrorCode::InvalidArgument, "negatives_per_positive must be >= 1");
    if (!(margin > 0.0))
        throw Error(ErrorCode::InvalidArgument, "margin must be > 0");
    if (!(learning_rate > 0.0))
        throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
}

nlohmann::json to_json(const TrainConfig& c) {
    nlohmann::json j{
        {"model", std::string(to_string(c.kind))},
        {"epochs", c.epochs},
        {"dimension", c.dimension},
        {"batch_size", c.batch_size},
        {"negatives_per_positive", c.negatives_per_positive},
        {"margin", c.margin},
        {"learning_rate", c.learning_rate},
        {"optimizer", c.optimizer == OptimizerKind::Adam ? "Adam" : "SGD"},
        {"seed", c.seed},
        {"norm_constraint", c.effective_norm_constraint()},
        {"loss", "margin_ranking"},
        {"negative_sampling", "uniform_head_or_tail"},
    };
    if (c.optimizer == OptimizerKind::Adam) {
        j["adam_beta1"] = c.adam.beta1;
        j["adam_beta2"] = c.adam.beta2;
        j["adam_epsilon"] = c.adam.epsilon;
    }
    if (c.kind == ModelKind::TransE)
        j["transe_norm"] = c.transe_norm == Norm::L1 ? "L1" : "L2";
    return j;
}

void apply_overrides(TrainConfig& c, const nlohmann::json& o) {
    if (o.is_null())
        return;
    if (!o.is_object())
        throw Error(ErrorCode::InvalidArgument, "train overrides must be a JSON object");
    for (const auto& [key, value] : o.items()) {
        if (key == "epochs") c.epochs = value.get<std::size_t>();
        else if (key == "dimension") c.dimension = value.get<std::size_t>();
        else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
        else if (key == "negatives_per_positive") c.negatives_per_positive = value.get<std::size_t>();
        else if (key == "margin") c.margin = value.get<double>();
        else if (key == "learning_rate") c.learning_rate = value.get<double>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else if (key == "norm_constraint") c.norm_constraint = value.get<bool>();
        else if (key == "optimizer") {
            const auto name = value.get<std::string>();
            if (name == "Adam" || name == "adam") c.optimizer = OptimizerKind::Adam;
            else if (name == "SGD" || name == "sgd") c.optimizer = OptimizerKind::SGD;
            else throw Error(ErrorCode::InvalidArgument, "unknown optimizer " + name);
        } else if (key == "transe_norm") {
            const auto name = value.get<std::string>();
            if (name == "L1") c.transe_norm = Norm::L1;
            else if (name == "L2") c.transe_norm = Norm::L2;
            else throw Error(ErrorCode::InvalidArgument, "unknown norm " + name);
        } else {
            throw Error(ErrorCode::InvalidArgument, "unknown train option '" + key + "'");
        }
    }
}

nlohmann::json to_json(const TrainReport& r) {
    return nlohmann::json{{"epoch_losses", r.epoch_losses},
                          {"wall_time_seconds", r.wall_time_seconds},
                          {"triples_seen", r.triples_seen}};
}

ModelArtifact init_params(const KnowledgeGraph& graph, const TrainConfig& config, Rng& rng) {
    if (graph.num_triples() == 0)
        throw Error(ErrorCode::EmptyGraph, "cannot train on a graph without triples");
    ModelConfig mc{config.kind, config.dimension, config.transe_norm};
    auto a = ModelArtifact::zeros(mc, graph.num_entities(), graph.num_relations());
    const double bound = 6.0 / std::sqrt(static_cast<double>(config.dimension));
    auto fill_uniform = [&](ParamSlot slot) {
        for (double& x : a.table(slot).data)
            x = uniform_real(rng, -bound, bound);
    };
    fill_uniform(ParamSlot::Entity);
    switch (config.kind) {
    case ModelKind::TransE:
    case ModelKind::DistMult:
    case ModelKind::HolE:
        fill_uniform(ParamSlot::Relation);
        break;
    case ModelKind::TransR: {
        fill_uniform(ParamSlot::Relation);
        auto& proj = a.table(ParamSlot::Projection);
        const std::size_t d = config.dimension;
        for (std::size_t r = 0; r < proj.rows; ++r)
            for (std::size_t i = 0; i < d; ++i)
                proj.row(r)[i * d + i] = 1.0;
        break;
    }
    case ModelKind::BoxE:
        fill_uniform(ParamSlot::Bump);
        fill_uniform(ParamSlot::HeadCenter);
        fill_uniform(ParamSlot::TailCenter);
        break;
    case ModelKind::RDF2Vec:
        break;
    }
    return a;
}

Triple negative_sample(const Triple& triple, const KnowledgeGraph& graph, Rng& rng) {
    const auto n = graph.num_entities();
    if (n < 2)
        throw Error(ErrorCode::SingleEntityGraph, "negative sampling needs at least two entities");
    const bool corrupt_head = coin_flip(rng);
    Triple out = triple;
    auto& slot = corrupt_head ? out.head : out.tail;
    const auto original = slot;
    do {
        slot = static_cast<std::uint32_t>(uniform_index(rng, n));
    } while (slot == original);
    return out;
}

double margin_loss(double score_pos, double score_neg, double margin) noexcept {
    return std::max(0.0, margin - score_pos + score_neg);
}

void sgd_update(std::span<double> params, std::span<const double> grad, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i] -= lr * grad[i];
}

void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> m,
                 std::span<double> v, std::uint64_t step, double lr, const AdamParams& hp) {
    const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * grad[i];
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + hp.epsilon);
    }
}

namespace {

// Sums repeated (slot, row) blocks of one batch into a dense buffer.
class BatchAccumulator {
public:
    struct Row {
        ParamSlot slot;
        std::uint32_t row;
        std::size_t offset;
        std::size_t width;
    };

    void add(const Gradient& g) {
        for (const auto& b : g.blocks()) {
            const std::uint64_t key = (static_cast<std::uint64_t>(b.slot) << 32) | b.row;
            auto [it, inserted] = index_.try_emplace(key, rows_.size());
            if (inserted) {
                rows_.push_back(Row{b.slot, b.row, values_.size(), b.width});
                values_.resize(values_.size() + b.width, 0.0);
            }
            const auto& row = rows_[it->second];
            const auto src = g.values(b);
            for (std::size_t i = 0; i < b.width; ++i)
                values_[row.offset + i] += src[i];
        }
    }

    const std::vector<Row>& rows() const noexcept { return rows_; }
    std::span<const double> values(const Row& r) const {
        return std::span<const double>(values_).subspan(r.offset, r.width);
    }
    void clear() {
        rows_.clear();
        values_.clear();
        index_.clear();
    }

private:
    std::vector<Row> rows_;
    std::vector<double> values_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
};

void clamp_to_unit_ball(std::span<double> v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    if (s > 1.0) {
        const double inv = 1.0 / std::sqrt(s);
        for (double& x : v)
            x *= inv;
    }
}

} // namespace

TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    Rng rng(config.seed);
    TrainResult result{init_params(graph, config, rng), {}};
    auto& artifact = result.artifact;
    if (graph.num_entities() < 2)
        throw Error(ErrorCode::SingleEntityGraph, "negative sampling needs at least two entities");

    std::array<std::vector<double>, kParamSlotCount> first_moment, second_moment;
    if (config.optimizer == OptimizerKind::Adam) {
        for (std::size_t s = 0; s < kParamSlotCount; ++s) {
            first_moment[s].assign(artifact.tables[s].data.size(), 0.0);
            second_moment[s].assign(artifact.tables[s].data.size(), 0.0);
        }
    }

    const bool constrain = config.effective_norm_constraint();
    bool full_norm_pass_pending = constrain;
    std::vector<std::uint32_t> order(graph.num_triples());
    std::iota(order.begin(), order.end(), 0U);
    const auto& triples = graph.triples();

    Gradient pair_grad;
    BatchAccumulator batch_grad;
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(std::span<std::uint32_t>(order), rng);
        double epoch_loss = 0.0;
        std::size_t epoch_pairs = 0;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double weight =
                1.0 / static_cast<double>((end - start) * config.negatives_per_positive);
            batch_grad.clear();

            for (std::size_t i = start; i < end; ++i) {
                const Triple& pos = triples[order[i]];
                const double s_pos = score(artifact, pos.head, pos.relation, pos.tail);
                for (std::size_t k = 0; k < config.negatives_per_positive; ++k) {
                    const Triple neg = negative_sample(pos, graph, rng);
                    const double s_neg = score(artifact, neg.head, neg.relation, neg.tail);
                    const double loss = margin_loss(s_pos, s_neg, config.margin);
                    if (!std::isfinite(loss) || !std::isfinite(s_pos) || !std::isfinite(s_neg))
                        throw Error(ErrorCode::NonFiniteLoss,
                                    std::string(to_string(config.kind)) + ": non-finite loss at epoch " +
                                        std::to_string(epoch + 1) + ", triple " + std::to_string(order[i]) +
                                        " (pos score " + std::to_string(s_pos) + ", neg score " +
                                        std::to_string(s_neg) + ")");
                    epoch_loss += loss;
                    ++epoch_pairs;
                    if (loss <= 0.0)
                        continue;
                    pair_grad.clear();
                    accumulate_score_gradient(artifact, pos.head, pos.relation, pos.tail, -weight, pair_grad);
                    accumulate_score_gradient(artifact, neg.head, neg.relation, neg.tail, weight, pair_grad);
                    batch_grad.add(pair_grad);
                }
            }
            result.report.triples_seen += end - start;

            ++step;
            for (const auto& row : batch_grad.rows()) {
                const auto s = static_cast<std::size_t>(row.slot);
                auto params = artifact.tables[s].row(row.row);
                const auto grad = batch_grad.values(row);
                if (config.optimizer == OptimizerKind::Adam) {
                    const std::size_t off = static_cast<std::size_t>(row.row) * row.width;
                    adam_update(params, grad, std::span<double>(first_moment[s]).subspan(off, row.width),
                                std::span<double>(second_moment[s]).subspan(off, row.width), step,
                                config.learning_rate, config.adam);
                } else {
                    sgd_update(params, grad, config.learning_rate);
                }
            }

            if (constrain) {
                auto& entities = artifact.table(ParamSlot::Entity);
                if (full_norm_pass_pending) {
                    for (std::size_t e = 0; e < entities.rows; ++e)
                        clamp_to_unit_ball(entities.row(e));
                    full_norm_pass_pending = false;
                } else {
                    for (const auto& row : batch_grad.rows())
                        if (row.slot == ParamSlot::Entity)
                            clamp_to_unit_ball(entities.row(row.row));
                }
            }
        }

        const double mean = epoch_loss / static_cast<double>(epoch_pairs);
        if (!std::isfinite(mean))
            throw Error(ErrorCode::NonFiniteLoss, std::string(to_string(config.kind)) +
                                                      ": non-finite mean loss at epoch " +
                                                      std::to_string(epoch + 1));
        result.report.epoch_losses.push_back(mean);
        if (on_epoch)
            on_epoch(epoch, mean);
    }
    if (!artifact.all_finite())
        throw Error(ErrorCode::NonFiniteLoss,
                    std::string(to_string(config.kind)) + ": parameters diverged to non-finite values");

    result.report.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

LinkPredictionMetrics evaluate_link_prediction(const TripleScorer& scorer, const KnowledgeGraph& graph,
                                               std::size_t sample_size, Rng& rng) {
    std::vector<std::uint32_t> sample(graph.num_triples());
    std::iota(sample.begin(), sample.end(), 0U);
    if (sample_size > 0 && sample_size < sample.size()) {
        shuffle(std::span<std::uint32_t>(sample), rng);
        sample.resize(sample_size);
    }

    const auto n = static_cast<std::uint32_t>(graph.num_entities());
    LinkPredictionMetrics m;
    double rr_sum = 0.0;
    std::size_t hits = 0;
    auto record = [&](std::size_t rank) {
        rr_sum += 1.0 / static_cast<double>(rank);
        hits += rank <= 10 ? 1 : 0;
        ++m.ranks;
    };

    for (auto idx : sample) {
        const Triple& t = graph.triples()[idx];
        const double truth = scorer(t.head, t.relation, t.tail);
        std::size_t tail_rank = 1, head_rank = 1;
        for (std::uint32_t e = 0; e < n; ++e) {
            if (e != t.tail && !graph.contains(Triple{t.head, t.relation, e})) {
                const double s = scorer(t.head, t.relation, e);
                if (s > truth || (s == truth && e < t.tail))
                    ++tail_rank;
            }
            if (e != t.head && !graph.contains(Triple{e, t.relation, t.tail})) {
                const double s = scorer(e, t.relation, t.tail);
                if (s > truth || (s == truth && e < t.head))
                    ++head_rank;
            }
        }
        record(tail_rank);
        record(head_rank);
    }
    if (m.ranks > 0) {
        m.mrr = rr_sum / static_cast<double>(m.ranks);
        m.hits_at_10 = static_cast<double>(hits) / static_cast<double>(m.ranks);
    }
    return m;
}

LinkPredictionMetrics evaluate_link_prediction(const ModelArtifact& artifact, const KnowledgeGraph& graph,
                                               std::size_t sample_size, Rng& rng) {
    return evaluate_link_prediction(
        [&](std::uint32_t h, std::uint32_t r, std::uint32_t t) { return score(artifact, h, r, t); }, graph,
        sample_size, rng);
}

} // namespace biokg

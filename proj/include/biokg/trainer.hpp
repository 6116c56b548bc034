#pragma once

// Negative-sampling margin-ranking trainer for the triple-scoring models.

#include "biokg/knowledge_graph.hpp"
#include "biokg/models.hpp"
#include "biokg/random.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

enum class OptimizerKind { SGD, Adam };

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    ModelKind kind = ModelKind::TransE;
    std::size_t epochs = 100;
    std::size_t dimension = 200;
    std::size_t batch_size = 128;
    std::size_t negatives_per_positive = 1;
    double margin = 1.0;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    AdamParams adam;
    Norm transe_norm = Norm::L2;
    std::uint64_t seed = 42;
    // Unset: on for TransE, TransR and HolE.
    std::optional<bool> norm_constraint;

    bool effective_norm_constraint() const;
    // Throws InvalidArgument.
    void validate() const;
};

// Hyperparameters as recorded in provenance and reports.
nlohmann::json to_json(const TrainConfig& config);
// Applies overrides from a JSON object onto `config`. Unknown keys throw.
void apply_overrides(TrainConfig& config, const nlohmann::json& overrides);

struct TrainReport {
    std::vector<double> epoch_losses;
    double wall_time_seconds = 0.0;
    std::uint64_t triples_seen = 0;
};

nlohmann::json to_json(const TrainReport& report);

// Uniform [-6/sqrt(d), 6/sqrt(d)] vectors, identity TransR projections, zero
// raw box widths. Throws EmptyGraph when the graph has no triples.
ModelArtifact init_params(const KnowledgeGraph& graph, const TrainConfig& config, Rng& rng);

// Corrupts head or tail (fair coin) with a uniformly drawn entity, redrawing
// until the result differs from `triple`. Throws SingleEntityGraph.
Triple negative_sample(const Triple& triple, const KnowledgeGraph& graph, Rng& rng);

double margin_loss(double score_pos, double score_neg, double margin) noexcept;

// Minimisation steps on one parameter block. `step` is the 1-based global
// step count used for Adam bias correction.
void sgd_update(std::span<double> params, std::span<const double> grad, double lr);
void adam_update(std::span<double> params, std::span<const double> grad, std::span<double> first_moment,
                 std::span<double> second_moment, std::uint64_t step, double lr, const AdamParams& hyper);

struct TrainResult {
    ModelArtifact artifact;
    TrainReport report;
};

// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

// Throws EmptyGraph, SingleEntityGraph, NonFiniteLoss, InvalidArgument.
TrainResult train(const KnowledgeGraph& graph, const TrainConfig& config, const EpochCallback& on_epoch = {});

struct LinkPredictionMetrics {
    double mrr = 0.0;
    double hits_at_10 = 0.0;
    std::size_t ranks = 0;
};

// Filtered ranking of the true head and tail among all entities. Candidates
// tied with the true entity rank ahead of it iff their index is smaller.
// sample_size 0 or >= |triples| evaluates every triple.
LinkPredictionMetrics evaluate_link_prediction(const ModelArtifact& artifact, const KnowledgeGraph& graph,
                                               std::size_t sample_size, Rng& rng);

// Same ranking rule with an arbitrary scorer, for baselines.
using TripleScorer = std::function<double(std::uint32_t, std::uint32_t, std::uint32_t)>;
LinkPredictionMetrics evaluate_link_prediction(const TripleScorer& scorer, const KnowledgeGraph& graph,
                                               std::size_t sample_size, Rng& rng);

} // namespace biokg

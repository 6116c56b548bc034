#pragma once

// RDF2Vec: directed random walks as sentences, then skip-gram with negative
// sampling over entity and relation tokens.

#include "biokg/knowledge_graph.hpp"
#include "biokg/models.hpp"
#include "biokg/random.hpp"

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

struct WalkConfig {
    std::size_t walks_per_entity = 10;
    std::size_t depth = 4;
    std::uint64_t seed = 42;

    void validate() const;
};

struct SkipGramConfig {
    std::size_t dimension = 200;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 100;
    double initial_lr = 0.025;
    double min_lr = 1e-4;
    std::uint64_t seed = 42;

    void validate() const;
};

nlohmann::json to_json(const WalkConfig& c);
nlohmann::json to_json(const SkipGramConfig& c);
void apply_overrides(WalkConfig& c, const nlohmann::json& overrides);
void apply_overrides(SkipGramConfig& c, const nlohmann::json& overrides);

// Token ids: entities occupy [0, |entities|), relation r is |entities| + r.
struct WalkCorpus {
    std::vector<std::string> vocabulary;
    std::vector<std::vector<std::uint32_t>> sentences;
    std::size_t num_entity_tokens = 0;

    bool is_entity_token(std::uint32_t token) const noexcept { return token < num_entity_tokens; }
};

// Walks start at every non-obsolete entity and follow out-edges uniformly,
// stopping early at sinks. Duplicate walks from one start are dropped. Each
// start entity draws from its own stream derived from (seed, entity index).
WalkCorpus generate_walks(const KnowledgeGraph& graph, const WalkConfig& config);

// One walk per line, tokens separated by single spaces.
void write_corpus(const WalkCorpus& corpus, std::ostream& out);

// Dense token vectors, row i belongs to vocabulary[i].
struct TokenVectors {
    std::size_t dimension = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * dimension, dimension);
    }
};

// Gradient of the negative-sampling loss
//   L = -log sigmoid(in . ctx) - sum_j log sigmoid(-in . neg_j)
// for one (center, context, negatives) step.
struct SkipGramStepGradient {
    double loss = 0.0;
    std::vector<double> d_input;
    std::vector<double> d_context;
    std::vector<std::vector<double>> d_negatives;
};

SkipGramStepGradient skipgram_step_gradient(std::span<const double> input, std::span<const double> context,
                                            std::span<const std::span<const double>> negatives);

// Returns input-side vectors. Throws EmptyCorpus.
TokenVectors train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& config);

// Walks then skip-gram; keeps entity token vectors only, aligned with graph
// entity indices. Throws EmptyCorpus for graphs without live entities.
ModelArtifact rdf2vec_embed(const KnowledgeGraph& graph, const WalkConfig& walks, const SkipGramConfig& sg);

} // namespace biokg

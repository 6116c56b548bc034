#include "biokg/rdf2vec.hpp"

#include "biokg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace biokg {

void WalkConfig::validate() const {
    if (walks_per_entity < 1)
        throw Error(ErrorCode::InvalidArgument, "walks_per_entity must be >= 1");
    if (depth < 1)
        throw Error(ErrorCode::InvalidArgument, "walk depth must be >= 1");
}

void SkipGramConfig::validate() const {
    if (dimension < 1)
        throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    if (window < 1)
        throw Error(ErrorCode::InvalidArgument, "window must be >= 1");
    if (negatives < 1)
        throw Error(ErrorCode::InvalidArgument, "negatives must be >= 1");
    if (epochs < 1)
        throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    if (!(initial_lr > 0.0) || !(min_lr > 0.0) || min_lr > initial_lr)
        throw Error(ErrorCode::InvalidArgument, "need 0 < min_lr <= initial_lr");
}

nlohmann::json to_json(const WalkConfig& c) {
    return {{"walks_per_entity", c.walks_per_entity}, {"depth", c.depth}, {"walk_seed", c.seed},
            {"walk_strategy", "uniform_directed_dedup"}};
}

nlohmann::json to_json(const SkipGramConfig& c) {
    return {{"dimension", c.dimension},   {"window", c.window},
            {"negatives", c.negatives},   {"epochs", c.epochs},
            {"initial_lr", c.initial_lr}, {"min_lr", c.min_lr},
            {"seed", c.seed},             {"objective", "skip_gram_negative_sampling"},
            {"noise_exponent", 0.75}};
}

void apply_overrides(WalkConfig& c, const nlohmann::json& o) {
    if (o.is_null())
        return;
    if (!o.is_object())
        throw Error(ErrorCode::InvalidArgument, "walk overrides must be a JSON object");
    for (const auto& [key, value] : o.items()) {
        if (key == "walks_per_entity") c.walks_per_entity = value.get<std::size_t>();
        else if (key == "depth") c.depth = value.get<std::size_t>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw Error(ErrorCode::InvalidArgument, "unknown walk option '" + key + "'");
    }
}

void apply_overrides(SkipGramConfig& c, const nlohmann::json& o) {
    if (o.is_null())
        return;
    if (!o.is_object())
        throw Error(ErrorCode::InvalidArgument, "skip-gram overrides must be a JSON object");
    for (const auto& [key, value] : o.items()) {
        if (key == "dimension") c.dimension = value.get<std::size_t>();
        else if (key == "window") c.window = value.get<std::size_t>();
        else if (key == "negatives") c.negatives = value.get<std::size_t>();
        else if (key == "epochs") c.epochs = value.get<std::size_t>();
        else if (key == "initial_lr") c.initial_lr = value.get<double>();
        else if (key == "min_lr") c.min_lr = value.get<double>();
        else if (key == "seed") c.seed = value.get<std::uint64_t>();
        else throw Error(ErrorCode::InvalidArgument, "unknown skip-gram option '" + key + "'");
    }
}

WalkCorpus generate_walks(const KnowledgeGraph& graph, const WalkConfig& config) {
    config.validate();
    WalkCorpus corpus;
    const auto n = static_cast<std::uint32_t>(graph.num_entities());
    corpus.num_entity_tokens = n;
    corpus.vocabulary.reserve(n + graph.num_relations());
    for (const auto& e : graph.entities())
        corpus.vocabulary.push_back(e.iri);
    for (const auto& r : graph.relations())
        corpus.vocabulary.push_back(r.iri);

    for (std::uint32_t start = 0; start < n; ++start) {
        if (graph.entities()[start].obsolete)
            continue;
        Rng rng = derive_rng(config.seed, start);
        std::set<std::vector<std::uint32_t>> seen;
        for (std::size_t w = 0; w < config.walks_per_entity; ++w) {
            std::vector<std::uint32_t> walk{start};
            std::uint32_t current = start;
            for (std::size_t hop = 0; hop < config.depth; ++hop) {
                const auto edges = graph.out_edges(current);
                if (edges.empty())
                    break;
                const auto& edge = edges[uniform_index(rng, edges.size())];
                walk.push_back(n + edge.relation);
                walk.push_back(edge.tail);
                current = edge.tail;
            }
            if (seen.insert(walk).second)
                corpus.sentences.push_back(std::move(walk));
        }
    }
    return corpus;
}

void write_corpus(const WalkCorpus& corpus, std::ostream& out) {
    for (const auto& sentence : corpus.sentences) {
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (i)
                out << ' ';
            out << corpus.vocabulary.at(sentence[i]);
        }
        out << '\n';
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

// Gradients of the SGNS loss into caller-provided buffers; d_negatives is
// laid out as negatives.size() consecutive rows. Returns the loss.
double sgns_gradient(std::span<const double> input, std::span<const double> context,
                     std::span<const std::span<const double>> negatives, std::span<double> d_input,
                     std::span<double> d_context, std::span<double> d_negatives) {
    const std::size_t d = input.size();
    const double pos = dot(input, context);
    double loss = softplus(-pos);
    const double g_pos = -(1.0 - sigmoid(pos));
    for (std::size_t i = 0; i < d; ++i) {
        d_input[i] = g_pos * context[i];
        d_context[i] = g_pos * input[i];
    }
    for (std::size_t j = 0; j < negatives.size(); ++j) {
        const double x = dot(input, negatives[j]);
        loss += softplus(x);
        const double g_neg = sigmoid(x);
        for (std::size_t i = 0; i < d; ++i) {
            d_input[i] += g_neg * negatives[j][i];
            d_negatives[j * d + i] = g_neg * input[i];
        }
    }
    return loss;
}

} // namespace

SkipGramStepGradient skipgram_step_gradient(std::span<const double> input, std::span<const double> context,
                                            std::span<const std::span<const double>> negatives) {
    const std::size_t d = input.size();
    if (context.size() != d)
        throw Error(ErrorCode::DimensionMismatch, "context vector dimension differs from input");
    for (const auto& neg : negatives)
        if (neg.size() != d)
            throw Error(ErrorCode::DimensionMismatch, "negative vector dimension differs from input");
    SkipGramStepGradient g;
    g.d_input.resize(d);
    g.d_context.resize(d);
    std::vector<double> flat(negatives.size() * d);
    g.loss = sgns_gradient(input, context, negatives, g.d_input, g.d_context, flat);
    for (std::size_t j = 0; j < negatives.size(); ++j)
        g.d_negatives.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(j * d),
                                   flat.begin() + static_cast<std::ptrdiff_t>((j + 1) * d));
    return g;
}

TokenVectors train_skipgram(const WalkCorpus& corpus, const SkipGramConfig& config) {
    config.validate();
    std::size_t total_tokens = 0;
    for (const auto& s : corpus.sentences)
        total_tokens += s.size();
    if (corpus.sentences.empty() || total_tokens == 0 || corpus.vocabulary.empty())
        throw Error(ErrorCode::EmptyCorpus, "skip-gram needs a non-empty corpus");

    const std::size_t v = corpus.vocabulary.size();
    const std::size_t d = config.dimension;

    std::vector<double> counts(v, 0.0);
    for (const auto& s : corpus.sentences)
        for (auto tok : s)
            counts.at(tok) += 1.0;
    std::vector<double> noise_cdf(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        acc += std::pow(counts[i], 0.75);
        noise_cdf[i] = acc;
    }

    Rng rng(config.seed);
    TokenVectors input{d, std::vector<double>(v * d)};
    for (double& x : input.data)
        x = uniform_real(rng, -0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
    std::vector<double> output(v * d, 0.0);

    auto in_row = [&](std::uint32_t t) { return std::span<double>(input.data).subspan(t * d, d); };
    auto out_row = [&](std::uint32_t t) { return std::span<double>(output).subspan(t * d, d); };
    auto draw_noise = [&]() {
        const double u = uniform01(rng) * acc;
        auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
        if (it == noise_cdf.end())
            --it;
        return static_cast<std::uint32_t>(it - noise_cdf.begin());
    };

    std::vector<std::size_t> order(corpus.sentences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::uint32_t> negatives;
    std::vector<std::span<const double>> negative_rows;
    std::vector<double> d_input(d), d_context(d), d_negatives(config.negatives * d);

    const double total_work = static_cast<double>(config.epochs) * static_cast<double>(total_tokens);
    std::size_t processed = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle(std::span<std::size_t>(order), rng);
        for (auto si : order) {
            const auto& sentence = corpus.sentences[si];
            for (std::size_t i = 0; i < sentence.size(); ++i, ++processed) {
                const double progress = static_cast<double>(processed) / total_work;
                const double lr =
                    std::max(config.min_lr, config.initial_lr - (config.initial_lr - config.min_lr) * progress);
                const auto radius = static_cast<std::size_t>(1 + uniform_index(rng, config.window));
                const std::size_t lo = i >= radius ? i - radius : 0;
                const std::size_t hi = std::min(sentence.size() - 1, i + radius);
                const auto center = sentence[i];
                for (std::size_t j = lo; j <= hi; ++j) {
                    if (j == i)
                        continue;
                    const auto context = sentence[j];
                    negatives.clear();
                    for (std::size_t k = 0; k < config.negatives; ++k) {
                        const auto noise = draw_noise();
                        if (noise != context)
                            negatives.push_back(noise);
                    }
                    negative_rows.clear();
                    for (auto t : negatives)
                        negative_rows.emplace_back(out_row(t));
                    sgns_gradient(in_row(center), out_row(context), negative_rows, d_input, d_context,
                                  d_negatives);
                    auto in = in_row(center);
                    auto ctx = out_row(context);
                    for (std::size_t x = 0; x < d; ++x) {
                        in[x] -= lr * d_input[x];
                        ctx[x] -= lr * d_context[x];
                    }
                    for (std::size_t k = 0; k < negatives.size(); ++k) {
                        auto row = out_row(negatives[k]);
                        for (std::size_t x = 0; x < d; ++x)
                            row[x] -= lr * d_negatives[k * d + x];
                    }
                }
            }
        }
    }
    return input;
}

ModelArtifact rdf2vec_embed(const KnowledgeGraph& graph, const WalkConfig& walks, const SkipGramConfig& sg) {
    const auto corpus = generate_walks(graph, walks);
    const auto vectors = train_skipgram(corpus, sg);
    ModelConfig mc{ModelKind::RDF2Vec, sg.dimension, Norm::L2};
    auto artifact = ModelArtifact::zeros(mc, graph.num_entities(), 0);
    auto& table = artifact.table(ParamSlot::Entity);
    std::copy(vectors.data.begin(),
              vectors.data.begin() + static_cast<std::ptrdiff_t>(graph.num_entities() * sg.dimension),
              table.data.begin());
    return artifact;
}

} // namespace biokg

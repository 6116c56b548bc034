#pragma once

// Triple-scoring models and their analytic gradients.
//
// Every score follows "higher is more plausible": distance-based models
// return a negated distance. Gradients are of the score itself; the trainer
// folds in the loss sign.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biokg {

enum class ModelKind { TransE, TransR, DistMult, HolE, BoxE, RDF2Vec };

inline constexpr std::array<ModelKind, 6> kAllModelKinds{
    ModelKind::TransE, ModelKind::TransR, ModelKind::DistMult,
    ModelKind::HolE,   ModelKind::BoxE,   ModelKind::RDF2Vec};

inline constexpr std::array<ModelKind, 5> kScoringModelKinds{
    ModelKind::TransE, ModelKind::TransR, ModelKind::DistMult, ModelKind::HolE, ModelKind::BoxE};

std::string_view to_string(ModelKind kind) noexcept;
// Case-insensitive.
std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;

enum class Norm { L1, L2 };

struct ModelConfig {
    ModelKind kind = ModelKind::TransE;
    std::size_t dimension = 200;
    Norm transe_norm = Norm::L2;
};

// Parameter tables. Which ones are populated depends on the model kind:
//   all:                Entity (n x d)
//   TransE/DistMult/HolE/TransR: Relation (m x d)
//   TransR:             Projection (m x d*d, row-major d x d matrix per relation)
//   BoxE:               Bump (n x d), HeadCenter/HeadWidth/TailCenter/TailWidth (m x d)
// Box widths are stored raw; the half-width is softplus(raw).
enum class ParamSlot : std::uint8_t {
    Entity,
    Bump,
    Relation,
    Projection,
    HeadCenter,
    HeadWidth,
    TailCenter,
    TailWidth,
};
inline constexpr std::size_t kParamSlotCount = 8;

std::string_view to_string(ParamSlot slot) noexcept;

struct ParamTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    ParamTable() = default;
    ParamTable(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    bool empty() const noexcept { return rows == 0; }
    friend bool operator==(const ParamTable&, const ParamTable&) = default;
    std::span<double> row(std::size_t i) { return std::span<double>(data).subspan(i * cols, cols); }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(data).subspan(i * cols, cols);
    }
};

struct ModelArtifact {
    ModelConfig config;
    std::array<ParamTable, kParamSlotCount> tables;

    ParamTable& table(ParamSlot s) { return tables[static_cast<std::size_t>(s)]; }
    const ParamTable& table(ParamSlot s) const { return tables[static_cast<std::size_t>(s)]; }

    std::size_t num_entities() const { return table(ParamSlot::Entity).rows; }
    std::size_t dimension() const { return config.dimension; }

    // Allocates zeroed tables with the shapes required by config.kind.
    static ModelArtifact zeros(const ModelConfig& config, std::size_t entities, std::size_t relations);

    bool all_finite() const;
};

// Sparse gradient: a list of (slot, row) blocks backed by one flat buffer.
// Blocks may repeat; consumers sum them.
class Gradient {
public:
    struct Block {
        ParamSlot slot;
        std::uint32_t row;
        std::size_t offset;
        std::size_t width;
    };

    // Returns a zero-initialised span of `width` values for (slot, row).
    std::span<double> add(ParamSlot slot, std::uint32_t row, std::size_t width);

    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    std::span<const double> values(const Block& b) const {
        return std::span<const double>(values_).subspan(b.offset, b.width);
    }
    void clear() noexcept {
        blocks_.clear();
        values_.clear();
    }

private:
    std::vector<Block> blocks_;
    std::vector<double> values_;
};

// Direct O(d^2) circular correlation: out[k] = sum_i a[i] * b[(i + k) mod d].
void circular_correlation(std::span<const double> a, std::span<const double> b, std::span<double> out);
std::vector<double> circular_correlation(std::span<const double> a, std::span<const double> b);

double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

// Per-dimension BoxE distance of point coordinate `p` to a box dimension with
// center `c` and half-width `half_width` (> 0).
double boxe_distance(double p, double c, double half_width) noexcept;
// Both branches of the distance, for continuity checks.
double boxe_inside_distance(double p, double c, double half_width) noexcept;
double boxe_outside_distance(double p, double c, double half_width) noexcept;

// Per-model scores. Indices must be in range for the artifact.
double score_transe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);
double score_transr(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);
double score_distmult(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);
double score_hole(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);
double score_boxe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);

// Dispatches on a.config.kind. RDF2Vec artifacts carry no scoring function.
double score(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t);

// Appends `weight * d score / d param` for every parameter the score touches.
void accumulate_score_gradient(const ModelArtifact& a, std::uint32_t h, std::uint32_t r,
                               std::uint32_t t, double weight, Gradient& out);

inline Gradient score_gradient(const ModelArtifact& a, std::uint32_t h, std::uint32_t r,
                               std::uint32_t t) {
    Gradient g;
    accumulate_score_gradient(a, h, r, t, 1.0, g);
    return g;
}

} // namespace biokg

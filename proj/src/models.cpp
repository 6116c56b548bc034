#include "biokg/models.hpp"

#include "biokg/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace biokg {
namespace {

double sign(double x) noexcept { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void put(Gradient& g, ParamSlot slot, std::uint32_t row, std::span<const double> values, double weight) {
    auto dst = g.add(slot, row, values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        dst[i] = weight * values[i];
}

double l2(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

// TransR projection: out = M x, with M stored row-major d x d.
void project(std::span<const double> m, std::span<const double> x, std::span<double> out) {
    const std::size_t d = x.size();
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            s += m[i * d + j] * x[j];
        out[i] = s;
    }
}

// d dist / d p (and -d dist / d c) and d dist / d w_plus for one dimension.
struct BoxPartials {
    double dist;
    double d_point;
    double d_wplus;
};

BoxPartials boxe_partials(double p, double c, double half_width) noexcept {
    const double w_plus = 2.0 * half_width + 1.0;
    const double a = p - c;
    const double abs_a = std::abs(a);
    if (abs_a <= half_width) {
        return {abs_a / w_plus, sign(a) / w_plus, -abs_a / (w_plus * w_plus)};
    }
    const double kappa = 0.5 * (w_plus - 1.0) * (w_plus - 1.0 / w_plus);
    const double d_kappa = 0.5 * ((w_plus - 1.0 / w_plus) + (w_plus - 1.0) * (1.0 + 1.0 / (w_plus * w_plus)));
    return {abs_a * w_plus - kappa, sign(a) * w_plus, abs_a - d_kappa};
}

} // namespace

std::string_view to_string(ModelKind kind) noexcept {
    switch (kind) {
    case ModelKind::TransE: return "TransE";
    case ModelKind::TransR: return "TransR";
    case ModelKind::DistMult: return "DistMult";
    case ModelKind::HolE: return "HolE";
    case ModelKind::BoxE: return "BoxE";
    case ModelKind::RDF2Vec: return "RDF2Vec";
    }
    return "TransE";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    const auto needle = lower(name);
    for (auto kind : kAllModelKinds)
        if (lower(to_string(kind)) == needle)
            return kind;
    return std::nullopt;
}

std::string_view to_string(ParamSlot slot) noexcept {
    switch (slot) {
    case ParamSlot::Entity: return "entity";
    case ParamSlot::Bump: return "bump";
    case ParamSlot::Relation: return "relation";
    case ParamSlot::Projection: return "projection";
    case ParamSlot::HeadCenter: return "head_center";
    case ParamSlot::HeadWidth: return "head_width";
    case ParamSlot::TailCenter: return "tail_center";
    case ParamSlot::TailWidth: return "tail_width";
    }
    return "entity";
}

ModelArtifact ModelArtifact::zeros(const ModelConfig& config, std::size_t entities, std::size_t relations) {
    if (config.dimension < 1)
        throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
    const std::size_t d = config.dimension;
    ModelArtifact a;
    a.config = config;
    a.table(ParamSlot::Entity) = ParamTable(entities, d);
    switch (config.kind) {
    case ModelKind::TransE:
    case ModelKind::DistMult:
    case ModelKind::HolE:
        a.table(ParamSlot::Relation) = ParamTable(relations, d);
        break;
    case ModelKind::TransR:
        a.table(ParamSlot::Relation) = ParamTable(relations, d);
        a.table(ParamSlot::Projection) = ParamTable(relations, d * d);
        break;
    case ModelKind::BoxE:
        a.table(ParamSlot::Bump) = ParamTable(entities, d);
        a.table(ParamSlot::HeadCenter) = ParamTable(relations, d);
        a.table(ParamSlot::HeadWidth) = ParamTable(relations, d);
        a.table(ParamSlot::TailCenter) = ParamTable(relations, d);
        a.table(ParamSlot::TailWidth) = ParamTable(relations, d);
        break;
    case ModelKind::RDF2Vec:
        break;
    }
    return a;
}

bool ModelArtifact::all_finite() const {
    for (const auto& t : tables)
        for (double x : t.data)
            if (!std::isfinite(x))
                return false;
    return true;
}

std::span<double> Gradient::add(ParamSlot slot, std::uint32_t row, std::size_t width) {
    const std::size_t offset = values_.size();
    values_.resize(offset + width, 0.0);
    blocks_.push_back(Block{slot, row, offset, width});
    return std::span<double>(values_).subspan(offset, width);
}

void circular_correlation(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    const std::size_t d = a.size();
    for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i)
            s += a[i] * b[(i + k) % d];
        out[k] = s;
    }
}

std::vector<double> circular_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "circular correlation of unequal lengths");
    std::vector<double> out(a.size());
    circular_correlation(a, b, out);
    return out;
}

double softplus(double x) noexcept {
    if (x > 30.0)
        return x;
    return std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double boxe_inside_distance(double p, double c, double half_width) noexcept {
    return std::abs(p - c) / (2.0 * half_width + 1.0);
}

double boxe_outside_distance(double p, double c, double half_width) noexcept {
    const double w_plus = 2.0 * half_width + 1.0;
    const double kappa = 0.5 * (w_plus - 1.0) * (w_plus - 1.0 / w_plus);
    return std::abs(p - c) * w_plus - kappa;
}

double boxe_distance(double p, double c, double half_width) noexcept {
    return std::abs(p - c) <= half_width ? boxe_inside_distance(p, c, half_width)
                                         : boxe_outside_distance(p, c, half_width);
}

double score_transe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    double s = 0.0;
    for (std::size_t i = 0; i < eh.size(); ++i) {
        const double delta = eh[i] + rv[i] - et[i];
        s += a.config.transe_norm == Norm::L1 ? std::abs(delta) : delta * delta;
    }
    return a.config.transe_norm == Norm::L1 ? -s : -std::sqrt(s);
}

double score_transr(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    const std::size_t d = a.dimension();
    const auto m = a.table(ParamSlot::Projection).row(r);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    std::vector<double> ph(d), pt(d);
    project(m, a.table(ParamSlot::Entity).row(h), ph);
    project(m, a.table(ParamSlot::Entity).row(t), pt);
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double u = ph[i] + rv[i] - pt[i];
        s += u * u;
    }
    return -std::sqrt(s);
}

double score_distmult(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    double s = 0.0;
    for (std::size_t i = 0; i < eh.size(); ++i)
        s += eh[i] * rv[i] * et[i];
    return s;
}

double score_hole(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    std::vector<double> corr(eh.size());
    circular_correlation(eh, et, corr);
    double s = 0.0;
    for (std::size_t k = 0; k < corr.size(); ++k)
        s += rv[k] * corr[k];
    return s;
}

double score_boxe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    const auto& ent = a.table(ParamSlot::Entity);
    const auto& bump = a.table(ParamSlot::Bump);
    const auto eh = ent.row(h), et = ent.row(t);
    const auto bh = bump.row(h), bt = bump.row(t);
    const auto hc = a.table(ParamSlot::HeadCenter).row(r);
    const auto hw = a.table(ParamSlot::HeadWidth).row(r);
    const auto tc = a.table(ParamSlot::TailCenter).row(r);
    const auto tw = a.table(ParamSlot::TailWidth).row(r);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < eh.size(); ++i) {
        const double dh = boxe_distance(eh[i] + bt[i], hc[i], softplus(hw[i]));
        const double dt = boxe_distance(et[i] + bh[i], tc[i], softplus(tw[i]));
        head += dh * dh;
        tail += dt * dt;
    }
    return -(std::sqrt(head) + std::sqrt(tail));
}

double score(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t) {
    switch (a.config.kind) {
    case ModelKind::TransE: return score_transe(a, h, r, t);
    case ModelKind::TransR: return score_transr(a, h, r, t);
    case ModelKind::DistMult: return score_distmult(a, h, r, t);
    case ModelKind::HolE: return score_hole(a, h, r, t);
    case ModelKind::BoxE: return score_boxe(a, h, r, t);
    case ModelKind::RDF2Vec: break;
    }
    throw Error(ErrorCode::InvalidArgument, "RDF2Vec artifacts have no triple score");
}

namespace {

void grad_transe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t, double w,
                 Gradient& out) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    const std::size_t d = eh.size();
    std::vector<double> g(d);  // d score / d h
    if (a.config.transe_norm == Norm::L1) {
        for (std::size_t i = 0; i < d; ++i)
            g[i] = -sign(eh[i] + rv[i] - et[i]);
    } else {
        std::vector<double> delta(d);
        for (std::size_t i = 0; i < d; ++i)
            delta[i] = eh[i] + rv[i] - et[i];
        const double n = l2(delta);
        for (std::size_t i = 0; i < d; ++i)
            g[i] = n > 0.0 ? -delta[i] / n : 0.0;
    }
    put(out, ParamSlot::Entity, h, g, w);
    put(out, ParamSlot::Relation, r, g, w);
    put(out, ParamSlot::Entity, t, g, -w);
}

void grad_transr(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t, double w,
                 Gradient& out) {
    const std::size_t d = a.dimension();
    const auto m = a.table(ParamSlot::Projection).row(r);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    std::vector<double> ph(d), pt(d), u(d);
    project(m, eh, ph);
    project(m, et, pt);
    for (std::size_t i = 0; i < d; ++i)
        u[i] = ph[i] + rv[i] - pt[i];
    const double n = l2(u);
    std::vector<double> g(d);  // d score / d u
    for (std::size_t i = 0; i < d; ++i)
        g[i] = n > 0.0 ? -u[i] / n : 0.0;

    std::vector<double> mt_g(d, 0.0);  // M^T g
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            mt_g[j] += m[i * d + j] * g[i];
    std::vector<double> dm(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            dm[i * d + j] = g[i] * (eh[j] - et[j]);

    put(out, ParamSlot::Entity, h, mt_g, w);
    put(out, ParamSlot::Entity, t, mt_g, -w);
    put(out, ParamSlot::Relation, r, g, w);
    put(out, ParamSlot::Projection, r, dm, w);
}

void grad_distmult(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t, double w,
                   Gradient& out) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    const std::size_t d = eh.size();
    std::vector<double> gh(d), gr(d), gt(d);
    for (std::size_t i = 0; i < d; ++i) {
        gh[i] = rv[i] * et[i];
        gr[i] = eh[i] * et[i];
        gt[i] = eh[i] * rv[i];
    }
    put(out, ParamSlot::Entity, h, gh, w);
    put(out, ParamSlot::Relation, r, gr, w);
    put(out, ParamSlot::Entity, t, gt, w);
}

void grad_hole(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t, double w,
               Gradient& out) {
    const auto eh = a.table(ParamSlot::Entity).row(h);
    const auto et = a.table(ParamSlot::Entity).row(t);
    const auto rv = a.table(ParamSlot::Relation).row(r);
    const std::size_t d = eh.size();
    std::vector<double> gr(d), gh(d, 0.0), gt(d, 0.0);
    circular_correlation(eh, et, gr);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t j = (i + k) % d;
            gh[i] += rv[k] * et[j];
            gt[j] += rv[k] * eh[i];
        }
    put(out, ParamSlot::Entity, h, gh, w);
    put(out, ParamSlot::Relation, r, gr, w);
    put(out, ParamSlot::Entity, t, gt, w);
}

void grad_boxe(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t, double w,
               Gradient& out) {
    const auto& ent = a.table(ParamSlot::Entity);
    const auto& bump = a.table(ParamSlot::Bump);
    const auto eh = ent.row(h), et = ent.row(t);
    const auto bh = bump.row(h), bt = bump.row(t);
    const auto hc = a.table(ParamSlot::HeadCenter).row(r);
    const auto hw = a.table(ParamSlot::HeadWidth).row(r);
    const auto tc = a.table(ParamSlot::TailCenter).row(r);
    const auto tw = a.table(ParamSlot::TailWidth).row(r);
    const std::size_t d = eh.size();

    // Side 0 is the head point p_h = e_h + b_t against the head box,
    // side 1 the tail point p_t = e_t + b_h against the tail box.
    std::vector<BoxPartials> parts[2] = {std::vector<BoxPartials>(d), std::vector<BoxPartials>(d)};
    double norm[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < d; ++i) {
        parts[0][i] = boxe_partials(eh[i] + bt[i], hc[i], softplus(hw[i]));
        parts[1][i] = boxe_partials(et[i] + bh[i], tc[i], softplus(tw[i]));
        norm[0] += parts[0][i].dist * parts[0][i].dist;
        norm[1] += parts[1][i].dist * parts[1][i].dist;
    }
    norm[0] = std::sqrt(norm[0]);
    norm[1] = std::sqrt(norm[1]);

    std::span<const double> raw_width[2] = {hw, tw};
    std::vector<double> g_point[2], g_center[2], g_width[2];
    for (int side = 0; side < 2; ++side) {
        g_point[side].assign(d, 0.0);
        g_center[side].assign(d, 0.0);
        g_width[side].assign(d, 0.0);
        if (norm[side] <= 0.0)
            continue;
        for (std::size_t i = 0; i < d; ++i) {
            const auto& p = parts[side][i];
            const double d_dist = -p.dist / norm[side];  // d score / d dist_i
            g_point[side][i] = d_dist * p.d_point;
            g_center[side][i] = -d_dist * p.d_point;
            g_width[side][i] = d_dist * p.d_wplus * 2.0 * sigmoid(raw_width[side][i]);
        }
    }
    put(out, ParamSlot::Entity, h, g_point[0], w);
    put(out, ParamSlot::Bump, t, g_point[0], w);
    put(out, ParamSlot::Entity, t, g_point[1], w);
    put(out, ParamSlot::Bump, h, g_point[1], w);
    put(out, ParamSlot::HeadCenter, r, g_center[0], w);
    put(out, ParamSlot::HeadWidth, r, g_width[0], w);
    put(out, ParamSlot::TailCenter, r, g_center[1], w);
    put(out, ParamSlot::TailWidth, r, g_width[1], w);
}

} // namespace

void accumulate_score_gradient(const ModelArtifact& a, std::uint32_t h, std::uint32_t r, std::uint32_t t,
                               double weight, Gradient& out) {
    switch (a.config.kind) {
    case ModelKind::TransE: return grad_transe(a, h, r, t, weight, out);
    case ModelKind::TransR: return grad_transr(a, h, r, t, weight, out);
    case ModelKind::DistMult: return grad_distmult(a, h, r, t, weight, out);
    case ModelKind::HolE: return grad_hole(a, h, r, t, weight, out);
    case ModelKind::BoxE: return grad_boxe(a, h, r, t, weight, out);
    case ModelKind::RDF2Vec: break;
    }
    throw Error(ErrorCode::InvalidArgument, "RDF2Vec artifacts have no triple score");
}

} // namespace biokg

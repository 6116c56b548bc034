#include "biokg/query_engine.hpp"

#include "biokg/error.hpp"

#include <algorithm>
#include <cmath>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace biokg {

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c < 0)
            c = 0xFFFD;
        if (u_isUWhiteSpace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        const UChar32 folded = u_foldCase(c, U_FOLD_CASE_DEFAULT);
        std::uint8_t buf[U8_MAX_LENGTH];
        std::int32_t n = 0;
        U8_APPEND_UNSAFE(buf, n, folded);
        out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
    }
    return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

double cosine_with_norms(std::span<const double> a, double na, std::span<const double> b, double nb) {
    const double c = dot(a, b) / (na * nb);
    if (c > 1.0 - 1e-12 && std::equal(a.begin(), a.end(), b.begin(), b.end()))
        return 1.0;
    return std::clamp(c, -1.0, 1.0);
}

} // namespace

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different dimensions");
    const double na = norm(a), nb = norm(b);
    if (!(na > 0.0) || !(nb > 0.0))
        throw Error(ErrorCode::ZeroVector, "cosine similarity is undefined for a zero vector");
    return cosine_with_norms(a, na, b, nb);
}

std::string obo_purl(std::string_view iri) {
    std::string local(iri);
    std::replace(local.begin(), local.end(), ':', '_');
    return "http://purl.obolibrary.org/obo/" + local;
}

nlohmann::json to_json(const QueryRow& row) {
    return {{"iri", row.iri}, {"label", row.label}, {"score", row.score}, {"url", row.url}};
}

nlohmann::json to_json(const QueryResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.rows)
        rows.push_back(to_json(r));
    return {{"query", result.query}, {"rows", std::move(rows)}};
}

ConceptIndex::ConceptIndex(VectorTable vectors, const LabelTable& labels) : vectors_(std::move(vectors)) {
    const std::size_t n = vectors_.size();
    norms_.resize(n);
    labels_.resize(n);
    namespaces_.resize(n);
    row_by_iri_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& iri = vectors_.iris[i];
        row_by_iri_.emplace(iri, i);
        norms_[i] = norm(vectors_.row(i));
        auto it = labels.find(iri);
        if (it == labels.end())
            continue;
        labels_[i] = it->second.label;
        namespaces_[i] = it->second.ontology_namespace;
        if (!it->second.label.empty())
            by_label_[normalize(it->second.label)].push_back(iri);
        for (const auto& alt : it->second.alt_ids)
            by_alt_id_[normalize(alt)].push_back(iri);
    }
    for (auto* map : {&by_label_, &by_alt_id_})
        for (auto& [_, iris] : *map) {
            std::sort(iris.begin(), iris.end());
            iris.erase(std::unique(iris.begin(), iris.end()), iris.end());
        }
}

std::optional<std::size_t> ConceptIndex::row_of(std::string_view iri) const {
    auto it = row_by_iri_.find(std::string(iri));
    if (it == row_by_iri_.end())
        return std::nullopt;
    return it->second;
}

std::span<const double> ConceptIndex::vector_of(std::string_view iri) const {
    auto row = row_of(iri);
    if (!row)
        throw Error(ErrorCode::NotFound, "concept not found: " + std::string(iri));
    return vectors_.row(*row);
}

std::string ConceptIndex::label_of(std::string_view iri) const {
    auto row = row_of(iri);
    return row ? labels_[*row] : std::string();
}

std::string ConceptIndex::namespace_of(std::string_view iri) const {
    auto row = row_of(iri);
    return row ? namespaces_[*row] : std::string();
}

std::string ConceptIndex::resolve(std::string_view query) const {
    if (row_of(query))
        return std::string(query);
    const auto key = normalize(query);
    for (const auto* map : {&by_label_, &by_alt_id_}) {
        auto it = map->find(key);
        if (it == map->end())
            continue;
        if (it->second.size() > 1)
            throw AmbiguousLabelError("'" + std::string(query) + "' matches " +
                                          std::to_string(it->second.size()) + " concepts",
                                      it->second);
        return it->second.front();
    }
    throw Error(ErrorCode::NotFound, "no concept matches '" + std::string(query) + "'");
}

double ConceptIndex::similarity(std::string_view iri_a, std::string_view iri_b) const {
    const auto a = row_of(iri_a), b = row_of(iri_b);
    if (!a)
        throw Error(ErrorCode::NotFound, "concept not found: " + std::string(iri_a));
    if (!b)
        throw Error(ErrorCode::NotFound, "concept not found: " + std::string(iri_b));
    if (!(norms_[*a] > 0.0) || !(norms_[*b] > 0.0))
        throw Error(ErrorCode::ZeroVector, "zero vector stored for " + std::string(norms_[*a] > 0.0 ? iri_b : iri_a));
    return cosine_with_norms(vectors_.row(*a), norms_[*a], vectors_.row(*b), norms_[*b]);
}

QueryResult ConceptIndex::top_k(std::string_view iri, std::size_t k,
                                std::optional<std::string_view> namespace_filter) const {
    if (k == 0)
        throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
    const auto q = row_of(iri);
    if (!q)
        throw Error(ErrorCode::NotFound, "concept not found: " + std::string(iri));
    if (!(norms_[*q] > 0.0))
        throw Error(ErrorCode::ZeroVector, "zero vector stored for " + std::string(iri));

    struct Candidate {
        double score;
        std::size_t row;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(size());
    const auto qv = vectors_.row(*q);
    for (std::size_t i = 0; i < size(); ++i) {
        if (i == *q)
            continue;
        if (namespace_filter && namespaces_[i] != *namespace_filter)
            continue;
        if (!(norms_[i] > 0.0))
            throw Error(ErrorCode::ZeroVector, "zero vector stored for " + vectors_.iris[i]);
        candidates.push_back({cosine_with_norms(qv, norms_[*q], vectors_.row(i), norms_[i]), i});
    }
    const auto better = [&](const Candidate& a, const Candidate& b) {
        if (a.score != b.score)
            return a.score > b.score;
        return vectors_.iris[a.row] < vectors_.iris[b.row];
    };
    const std::size_t take = std::min(k, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                      better);

    QueryResult result;
    result.query = std::string(iri);
    result.rows.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const auto& c = candidates[i];
        const auto& hit = vectors_.iris[c.row];
        result.rows.push_back(QueryRow{hit, labels_[c.row], c.score, obo_purl(hit)});
    }
    return result;
}

} // namespace biokg

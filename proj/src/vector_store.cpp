#include "biokg/vector_store.hpp"

#include "biokg/checksum.hpp"
#include "biokg/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <fmt/format.h>

namespace fs = std::filesystem;

namespace biokg {

bool VersionManifest::has_model(ModelKind kind) const {
    return std::find(models.begin(), models.end(), kind) != models.end();
}

nlohmann::json to_json(const VersionManifest& m) {
    nlohmann::json models = nlohmann::json::array();
    for (auto k : m.models)
        models.push_back(std::string(to_string(k)));
    return {{"kg_name", m.kg_name},
            {"version_tag", m.version_tag},
            {"source_url", m.source_url},
            {"sha256", m.sha256},
            {"retrieved_at", format_utc(m.retrieved_at)},
            {"models", std::move(models)},
            {"source_format", m.source_format},
            {"files", m.files}};
}

VersionManifest manifest_from_json(const nlohmann::json& j) {
    VersionManifest m;
    m.kg_name = j.at("kg_name").get<std::string>();
    m.version_tag = j.at("version_tag").get<std::string>();
    m.source_url = j.at("source_url").get<std::string>();
    m.sha256 = j.at("sha256").get<std::string>();
    m.retrieved_at = parse_utc(j.at("retrieved_at").get<std::string>());
    for (const auto& name : j.at("models")) {
        auto kind = parse_model_kind(name.get<std::string>());
        if (!kind)
            throw Error(ErrorCode::CorruptStore, "manifest lists unknown model " + name.dump());
        m.models.push_back(*kind);
    }
    m.source_format = j.value("source_format", std::string("obo"));
    if (j.contains("files"))
        m.files = j.at("files").get<std::map<std::string, std::string>>();
    return m;
}

bool is_valid_name(std::string_view name) noexcept {
    if (name.empty() || name.front() == '.' || name.size() > 128)
        return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
               c == '_' || c == '-';
    });
}

std::string derive_version_tag(std::string_view data_version, SysTime retrieved_at) {
    auto slash = data_version.find_last_of('/');
    if (slash != std::string_view::npos)
        data_version = data_version.substr(slash + 1);
    std::string tag;
    for (char c : data_version) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '.' || c == '_' || c == '-';
        tag.push_back(ok ? c : '_');
    }
    while (!tag.empty() && tag.front() == '.')
        tag.erase(tag.begin());
    if (tag.empty() || !is_valid_name(tag))
        return format_utc_date(retrieved_at);
    return tag;
}

namespace {

void write_vectors_document(std::string& out, std::string_view kg, std::string_view version,
                            std::string_view model, std::size_t dimension,
                            const std::vector<std::pair<std::string, std::span<const double>>>& rows) {
    out += "{\"dimension\":";
    out += std::to_string(dimension);
    out += ",\"kg\":";
    out += nlohmann::json(std::string(kg)).dump();
    out += ",\"model\":";
    out += nlohmann::json(std::string(model)).dump();
    out += ",\"vectors\":{";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i)
            out += ',';
        out += nlohmann::json(rows[i].first).dump();
        out += ":[";
        const auto& v = rows[i].second;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (k)
                out += ',';
            fmt::format_to(std::back_inserter(out), "{}", v[k]);
        }
        out += ']';
    }
    out += "},\"version\":";
    out += nlohmann::json(std::string(version)).dump();
    out += "}\n";
}

} // namespace

std::string export_vectors_json(const ModelArtifact& artifact, std::span<const EntityRecord> entities,
                                std::string_view kg, std::string_view version) {
    const auto& table = artifact.table(ParamSlot::Entity);
    if (table.rows != entities.size())
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("artifact has {} entity rows, graph has {} entities", table.rows, entities.size()));
    if (table.cols != artifact.dimension())
        throw Error(ErrorCode::DimensionMismatch, "entity table width differs from model dimension");

    std::vector<std::pair<std::string, std::span<const double>>> rows;
    rows.reserve(entities.size());
    for (std::size_t i = 0; i < entities.size(); ++i) {
        if (entities[i].obsolete)
            continue;
        const auto row = table.row(i);
        for (double x : row)
            if (!std::isfinite(x))
                throw Error(ErrorCode::DimensionMismatch,
                            "non-finite vector component for " + entities[i].iri);
        rows.emplace_back(entities[i].iri, row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    write_vectors_document(out, kg, version, to_string(artifact.config.kind), artifact.dimension(), rows);
    return out;
}

std::string export_vectors_json(const VectorTable& t) {
    if (t.values.size() != t.iris.size() * t.dimension)
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} values for {} rows of width {}", t.values.size(), t.iris.size(), t.dimension));
    std::vector<std::pair<std::string, std::span<const double>>> rows;
    rows.reserve(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto row = t.row(i);
        for (double x : row)
            if (!std::isfinite(x))
                throw Error(ErrorCode::DimensionMismatch, "non-finite vector component for " + t.iris[i]);
        rows.emplace_back(t.iris[i], row);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::string out;
    write_vectors_document(out, t.kg, t.version, t.model, t.dimension, rows);
    return out;
}

VectorTable parse_vectors_json(std::string_view text) {
    VectorTable t;
    try {
        const auto doc = nlohmann::json::parse(text);
        t.kg = doc.at("kg").get<std::string>();
        t.version = doc.at("version").get<std::string>();
        t.model = doc.at("model").get<std::string>();
        t.dimension = doc.at("dimension").get<std::size_t>();
        const auto& vectors = doc.at("vectors");
        if (!vectors.is_object())
            throw Error(ErrorCode::MalformedInput, "\"vectors\" must be an object");
        t.iris.reserve(vectors.size());
        t.values.reserve(vectors.size() * t.dimension);
        for (const auto& [iri, arr] : vectors.items()) {
            if (!arr.is_array() || arr.size() != t.dimension)
                throw Error(ErrorCode::MalformedInput,
                            fmt::format("vector for {} does not have {} components", iri, t.dimension));
            t.iris.push_back(iri);
            for (const auto& x : arr) {
                if (!x.is_number())
                    throw Error(ErrorCode::MalformedInput, "non-numeric component for " + iri);
                t.values.push_back(x.get<double>());
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedInput, std::string("malformed vectors document: ") + e.what());
    }
    return t;
}

LabelTable labels_from_graph(const KnowledgeGraph& graph) {
    LabelTable labels;
    for (const auto& e : graph.entities()) {
        if (e.obsolete)
            continue;
        labels[e.iri] = LabelEntry{e.label, e.ontology_namespace, e.alt_ids};
    }
    return labels;
}

nlohmann::json to_json(const LabelTable& labels) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [iri, entry] : labels)
        j[iri] = {{"label", entry.label}, {"namespace", entry.ontology_namespace}, {"alt_ids", entry.alt_ids}};
    return j;
}

LabelTable labels_from_json(const nlohmann::json& j) {
    LabelTable labels;
    for (const auto& [iri, entry] : j.items())
        labels[iri] = LabelEntry{entry.value("label", ""), entry.value("namespace", ""),
                                 entry.value("alt_ids", std::vector<std::string>{})};
    return labels;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
    return std::move(ss).str();
}

namespace {

void write_file(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
        throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string random_suffix() {
    std::random_device rd;
    return fmt::format("{:08x}", rd());
}

std::string model_dir(ModelKind kind) { return std::string(to_string(kind)); }

std::string vectors_rel(ModelKind kind) { return model_dir(kind) + "/vectors.json"; }
std::string prov_rel(ModelKind kind) { return model_dir(kind) + "/prov.json"; }

void require_name(std::string_view what, std::string_view name) {
    if (!is_valid_name(name))
        throw Error(ErrorCode::InvalidArgument, fmt::format("invalid {} '{}'", what, name));
}

// Removes the staging directory unless released.
class StagingGuard {
public:
    explicit StagingGuard(fs::path dir) : dir_(std::move(dir)) {}
    ~StagingGuard() {
        if (!dir_.empty()) {
            std::error_code ec;
            fs::remove_all(dir_, ec);
        }
    }
    void release() { dir_.clear(); }

private:
    fs::path dir_;
};

} // namespace

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp-" + random_suffix();
    write_file(tmp, bytes);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error(ErrorCode::IoFailure, "cannot replace " + path.string());
    }
}

VectorStore::VectorStore(fs::path root) : root_(std::move(root)) {}

VersionManifest VectorStore::save_version(VersionManifest manifest, std::span<const ModelOutput> outputs,
                                          const LabelTable& labels, std::string_view source_bytes) {
    require_name("kg name", manifest.kg_name);
    require_name("version tag", manifest.version_tag);
    if (!is_sha256_hex(manifest.sha256))
        throw Error(ErrorCode::InvalidArgument, "manifest sha256 is not 64 lowercase hex characters");
    if (outputs.empty())
        throw Error(ErrorCode::InvalidArgument, "a version needs at least one model");

    const auto published = history(manifest.kg_name);
    for (const auto& m : published) {
        if (m.version_tag == manifest.version_tag)
            throw Error(ErrorCode::VersionExists,
                        "version " + manifest.version_tag + " of " + manifest.kg_name + " already exists");
        if (manifest.retrieved_at < m.retrieved_at)
            throw Error(ErrorCode::InvalidArgument, "retrieved_at precedes published version " + m.version_tag);
    }

    const fs::path kg_dir = root_ / manifest.kg_name;
    std::error_code ec;
    fs::create_directories(kg_dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create " + kg_dir.string() + ": " + ec.message());

    const fs::path staging = kg_dir / (".staging-" + manifest.version_tag + "-" + random_suffix());
    fs::create_directory(staging, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot create staging directory: " + ec.message());
    StagingGuard guard(staging);

    manifest.models.clear();
    manifest.files.clear();
    const std::string labels_bytes = to_json(labels).dump() + "\n";
    write_file(staging / "labels.json", labels_bytes);
    manifest.files["labels.json"] = sha256_hex(labels_bytes);
    if (!source_bytes.empty()) {
        write_file(staging / "source", source_bytes);
        manifest.files["source"] = sha256_hex(source_bytes);
    }
    for (const auto& out : outputs) {
        if (manifest.has_model(out.kind))
            throw Error(ErrorCode::InvalidArgument, "model listed twice: " + model_dir(out.kind));
        fs::create_directory(staging / model_dir(out.kind), ec);
        if (ec)
            throw Error(ErrorCode::IoFailure, "cannot create model directory: " + ec.message());
        write_file(staging / vectors_rel(out.kind), out.vectors_json);
        write_file(staging / prov_rel(out.kind), out.prov_json);
        manifest.files[vectors_rel(out.kind)] = sha256_hex(out.vectors_json);
        manifest.files[prov_rel(out.kind)] = sha256_hex(out.prov_json);
        manifest.models.push_back(out.kind);
    }

    if (before_publish)
        before_publish();

    const fs::path final_dir = kg_dir / manifest.version_tag;
    if (fs::exists(final_dir))
        fs::remove_all(final_dir);  // orphan of an interrupted publish, never in the manifest
    fs::rename(staging, final_dir, ec);
    if (ec)
        throw Error(ErrorCode::IoFailure, "cannot publish " + final_dir.string() + ": " + ec.message());
    guard.release();

    nlohmann::json all = nlohmann::json::array();
    for (const auto& m : published)
        all.push_back(to_json(m));
    all.push_back(to_json(manifest));
    try {
        write_file_atomic(kg_dir / "manifest.json", all.dump(2) + "\n");
    } catch (...) {
        fs::remove_all(final_dir, ec);
        throw;
    }
    return manifest;
}

std::vector<std::string> VectorStore::list_kgs() const {
    std::vector<std::string> kgs;
    std::error_code ec;
    if (!fs::is_directory(root_, ec))
        return kgs;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        const auto name = entry.path().filename().string();
        if (entry.is_directory() && is_valid_name(name) && fs::exists(entry.path() / "manifest.json"))
            kgs.push_back(name);
    }
    std::sort(kgs.begin(), kgs.end());
    return kgs;
}

std::vector<VersionManifest> VectorStore::history(std::string_view kg) const {
    std::vector<VersionManifest> out;
    if (!is_valid_name(kg))
        return out;
    const fs::path kg_dir = root_ / std::string(kg);
    const fs::path path = kg_dir / "manifest.json";
    std::error_code ec;
    if (!fs::exists(path, ec))
        return out;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
        for (const auto& entry : doc)
            out.push_back(manifest_from_json(entry));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptStore, "unreadable manifest for " + std::string(kg) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptStore, "unreadable manifest for " + std::string(kg) + ": " + e.what());
    }
    std::erase_if(out, [&](const VersionManifest& m) {
        const fs::path dir = kg_dir / m.version_tag;
        for (auto kind : m.models)
            if (!fs::exists(dir / vectors_rel(kind)))
                return true;
        return !fs::exists(dir / "labels.json");
    });
    return out;
}

std::vector<std::string> VectorStore::list_versions(std::string_view kg) const {
    std::vector<std::string> tags;
    for (const auto& m : history(kg))
        tags.push_back(m.version_tag);
    return tags;
}

std::optional<VersionManifest> VectorStore::latest(std::string_view kg) const {
    auto all = history(kg);
    if (all.empty())
        return std::nullopt;
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].retrieved_at >= all[best].retrieved_at)
            best = i;
    return all[best];
}

VersionManifest VectorStore::resolve(std::string_view kg, std::string_view version) const {
    if (version.empty() || version == "latest") {
        auto m = latest(kg);
        if (!m)
            throw Error(ErrorCode::NotFound, "no published versions for '" + std::string(kg) + "'");
        return *m;
    }
    for (auto& m : history(kg))
        if (m.version_tag == version)
            return m;
    throw Error(ErrorCode::NotFound,
                "version '" + std::string(version) + "' of '" + std::string(kg) + "' not found");
}

std::string VectorStore::read_verified(const VersionManifest& m, const std::string& relative) const {
    const fs::path path = root_ / m.kg_name / m.version_tag / relative;
    std::string bytes;
    try {
        bytes = read_file(path);
    } catch (const Error&) {
        throw Error(ErrorCode::CorruptStore, "missing file " + path.string());
    }
    auto it = m.files.find(relative);
    if (it == m.files.end() || sha256_hex(bytes) != it->second)
        throw Error(ErrorCode::CorruptStore, "checksum mismatch for " + path.string());
    return bytes;
}

std::string VectorStore::read_vectors_file(std::string_view kg, std::string_view version, ModelKind model) const {
    const auto m = resolve(kg, version);
    if (!m.has_model(model))
        throw Error(ErrorCode::NotFound, fmt::format("model {} not in {} {}", to_string(model), kg, m.version_tag));
    return read_verified(m, vectors_rel(model));
}

std::string VectorStore::read_prov_file(std::string_view kg, std::string_view version, ModelKind model) const {
    const auto m = resolve(kg, version);
    if (!m.has_model(model))
        throw Error(ErrorCode::NotFound, fmt::format("model {} not in {} {}", to_string(model), kg, m.version_tag));
    return read_verified(m, prov_rel(model));
}

std::string VectorStore::read_source_file(std::string_view kg, std::string_view version) const {
    const auto m = resolve(kg, version);
    if (!m.files.contains("source"))
        throw Error(ErrorCode::NotFound, fmt::format("{} {} was published without its source", kg, m.version_tag));
    return read_verified(m, "source");
}

VectorTable VectorStore::load_vectors(std::string_view kg, std::string_view version, ModelKind model) const {
    const auto bytes = read_vectors_file(kg, version, model);
    try {
        return parse_vectors_json(bytes);
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptStore, e.what());
    }
}

LabelTable VectorStore::load_labels(std::string_view kg, std::string_view version) const {
    const auto m = resolve(kg, version);
    const auto bytes = read_verified(m, "labels.json");
    try {
        return labels_from_json(nlohmann::json::parse(bytes));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::CorruptStore, std::string("malformed labels.json: ") + e.what());
    }
}

LoadedVersion VectorStore::load_version(std::string_view kg, std::string_view version) const {
    LoadedVersion out;
    out.manifest = resolve(kg, version);
    for (auto kind : out.manifest.models)
        out.vectors.emplace(kind, load_vectors(kg, out.manifest.version_tag, kind));
    out.labels = load_labels(kg, out.manifest.version_tag);
    return out;
}

} // namespace biokg

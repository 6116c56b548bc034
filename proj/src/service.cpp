#include "biokg/service.hpp"

#include "biokg/error.hpp"
#include "biokg/log.hpp"

#include <charconv>
#include <filesystem>

#include <fmt/format.h>
#include <httplib.h>

namespace biokg {
namespace {

HttpResponse json_response(const nlohmann::json& body, int status = 200) {
    HttpResponse r;
    r.status = status;
    r.body = body.dump();
    return r;
}

int status_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AmbiguousLabel: return 409;
    case ErrorCode::InvalidArgument: return 400;
    default: return 500;
    }
}

ModelKind model_or_404(const std::string& name) {
    auto kind = parse_model_kind(name);
    if (!kind)
        throw Error(ErrorCode::NotFound, "unknown model '" + name + "'");
    return *kind;
}

std::optional<std::string> param(const QueryParams& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end())
        return std::nullopt;
    return it->second;
}

std::string required(const QueryParams& params, const std::string& key) {
    auto v = param(params, key);
    if (!v || v->empty())
        throw Error(ErrorCode::InvalidArgument, "missing query parameter '" + key + "'");
    return *v;
}

} // namespace

HttpResponse error_response(const std::exception& e) {
    ErrorCode code = ErrorCode::Internal;
    nlohmann::json body;
    if (const auto* err = dynamic_cast<const Error*>(&e))
        code = err->code();
    body["code"] = std::string(to_string(code));
    body["message"] = e.what();
    if (const auto* amb = dynamic_cast<const AmbiguousLabelError*>(&e))
        body["candidates"] = amb->candidates();
    const int status = status_for(code);
    if (status >= 500)
        log_error("request_failed", {{"code", std::string(to_string(code))}, {"error", e.what()}});
    return json_response(body, status);
}

EmbeddingService::EmbeddingService(VectorStore store, std::size_t cache_capacity)
    : store_(std::move(store)), cache_capacity_(std::max<std::size_t>(1, cache_capacity)),
      started_(std::chrono::steady_clock::now()) {
    refresh();
}

void EmbeddingService::refresh() {
    auto next = std::make_shared<Catalog>();
    std::error_code ec;
    next->store_readable = std::filesystem::is_directory(store_.root(), ec);
    if (next->store_readable) {
        try {
            for (const auto& kg : store_.list_kgs()) {
                auto history = store_.history(kg);
                if (history.empty())
                    continue;
                next->latest[kg] = *store_.latest(kg);
                next->versions[kg] = std::move(history);
            }
        } catch (const std::exception& e) {
            log_error("catalog_refresh_failed", {{"error", e.what()}});
            next->store_readable = false;
        }
    }
    std::lock_guard lock(catalog_mutex_);
    catalog_ = std::move(next);
}

std::shared_ptr<const EmbeddingService::Catalog> EmbeddingService::catalog() const {
    std::lock_guard lock(catalog_mutex_);
    return catalog_;
}

VersionManifest EmbeddingService::pin_version(const Catalog& catalog, const std::string& kg,
                                              const std::string& version) const {
    auto versions = catalog.versions.find(kg);
    if (versions == catalog.versions.end())
        throw Error(ErrorCode::NotFound, "unknown knowledge graph '" + kg + "'");
    if (version.empty() || version == "latest")
        return catalog.latest.at(kg);
    for (const auto& m : versions->second)
        if (m.version_tag == version)
            return m;
    throw Error(ErrorCode::NotFound, "version '" + version + "' of '" + kg + "' not found");
}

std::shared_ptr<const LoadedModel> EmbeddingService::model(const std::string& kg, const std::string& version,
                                                           ModelKind kind) {
    const auto snapshot = catalog();
    const auto manifest = pin_version(*snapshot, kg, version);
    if (!manifest.has_model(kind))
        throw Error(ErrorCode::NotFound,
                    fmt::format("model {} not available for {} {}", to_string(kind), kg, manifest.version_tag));

    const CacheKey key{kg, manifest.version_tag, kind};
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second.second);
            return it->second.first;
        }
    }

    auto vectors = store_.load_vectors(kg, manifest.version_tag, kind);
    auto labels = store_.load_labels(kg, manifest.version_tag);
    auto loaded = std::make_shared<const LoadedModel>(LoadedModel{manifest, kind, ConceptIndex(std::move(vectors), labels)});

    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end())
        return it->second.first;
    lru_.push_front(key);
    cache_.emplace(key, std::make_pair(loaded, lru_.begin()));
    while (cache_.size() > cache_capacity_) {
        cache_.erase(lru_.back());
        lru_.pop_back();
    }
    return loaded;
}

std::size_t EmbeddingService::cached_models() const {
    std::lock_guard lock(cache_mutex_);
    return cache_.size();
}

HttpResponse EmbeddingService::get_catalog() const {
    const auto snapshot = catalog();
    nlohmann::json kgs = nlohmann::json::array();
    for (const auto& [name, history] : snapshot->versions) {
        nlohmann::json tags = nlohmann::json::array();
        for (const auto& m : history)
            tags.push_back(m.version_tag);
        const auto& latest = snapshot->latest.at(name);
        nlohmann::json models = nlohmann::json::array();
        for (auto k : latest.models)
            models.push_back(std::string(to_string(k)));
        kgs.push_back({{"name", name}, {"versions", tags}, {"latest", latest.version_tag}, {"models", models}});
    }
    return json_response({{"kgs", kgs}});
}

HttpResponse EmbeddingService::get_vector(const std::string& kg, const std::string& model_name,
                                          const std::string& concept_query, const QueryParams& params) {
    const auto loaded = model(kg, param(params, "version").value_or("latest"), model_or_404(model_name));
    const auto iri = loaded->index.resolve(concept_query);
    const auto v = loaded->index.vector_of(iri);
    return json_response({{"kg", kg},
                          {"model", std::string(to_string(loaded->kind))},
                          {"version", loaded->manifest.version_tag},
                          {"iri", iri},
                          {"label", loaded->index.label_of(iri)},
                          {"vector", std::vector<double>(v.begin(), v.end())}});
}

HttpResponse EmbeddingService::get_similarity(const std::string& kg, const std::string& model_name,
                                              const QueryParams& params) {
    const auto a = required(params, "a");
    const auto b = required(params, "b");
    const auto loaded = model(kg, param(params, "version").value_or("latest"), model_or_404(model_name));
    const auto iri_a = loaded->index.resolve(a);
    const auto iri_b = loaded->index.resolve(b);
    const double score = loaded->index.similarity(iri_a, iri_b);
    return json_response({{"kg", kg},
                          {"model", std::string(to_string(loaded->kind))},
                          {"version", loaded->manifest.version_tag},
                          {"a", iri_a},
                          {"b", iri_b},
                          {"a_label", loaded->index.label_of(iri_a)},
                          {"b_label", loaded->index.label_of(iri_b)},
                          {"score", score}});
}

HttpResponse EmbeddingService::get_closest(const std::string& kg, const std::string& model_name,
                                           const QueryParams& params) {
    const auto q = required(params, "q");
    std::size_t k = 10;
    if (auto raw = param(params, "k")) {
        long long parsed = 0;
        const auto* end = raw->data() + raw->size();
        auto [ptr, ec] = std::from_chars(raw->data(), end, parsed);
        if (ec != std::errc() || ptr != end || parsed < 1)
            throw Error(ErrorCode::InvalidArgument, "k must be a positive integer");
        k = static_cast<std::size_t>(std::min<long long>(parsed, static_cast<long long>(kMaxK)));
    }
    const auto ns = param(params, "namespace");
    const auto loaded = model(kg, param(params, "version").value_or("latest"), model_or_404(model_name));
    const auto iri = loaded->index.resolve(q);
    auto result = loaded->index.top_k(iri, k, ns ? std::optional<std::string_view>(*ns) : std::nullopt);
    auto body = to_json(result);
    body["kg"] = kg;
    body["model"] = std::string(to_string(loaded->kind));
    body["version"] = loaded->manifest.version_tag;
    body["label"] = loaded->index.label_of(iri);
    return json_response(body);
}

HttpResponse EmbeddingService::get_download(const std::string& kg, const std::string& model_name,
                                            const std::string& version) const {
    const auto kind = model_or_404(model_name);
    const auto snapshot = catalog();
    const auto manifest = pin_version(*snapshot, kg, version);
    HttpResponse r;
    r.body = store_.read_vectors_file(kg, manifest.version_tag, kind);
    r.headers["Content-Disposition"] =
        fmt::format("attachment; filename=\"{}-{}-{}.json\"", kg, manifest.version_tag, to_string(kind));
    r.headers["X-Version"] = manifest.version_tag;
    return r;
}

HttpResponse EmbeddingService::get_health() const {
    const auto snapshot = catalog();
    std::error_code ec;
    const bool readable = snapshot->store_readable && std::filesystem::is_directory(store_.root(), ec);
    nlohmann::json loaded = nlohmann::json::object();
    for (const auto& [kg, m] : snapshot->latest)
        loaded[kg] = m.version_tag;
    const double uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    return json_response({{"status", readable ? "ok" : "degraded"}, {"loaded_versions", loaded}, {"uptime", uptime}});
}

namespace {

QueryParams params_of(const httplib::Request& req) {
    return QueryParams(req.params.begin(), req.params.end());
}

void send(httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    for (const auto& [k, v] : r.headers)
        res.set_header(k, v);
    res.set_content(r.body, r.content_type);
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            send(res, fn(req));
        } catch (const std::exception& e) {
            send(res, error_response(e));
        }
    };
}

} // namespace

void register_routes(httplib::Server& server, EmbeddingService& service,
                     const std::optional<std::filesystem::path>& static_dir) {
    server.Get("/health", guarded([&](const httplib::Request&) { return service.get_health(); }));
    server.Get("/api/v1/catalog", guarded([&](const httplib::Request&) { return service.get_catalog(); }));
    server.Get(R"(/api/v1/vector/([^/]+)/([^/]+)/(.+))", guarded([&](const httplib::Request& req) {
                   return service.get_vector(req.matches[1], req.matches[2], req.matches[3], params_of(req));
               }));
    server.Get(R"(/api/v1/similarity/([^/]+)/([^/]+))", guarded([&](const httplib::Request& req) {
                   return service.get_similarity(req.matches[1], req.matches[2], params_of(req));
               }));
    server.Get(R"(/api/v1/closest/([^/]+)/([^/]+))", guarded([&](const httplib::Request& req) {
                   return service.get_closest(req.matches[1], req.matches[2], params_of(req));
               }));
    server.Get(R"(/api/v1/download/([^/]+)/([^/]+)/([^/]+))", guarded([&](const httplib::Request& req) {
                   return service.get_download(req.matches[1], req.matches[2], req.matches[3]);
               }));
    if (static_dir)
        server.set_mount_point("/", static_dir->string());
    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        log_info("request", {{"method", req.method}, {"path", req.path}, {"status", std::to_string(res.status)}});
    });
}

ApiServer::ApiServer(EmbeddingService& service, ApiConfig config)
    : service_(service), config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
    register_routes(*server_, service_, config_.static_dir);
    refresher_ = std::jthread([this](std::stop_token stop) {
        SystemClock clock;
        while (clock.sleep_for(config_.refresh_interval, stop))
            service_.refresh();
    });
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
    int port = config_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(config_.host);
    } else if (!server_->bind_to_port(config_.host, port)) {
        port = -1;
    }
    if (port < 0)
        throw Error(ErrorCode::IoFailure, fmt::format("cannot bind {}:{}", config_.host, config_.port));
    listener_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    log_info("listening", {{"host", config_.host}, {"port", std::to_string(port)}});
    return port;
}

bool ApiServer::listen() {
    log_info("listening", {{"host", config_.host}, {"port", std::to_string(config_.port)}});
    return server_->listen(config_.host, config_.port);
}

void ApiServer::stop() {
    if (server_)
        server_->stop();
    if (listener_.joinable())
        listener_.join();
    refresher_.request_stop();
    if (refresher_.joinable())
        refresher_.join();
}

} // namespace biokg

#pragma once

// REST surface over a VectorStore: catalog, vector lookup, similarity,
// closest concepts, download and health.
//
// Each request pins one catalog snapshot and one loaded model, so everything
// in a response comes from a single version. Publishing a new version swaps
// the snapshot pointer; in-flight requests keep their old shared_ptr.

#include "biokg/config.hpp"
#include "biokg/query_engine.hpp"
#include "biokg/vector_store.hpp"

#include <chrono>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>

#include <nlohmann/json.hpp>

namespace httplib {
class Server;
}

namespace biokg {

struct HttpResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
    std::map<std::string, std::string> headers;
};

using QueryParams = std::multimap<std::string, std::string>;

struct LoadedModel {
    VersionManifest manifest;
    ModelKind kind;
    ConceptIndex index;
};

class EmbeddingService {
public:
    struct Catalog {
        bool store_readable = true;
        std::map<std::string, std::vector<VersionManifest>> versions;  // publication order
        std::map<std::string, VersionManifest> latest;
    };

    explicit EmbeddingService(VectorStore store, std::size_t cache_capacity = 6);

    // Re-reads manifests and swaps the catalog snapshot.
    void refresh();
    std::shared_ptr<const Catalog> catalog() const;

    // Throws NotFound for unknown kg / version / model.
    std::shared_ptr<const LoadedModel> model(const std::string& kg, const std::string& version, ModelKind kind);
    std::size_t cached_models() const;

    HttpResponse get_catalog() const;
    HttpResponse get_vector(const std::string& kg, const std::string& model, const std::string& concept_query,
                            const QueryParams& params);
    HttpResponse get_similarity(const std::string& kg, const std::string& model, const QueryParams& params);
    HttpResponse get_closest(const std::string& kg, const std::string& model, const QueryParams& params);
    HttpResponse get_download(const std::string& kg, const std::string& model, const std::string& version) const;
    HttpResponse get_health() const;

    static constexpr std::size_t kMaxK = 100;

private:
    using CacheKey = std::tuple<std::string, std::string, ModelKind>;

    VersionManifest pin_version(const Catalog& catalog, const std::string& kg, const std::string& version) const;

    VectorStore store_;
    std::size_t cache_capacity_;
    std::chrono::steady_clock::time_point started_;

    mutable std::mutex catalog_mutex_;
    std::shared_ptr<const Catalog> catalog_;

    mutable std::mutex cache_mutex_;
    std::list<CacheKey> lru_;  // front = most recent
    std::map<CacheKey, std::pair<std::shared_ptr<const LoadedModel>, std::list<CacheKey>::iterator>> cache_;
};

// JSON error body {code, message[, candidates]} with the mapped HTTP status.
HttpResponse error_response(const std::exception& e);

void register_routes(httplib::Server& server, EmbeddingService& service,
                     const std::optional<std::filesystem::path>& static_dir = std::nullopt);

// Owns the HTTP server and a background catalog refresher.
class ApiServer {
public:
    ApiServer(EmbeddingService& service, ApiConfig config);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    // Binds (port 0 picks a free port) and serves on a background thread.
    int start();
    // Blocks serving on the calling thread.
    bool listen();
    void stop();

private:
    EmbeddingService& service_;
    ApiConfig config_;
    std::unique_ptr<httplib::Server> server_;
    std::thread listener_;
    std::jthread refresher_;
};

} // namespace biokg

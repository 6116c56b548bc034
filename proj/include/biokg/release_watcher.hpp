#pragma once

// Release polling: fetch each configured source, compare its SHA-256 with the
// last published version and, on change, retrain every configured model and
// publish a new version atomically.

#include "biokg/clock.hpp"
#include "biokg/config.hpp"
#include "biokg/vector_store.hpp"
#include "biokg/models.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

namespace biokg {

// One attempt at retrieving the full body of `url`. Throws FetchFailed.
using Fetcher = std::function<std::string(const std::string& url)>;

// Local paths, file:// URLs and http(s):// URLs (redirects followed).
Fetcher default_fetcher();

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds initial_backoff{1000};  // doubled after each failure
};

struct FetchResult {
    std::string bytes;
    std::string sha256;
    SysTime retrieved_at{};
};

// Throws FetchFailed after `policy.attempts` failures.
FetchResult fetch(const SourceConfig& source, const Fetcher& fetcher, Clock& clock, RetryPolicy policy = {});

struct UpdateCheck {
    bool changed = false;
    FetchResult fetched;
};

// Changed iff the checksum differs from the most recently published
// manifest's (or nothing has been published yet).
UpdateCheck check_for_update(const SourceConfig& source, std::span<const VersionManifest> history,
                             const Fetcher& fetcher, Clock& clock, RetryPolicy policy = {});

struct ParsedSource {
    KnowledgeGraph graph;
    std::string data_version;
};

// OBO or triple TSV, per `source.format`.
ParsedSource parse_source(const SourceConfig& source, const std::string& bytes);

struct TrainedModel {
    ModelArtifact artifact;
    nlohmann::json hyperparameters;
};

// One model with the source's train / walk / skip-gram / per-model overrides.
TrainedModel train_model(const SourceConfig& source, const KnowledgeGraph& graph, ModelKind kind);

// Parse, build, train every configured model, write PROV and publish. Throws
// PipelineFailed (nothing published) on any failure.
VersionManifest run_pipeline(const SourceConfig& source, const FetchResult& fetched, VectorStore& store,
                             Clock& clock);

class Watcher {
public:
    enum class Outcome { Unchanged, Published, Failed, Skipped };

    struct CycleResult {
        std::string kg_name;
        Outcome outcome = Outcome::Unchanged;
        std::optional<VersionManifest> published;
        std::string error;
    };

    Watcher(std::vector<SourceConfig> sources, VectorStore& store, Fetcher fetcher, Clock& clock,
            RetryPolicy retry = {});

    // Manual trigger: one immediate cycle for every source.
    std::vector<CycleResult> run_once();

    // Sleeps until the earliest due source, then cycles every due source.
    // Returns false if stopped while sleeping.
    bool step(std::stop_token stop = {});

    // One thread per source until `stop` is requested.
    void run(std::stop_token stop);

    // Single cycle for one source; Skipped if that source is already running.
    CycleResult run_cycle(std::size_t source_index);

    // Invoked after each successful publication.
    std::function<void(const VersionManifest&)> on_publish;

    const std::vector<SourceConfig>& sources() const noexcept { return sources_; }

private:
    struct SourceState {
        std::atomic<bool> running{false};
        std::atomic<std::int64_t> next_due_ns{0};
    };

    SysTime next_due(std::size_t i) const;
    void schedule_after(std::size_t i, SysTime cycle_start);

    std::vector<SourceConfig> sources_;
    VectorStore& store_;
    Fetcher fetcher_;
    Clock& clock_;
    RetryPolicy retry_;
    std::vector<std::unique_ptr<SourceState>> state_;
};

std::string_view to_string(Watcher::Outcome outcome) noexcept;

} // namespace biokg

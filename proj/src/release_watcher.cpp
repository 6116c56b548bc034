#include "biokg/release_watcher.hpp"

#include "biokg/checksum.hpp"
#include "biokg/error.hpp"
#include "biokg/log.hpp"
#include "biokg/obo.hpp"
#include "biokg/prov.hpp"
#include "biokg/rdf2vec.hpp"
#include "biokg/trainer.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

namespace biokg {
namespace {

std::string fetch_http(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(300, 0);
    auto res = client.Get(path);
    if (!res)
        throw Error(ErrorCode::FetchFailed, "GET " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error(ErrorCode::FetchFailed, "GET " + url + " returned HTTP " + std::to_string(res->status));
    return std::move(res->body);
}

std::string fetch_local(const std::string& url) {
    std::string path = url.rfind("file://", 0) == 0 ? url.substr(7) : url;
    try {
        return read_file(path);
    } catch (const Error& e) {
        throw Error(ErrorCode::FetchFailed, e.what());
    }
}

std::int64_t to_ns(SysTime t) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

SysTime from_ns(std::int64_t ns) {
    return SysTime(std::chrono::duration_cast<SysTime::duration>(std::chrono::nanoseconds(ns)));
}

} // namespace

ParsedSource parse_source(const SourceConfig& source, const std::string& bytes) {
    if (source.format == SourceFormat::TripleTsv) {
        std::istringstream in(bytes);
        return {read_triples_tsv(in), {}};
    }
    auto doc = parse_obo(bytes);
    auto ingest = to_graph(doc, source.include_obsolete);
    log_info("ingest", {{"kg", source.kg_name},
                        {"terms", std::to_string(ingest.report.terms)},
                        {"obsolete", std::to_string(ingest.report.obsolete)},
                        {"triples", std::to_string(ingest.report.triples)},
                        {"dropped_edges", std::to_string(ingest.report.dropped_edges)}});
    return {std::move(ingest.graph), doc.data_version};
}

TrainedModel train_model(const SourceConfig& source, const KnowledgeGraph& graph, ModelKind kind) {
    TrainConfig base;
    apply_overrides(base, source.train_overrides);
    TrainedModel out;
    if (kind == ModelKind::RDF2Vec) {
        WalkConfig wc;
        SkipGramConfig sg;
        wc.seed = base.seed;
        sg.seed = base.seed;
        sg.dimension = base.dimension;
        sg.epochs = base.epochs;
        apply_overrides(wc, source.walk_overrides);
        apply_overrides(sg, source.skipgram_overrides);
        if (auto it = source.model_overrides.find(kind); it != source.model_overrides.end())
            apply_overrides(sg, it->second);
        out.artifact = rdf2vec_embed(graph, wc, sg);
        out.hyperparameters = to_json(sg);
        out.hyperparameters.update(to_json(wc));
    } else {
        TrainConfig tc = base;
        tc.kind = kind;
        if (auto it = source.model_overrides.find(kind); it != source.model_overrides.end())
            apply_overrides(tc, it->second);
        auto result = train(graph, tc);
        out.artifact = std::move(result.artifact);
        out.hyperparameters = to_json(tc);
        out.hyperparameters["final_loss"] = result.report.epoch_losses.back();
    }
    out.hyperparameters.erase("model");
    return out;
}

namespace {

std::string unique_tag(const std::string& base, const std::vector<VersionManifest>& history) {
    std::set<std::string> taken;
    for (const auto& m : history)
        taken.insert(m.version_tag);
    if (!taken.count(base))
        return base;
    for (int n = 2;; ++n) {
        auto candidate = fmt::format("{}.{}", base, n);
        if (!taken.count(candidate))
            return candidate;
    }
}

} // namespace

Fetcher default_fetcher() {
    return [](const std::string& url) {
        if (url.rfind("http://", 0) == 0 || url.rfind("https://", 0) == 0)
            return fetch_http(url);
        return fetch_local(url);
    };
}

FetchResult fetch(const SourceConfig& source, const Fetcher& fetcher, Clock& clock, RetryPolicy policy) {
    auto backoff = policy.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= policy.attempts; ++attempt) {
        try {
            FetchResult r;
            r.retrieved_at = clock.now();
            r.bytes = fetcher(source.url);
            r.sha256 = sha256_hex(r.bytes);
            log_info("fetch", {{"kg", source.kg_name},
                               {"attempt", std::to_string(attempt)},
                               {"bytes", std::to_string(r.bytes.size())},
                               {"sha256", r.sha256}});
            return r;
        } catch (const std::exception& e) {
            last_error = e.what();
            log_warn("fetch_failed", {{"kg", source.kg_name}, {"attempt", std::to_string(attempt)}, {"error", last_error}});
        }
        if (attempt < policy.attempts) {
            clock.sleep_for(backoff);
            backoff *= 2;
        }
    }
    throw Error(ErrorCode::FetchFailed, fmt::format("{}: giving up after {} attempts: {}", source.kg_name,
                                                    policy.attempts, last_error));
}

UpdateCheck check_for_update(const SourceConfig& source, std::span<const VersionManifest> history,
                             const Fetcher& fetcher, Clock& clock, RetryPolicy policy) {
    UpdateCheck check;
    check.fetched = fetch(source, fetcher, clock, policy);
    check.changed = history.empty() || history.back().sha256 != check.fetched.sha256;
    return check;
}

VersionManifest run_pipeline(const SourceConfig& source, const FetchResult& fetched, VectorStore& store,
                             Clock& clock) {
    std::string stage = "ingest";
    try {
        auto parsed = parse_source(source, fetched.bytes);
        const auto& graph = parsed.graph;
        const auto history = store.history(source.kg_name);
        const auto tag = unique_tag(derive_version_tag(parsed.data_version, fetched.retrieved_at), history);
        const auto labels = labels_from_graph(graph);

        const std::string ontology_id = fmt::format("biokg:{}/{}/source", source.kg_name, tag);
        ProvEntity ontology{ontology_id, ProvEntityKind::Ontology, fetched.sha256,
                            {{"source_url", source.url},
                             {"retrieved_at", format_utc(fetched.retrieved_at)},
                             {"kg", source.kg_name},
                             {"version", tag},
                             {"data_version", parsed.data_version},
                             {"entities", graph.num_entities()},
                             {"relations", graph.num_relations()},
                             {"triples", graph.num_triples()}}};

        std::vector<ModelOutput> outputs;
        for (auto kind : source.models) {
            stage = std::string(to_string(kind));
            const auto started = clock.now();
            auto [artifact, hyper] = train_model(source, graph, kind);
            const auto ended = clock.now();

            ModelOutput out{kind, export_vectors_json(artifact, graph.entities(), source.kg_name, tag), {}};
            const std::string prefix = fmt::format("biokg:{}/{}/{}", source.kg_name, tag, to_string(kind));
            auto prov = ProvRecord::make(
                {ontology,
                 ProvEntity{prefix + "/vectors.json", ProvEntityKind::Embedding, sha256_hex(out.vectors_json),
                            {{"format", "application/json"}, {"dimension", artifact.dimension()}}}},
                {ProvActivity{prefix + "/train", std::string(to_string(kind)), hyper, format_utc(started),
                              format_utc(ended)}},
                {ProvUsage{prefix + "/train", ontology_id}},
                {ProvGeneration{prefix + "/vectors.json", prefix + "/train"}});
            out.prov_json = write_prov(prov).dump(2) + "\n";
            outputs.push_back(std::move(out));
            log_info("trained", {{"kg", source.kg_name}, {"version", tag}, {"model", stage}});
        }

        stage = "publish";
        VersionManifest manifest;
        manifest.kg_name = source.kg_name;
        manifest.version_tag = tag;
        manifest.source_url = source.url;
        manifest.sha256 = fetched.sha256;
        manifest.retrieved_at = fetched.retrieved_at;
        manifest.source_format = source.format == SourceFormat::TripleTsv ? "tsv" : "obo";
        auto published = store.save_version(std::move(manifest), outputs, labels, fetched.bytes);
        log_info("published", {{"kg", source.kg_name}, {"version", tag}, {"models", std::to_string(outputs.size())}});
        return published;
    } catch (const Error& e) {
        throw Error(ErrorCode::PipelineFailed, fmt::format("{} [{}] {}: {}", source.kg_name, stage,
                                                           to_string(e.code()), e.what()));
    } catch (const std::exception& e) {
        throw Error(ErrorCode::PipelineFailed, fmt::format("{} [{}]: {}", source.kg_name, stage, e.what()));
    }
}

std::string_view to_string(Watcher::Outcome outcome) noexcept {
    switch (outcome) {
    case Watcher::Outcome::Unchanged: return "unchanged";
    case Watcher::Outcome::Published: return "published";
    case Watcher::Outcome::Failed: return "failed";
    case Watcher::Outcome::Skipped: return "skipped";
    }
    return "unchanged";
}

Watcher::Watcher(std::vector<SourceConfig> sources, VectorStore& store, Fetcher fetcher, Clock& clock,
                 RetryPolicy retry)
    : sources_(std::move(sources)), store_(store), fetcher_(std::move(fetcher)), clock_(clock), retry_(retry) {
    const auto start = to_ns(clock_.now());
    for (std::size_t i = 0; i < sources_.size(); ++i) {
        state_.push_back(std::make_unique<SourceState>());
        state_.back()->next_due_ns = start;
    }
}

SysTime Watcher::next_due(std::size_t i) const { return from_ns(state_[i]->next_due_ns.load()); }

void Watcher::schedule_after(std::size_t i, SysTime cycle_start) {
    state_[i]->next_due_ns = to_ns(cycle_start + sources_[i].poll_interval);
}

Watcher::CycleResult Watcher::run_cycle(std::size_t i) {
    const auto& source = sources_.at(i);
    CycleResult result;
    result.kg_name = source.kg_name;
    auto& running = state_[i]->running;
    bool expected = false;
    if (!running.compare_exchange_strong(expected, true)) {
        log_warn("cycle_skipped", {{"kg", source.kg_name}, {"reason", "previous run still active"}});
        result.outcome = Outcome::Skipped;
        return result;
    }
    const auto cycle_start = clock_.now();
    try {
        const auto history = store_.history(source.kg_name);
        auto check = check_for_update(source, history, fetcher_, clock_, retry_);
        if (!check.changed) {
            log_info("unchanged", {{"kg", source.kg_name}, {"sha256", check.fetched.sha256}});
            result.outcome = Outcome::Unchanged;
        } else {
            result.published = run_pipeline(source, check.fetched, store_, clock_);
            result.outcome = Outcome::Published;
        }
    } catch (const std::exception& e) {
        result.outcome = Outcome::Failed;
        result.error = e.what();
        log_error("cycle_failed", {{"kg", source.kg_name}, {"error", result.error}});
    }
    schedule_after(i, cycle_start);
    running = false;
    if (result.published && on_publish) {
        try {
            on_publish(*result.published);
        } catch (const std::exception& e) {
            log_error("publish_hook_failed", {{"kg", source.kg_name}, {"error", e.what()}});
        }
    }
    return result;
}

std::vector<Watcher::CycleResult> Watcher::run_once() {
    std::vector<CycleResult> results;
    for (std::size_t i = 0; i < sources_.size(); ++i)
        results.push_back(run_cycle(i));
    return results;
}

bool Watcher::step(std::stop_token stop) {
    if (sources_.empty())
        return false;
    SysTime earliest = next_due(0);
    for (std::size_t i = 1; i < sources_.size(); ++i)
        earliest = std::min(earliest, next_due(i));
    if (!clock_.sleep_until(earliest, stop))
        return false;
    const auto now = clock_.now();
    for (std::size_t i = 0; i < sources_.size(); ++i)
        if (next_due(i) <= now)
            run_cycle(i);
    return true;
}

void Watcher::run(std::stop_token stop) {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < sources_.size(); ++i)
        workers.emplace_back([this, i, stop] {
            while (!stop.stop_requested()) {
                if (!clock_.sleep_until(next_due(i), stop))
                    return;
                run_cycle(i);
            }
        });
}

} // namespace biokg

#include "biokg/cli.hpp"

#include "biokg/config.hpp"
#include "biokg/error.hpp"
#include "biokg/log.hpp"
#include "biokg/obo.hpp"
#include "biokg/release_watcher.hpp"
#include "biokg/service.hpp"
#include "biokg/vector_store.hpp"

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

namespace biokg {
namespace {

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted.store(true); }

// Blocks until SIGINT/SIGTERM, then requests `source` to stop.
void wait_for_signal(std::stop_source& source) {
    g_interrupted.store(false);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted.load() && !source.stop_requested())
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
    source.request_stop();
}

struct Globals {
    std::string store;
    std::string config;
};

std::optional<AppConfig> maybe_config(const Globals& g) {
    std::string path = g.config;
    if (path.empty())
        if (const char* env = std::getenv(kConfigEnvVar))
            path = env;
    if (path.empty())
        return std::nullopt;
    return load_config(path);
}

AppConfig require_config(const Globals& g) {
    auto c = maybe_config(g);
    if (!c)
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("no config file: pass --config or set {}", kConfigEnvVar));
    return *c;
}

std::filesystem::path store_path(const Globals& g, const std::optional<AppConfig>& config) {
    if (!g.store.empty())
        return g.store;
    if (config)
        return config->store_path;
    return "store";
}

ModelKind model_arg(const std::string& name) {
    auto kind = parse_model_kind(name);
    if (!kind)
        throw Error(ErrorCode::InvalidArgument, "unknown model '" + name + "'");
    return *kind;
}

// Service errors arrive as exceptions; rebuild the JSON body on success.
nlohmann::json body_of(const HttpResponse& r) { return nlohmann::json::parse(r.body); }

void write_output(const std::string& path, const std::string& bytes, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << bytes;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    f << bytes;
    if (!f)
        throw Error(ErrorCode::IoFailure, "cannot write " + path);
}

std::string read_input(const std::string& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorCode::NotFound, "no such file: " + path);
    return read_file(path);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Versioned biomedical ontology embeddings", "biokg"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--store", g.store, "Vector store directory (overrides the config file)");
    app.add_option("--config", g.config, std::string("Config file (default: $") + kConfigEnvVar + ")");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse an OBO or triple TSV file and report its graph");
    std::string ingest_path;
    bool ingest_report = false;
    bool ingest_obsolete = false;
    std::string ingest_format;
    ingest->add_option("file", ingest_path, "OBO or TSV file")->required();
    ingest->add_flag("--report", ingest_report, "Print the ingest report as JSON");
    ingest->add_flag("--include-obsolete", ingest_obsolete, "Keep obsolete terms as isolated entities");
    ingest->add_option("--format", ingest_format, "obo or tsv (default: by extension)")
        ->check(CLI::IsMember({"obo", "tsv"}));

    // train
    auto* train_cmd = app.add_subcommand("train", "Retrain one model on a published version's source");
    std::string train_kg, train_version, train_model_name, train_out;
    std::optional<std::uint64_t> train_seed;
    train_cmd->add_option("kg", train_kg)->required();
    train_cmd->add_option("version", train_version)->required();
    train_cmd->add_option("--model", train_model_name, "Model kind")->required();
    train_cmd->add_option("--seed", train_seed, "Random seed");
    train_cmd->add_option("-o,--output", train_out, "Write vectors.json here (default: stdout)");

    // watch
    auto* watch = app.add_subcommand("watch", "Poll configured sources and publish new versions");
    bool watch_once = false;
    watch->add_option("--config", g.config, "Config file");
    watch->add_flag("--once", watch_once, "Run one cycle for every source and exit");

    // serve
    auto* serve = app.add_subcommand("serve", "Serve the REST API");
    bool serve_watch = false;
    std::optional<int> serve_port;
    serve->add_option("--config", g.config, "Config file");
    serve->add_option("--port", serve_port, "Port (overrides the config file)");
    serve->add_flag("--watch", serve_watch, "Also run the release watcher");

    // query
    auto* query = app.add_subcommand("query", "Query a published version");
    query->require_subcommand(1);
    std::string q_kg, q_model, q_version = "latest", q_namespace;
    bool q_json = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("kg", q_kg)->required();
        sub->add_option("model", q_model)->required();
        sub->add_option("--version", q_version, "Version tag or latest");
        sub->add_flag("--json", q_json, "Machine-readable output");
    };
    auto* sim = query->add_subcommand("sim", "Cosine similarity of two concepts");
    std::string sim_a, sim_b;
    common(sim);
    sim->add_option("a", sim_a, "IRI, label or alt id")->required();
    sim->add_option("b", sim_b, "IRI, label or alt id")->required();
    auto* closest = query->add_subcommand("closest", "Most similar concepts");
    std::string closest_q;
    int closest_k = 10;
    common(closest);
    closest->add_option("concept", closest_q, "IRI, label or alt id")->required();
    closest->add_option("-k", closest_k, "Number of rows")->check(CLI::Range(1, 100));
    closest->add_option("--namespace", q_namespace, "Only rows from this ontology namespace");

    // export
    auto* export_cmd = app.add_subcommand("export", "Copy a published vectors.json");
    std::string ex_kg, ex_version, ex_model, ex_out;
    export_cmd->add_option("kg", ex_kg)->required();
    export_cmd->add_option("version", ex_version)->required();
    export_cmd->add_option("model", ex_model)->required();
    export_cmd->add_option("-o,--output", ex_out, "Destination path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*ingest) {
            SourceConfig source;
            source.kg_name = "cli";
            source.url = ingest_path;
            source.include_obsolete = ingest_obsolete;
            const bool tsv = ingest_format.empty() ? ingest_path.ends_with(".tsv") : ingest_format == "tsv";
            source.format = tsv ? SourceFormat::TripleTsv : SourceFormat::Obo;
            const auto bytes = read_input(ingest_path);
            IngestReport report;
            std::string data_version;
            if (tsv) {
                auto parsed = parse_source(source, bytes);
                report.terms = parsed.graph.num_entities();
                report.triples = parsed.graph.num_triples();
            } else {
                const auto doc = parse_obo(bytes);
                report = to_graph(doc, ingest_obsolete).report;
                data_version = doc.data_version;
            }
            if (ingest_report) {
                auto j = to_json(report);
                if (!data_version.empty())
                    j["data_version"] = data_version;
                out << j.dump(2) << "\n";
            } else {
                out << fmt::format("terms={} obsolete={} triples={} dropped_edges={}\n", report.terms,
                                   report.obsolete, report.triples, report.dropped_edges);
            }
            return 0;
        }

        if (*train_cmd) {
            const auto config = maybe_config(g);
            VectorStore store(store_path(g, config));
            const auto kind = model_arg(train_model_name);
            const auto manifest = store.resolve(train_kg, train_version);
            SourceConfig source;
            source.kg_name = train_kg;
            source.url = manifest.source_url;
            if (config)
                for (const auto& s : config->sources)
                    if (s.kg_name == train_kg)
                        source = s;
            source.format = manifest.source_format == "tsv" ? SourceFormat::TripleTsv : SourceFormat::Obo;
            if (train_seed)
                source.train_overrides["seed"] = *train_seed;
            const auto parsed = parse_source(source, store.read_source_file(train_kg, manifest.version_tag));
            auto trained = train_model(source, parsed.graph, kind);
            write_output(train_out,
                         export_vectors_json(trained.artifact, parsed.graph.entities(), train_kg,
                                             manifest.version_tag),
                         out);
            return 0;
        }

        if (*watch) {
            const auto config = require_config(g);
            VectorStore store(store_path(g, config));
            SystemClock clock;
            Watcher watcher(config.sources, store, default_fetcher(), clock);
            if (watch_once) {
                bool failed = false;
                for (const auto& r : watcher.run_once()) {
                    out << r.kg_name << "\t" << to_string(r.outcome);
                    if (r.published)
                        out << "\t" << r.published->version_tag;
                    if (!r.error.empty())
                        out << "\t" << r.error;
                    out << "\n";
                    failed = failed || r.outcome == Watcher::Outcome::Failed;
                }
                return failed ? 2 : 0;
            }
            std::stop_source stop;
            std::jthread runner([&] { watcher.run(stop.get_token()); });
            wait_for_signal(stop);
            return 0;
        }

        if (*serve) {
            auto config = require_config(g);
            if (serve_port)
                config.api.port = *serve_port;
            VectorStore store(store_path(g, config));
            EmbeddingService service(store, config.api.cache_capacity);
            ApiServer server(service, config.api);
            SystemClock clock;
            Watcher watcher(config.sources, store, default_fetcher(), clock);
            watcher.on_publish = [&](const VersionManifest&) { service.refresh(); };
            std::stop_source stop;
            std::jthread runner;
            if (serve_watch)
                runner = std::jthread([&] { watcher.run(stop.get_token()); });
            server.start();
            wait_for_signal(stop);
            server.stop();
            return 0;
        }

        if (*query) {
            const auto config = maybe_config(g);
            EmbeddingService service(VectorStore(store_path(g, config)));
            QueryParams params{{"version", q_version}};
            if (*sim) {
                params.emplace("a", sim_a);
                params.emplace("b", sim_b);
                const auto body = body_of(service.get_similarity(q_kg, q_model, params));
                if (q_json) {
                    out << body.dump() << "\n";
                } else {
                    out << fmt::format("{} ({})\n{} ({})\nscore  {:.6f}\nversion {}\n", body["a"].get<std::string>(),
                                       body["a_label"].get<std::string>(), body["b"].get<std::string>(),
                                       body["b_label"].get<std::string>(), body["score"].get<double>(),
                                       body["version"].get<std::string>());
                }
                return 0;
            }
            params.emplace("q", closest_q);
            params.emplace("k", std::to_string(closest_k));
            if (!q_namespace.empty())
                params.emplace("namespace", q_namespace);
            const auto body = body_of(service.get_closest(q_kg, q_model, params));
            if (q_json) {
                out << body.dump() << "\n";
                return 0;
            }
            std::size_t iri_w = 3, label_w = 5;
            for (const auto& row : body["rows"]) {
                iri_w = std::max(iri_w, row["iri"].get<std::string>().size());
                label_w = std::max(label_w, row["label"].get<std::string>().size());
            }
            out << fmt::format("query {} ({}) version {}\n", body["query"].get<std::string>(),
                               body["label"].get<std::string>(), body["version"].get<std::string>());
            out << fmt::format("{:>4}  {:<{}}  {:<{}}  {:>9}  {}\n", "rank", "iri", iri_w, "label", label_w, "score",
                               "url");
            std::size_t rank = 1;
            for (const auto& row : body["rows"])
                out << fmt::format("{:>4}  {:<{}}  {:<{}}  {:>9.6f}  {}\n", rank++, row["iri"].get<std::string>(),
                                   iri_w, row["label"].get<std::string>(), label_w, row["score"].get<double>(),
                                   row["url"].get<std::string>());
            return 0;
        }

        if (*export_cmd) {
            const auto config = maybe_config(g);
            VectorStore store(store_path(g, config));
            const auto bytes = store.read_vectors_file(ex_kg, ex_version, model_arg(ex_model));
            write_file_atomic(ex_out, bytes);
            return 0;
        }
    } catch (const AmbiguousLabelError& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        for (const auto& c : e.candidates())
            err << "  candidate: " << c << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return is_user_error(e.code()) ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace biokg

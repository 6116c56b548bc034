#include "biokg/config.hpp"

#include "biokg/error.hpp"
#include "biokg/vector_store.hpp"

#include <algorithm>
#include <set>

namespace biokg {
namespace {

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCode::InvalidArgument, message); }

ModelKind model_or_throw(const std::string& name) {
    auto kind = parse_model_kind(name);
    if (!kind)
        bad("unknown model '" + name + "'");
    return *kind;
}

bool ends_with(const std::string& s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

} // namespace

SourceConfig parse_source_config(const nlohmann::json& j) {
    try {
        SourceConfig s;
        s.kg_name = j.at("kg_name").get<std::string>();
        if (!is_valid_name(s.kg_name))
            bad("invalid kg_name '" + s.kg_name + "'");
        s.url = j.at("url").get<std::string>();
        if (s.url.empty())
            bad("source " + s.kg_name + " has an empty url");
        if (j.contains("poll_interval_seconds"))
            s.poll_interval = std::chrono::seconds(j.at("poll_interval_seconds").get<std::int64_t>());
        if (s.poll_interval < std::chrono::minutes(1))
            bad("poll interval of " + s.kg_name + " must be at least 60 seconds");
        if (j.contains("models")) {
            s.models.clear();
            for (const auto& m : j.at("models")) {
                const auto kind = model_or_throw(m.get<std::string>());
                if (std::find(s.models.begin(), s.models.end(), kind) != s.models.end())
                    bad("model listed twice for " + s.kg_name);
                s.models.push_back(kind);
            }
            if (s.models.empty())
                bad("source " + s.kg_name + " configures no models");
        }
        const auto format = j.value("format", std::string(ends_with(s.url, ".tsv") ? "tsv" : "obo"));
        if (format == "obo")
            s.format = SourceFormat::Obo;
        else if (format == "tsv")
            s.format = SourceFormat::TripleTsv;
        else
            bad("unknown source format '" + format + "'");
        s.include_obsolete = j.value("include_obsolete", false);
        if (j.contains("train"))
            s.train_overrides = j.at("train");
        if (j.contains("walks"))
            s.walk_overrides = j.at("walks");
        if (j.contains("skipgram"))
            s.skipgram_overrides = j.at("skipgram");
        if (j.contains("model_overrides"))
            for (const auto& [name, o] : j.at("model_overrides").items())
                s.model_overrides[model_or_throw(name)] = o;
        return s;
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("invalid source config: ") + e.what());
    }
}

AppConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    auto resolve = [&](const std::filesystem::path& p) {
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    try {
        AppConfig c;
        std::set<std::string> names;
        for (const auto& s : j.value("sources", nlohmann::json::array())) {
            auto source = parse_source_config(s);
            if (!names.insert(source.kg_name).second)
                bad("duplicate kg_name '" + source.kg_name + "'");
            c.sources.push_back(std::move(source));
        }
        c.store_path = resolve(j.value("store_path", std::string("store")));
        if (j.contains("api")) {
            const auto& api = j.at("api");
            c.api.host = api.value("host", c.api.host);
            c.api.port = api.value("port", c.api.port);
            c.api.cache_capacity = api.value("cache_capacity", c.api.cache_capacity);
            c.api.refresh_interval = std::chrono::seconds(api.value("refresh_seconds", std::int64_t{5}));
            if (api.contains("static_dir"))
                c.api.static_dir = resolve(api.at("static_dir").get<std::string>());
            if (c.api.cache_capacity < 1)
                bad("api.cache_capacity must be >= 1");
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("invalid config: ") + e.what());
    }
}

AppConfig load_config(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw Error(ErrorCode::NotFound, "config file not found: " + path.string());
    const auto text = read_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        bad("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(j, path.parent_path());
}

} // namespace biokg

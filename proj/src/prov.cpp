#include "biokg/prov.hpp"

#include "biokg/error.hpp"

#include <map>
#include <set>

namespace biokg {
namespace {

constexpr const char* kTypeOntology = "biokg:Ontology";
constexpr const char* kTypeEmbedding = "biokg:Embedding";

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorCode::InvalidProv, message); }

} // namespace

ProvRecord ProvRecord::make(std::vector<ProvEntity> entities, std::vector<ProvActivity> activities,
                            std::vector<ProvUsage> used, std::vector<ProvGeneration> generated) {
    std::map<std::string, ProvEntityKind> entity_kind;
    std::set<std::string> activity_ids;
    for (const auto& e : entities) {
        if (e.id.empty())
            invalid("entity with empty id");
        if (!entity_kind.emplace(e.id, e.kind).second)
            invalid("duplicate entity id " + e.id);
    }
    for (const auto& a : activities) {
        if (a.id.empty())
            invalid("activity with empty id");
        if (entity_kind.count(a.id) || !activity_ids.insert(a.id).second)
            invalid("duplicate activity id " + a.id);
    }

    std::map<std::string, int> uses_per_activity;
    for (const auto& u : used) {
        if (!activity_ids.count(u.activity))
            invalid("used link names unknown activity " + u.activity);
        auto it = entity_kind.find(u.entity);
        if (it == entity_kind.end())
            invalid("used link names unknown entity " + u.entity);
        if (it->second != ProvEntityKind::Ontology)
            invalid("activity " + u.activity + " uses a non-ontology entity " + u.entity);
        ++uses_per_activity[u.activity];
    }
    for (const auto& id : activity_ids)
        if (uses_per_activity[id] != 1)
            invalid("activity " + id + " must use exactly one ontology entity");

    std::map<std::string, int> generators;
    for (const auto& g : generated) {
        if (!activity_ids.count(g.activity))
            invalid("generation link names unknown activity " + g.activity);
        auto it = entity_kind.find(g.entity);
        if (it == entity_kind.end())
            invalid("generation link names unknown entity " + g.entity);
        if (it->second != ProvEntityKind::Embedding)
            invalid("only embeddings are generated, not " + g.entity);
        ++generators[g.entity];
    }
    for (const auto& [id, kind] : entity_kind)
        if (kind == ProvEntityKind::Embedding && generators[id] != 1)
            invalid("embedding " + id + " must have exactly one generating activity");

    ProvRecord r;
    r.entities_ = std::move(entities);
    r.activities_ = std::move(activities);
    r.used_ = std::move(used);
    r.generated_ = std::move(generated);
    return r;
}

ProvRecord ProvRecord::merge(const std::vector<ProvRecord>& records) {
    std::vector<ProvEntity> entities;
    std::vector<ProvActivity> activities;
    std::vector<ProvUsage> used;
    std::vector<ProvGeneration> generated;
    std::map<std::string, std::string> shared_ontology;  // id -> checksum
    for (const auto& rec : records) {
        for (const auto& e : rec.entities_) {
            if (e.kind == ProvEntityKind::Ontology) {
                auto [it, inserted] = shared_ontology.emplace(e.id, e.checksum);
                if (!inserted) {
                    if (it->second != e.checksum)
                        invalid("ontology entity " + e.id + " appears with different checksums");
                    continue;
                }
            }
            entities.push_back(e);
        }
        activities.insert(activities.end(), rec.activities_.begin(), rec.activities_.end());
        used.insert(used.end(), rec.used_.begin(), rec.used_.end());
        generated.insert(generated.end(), rec.generated_.begin(), rec.generated_.end());
    }
    return make(std::move(entities), std::move(activities), std::move(used), std::move(generated));
}

nlohmann::json write_prov(const ProvRecord& record) {
    nlohmann::json doc;
    doc["prefix"] = {{"prov", "http://www.w3.org/ns/prov#"}, {"biokg", "urn:biokg:"}};
    doc["entity"] = nlohmann::json::object();
    for (const auto& e : record.entities()) {
        nlohmann::json attrs = e.attributes.is_object() ? e.attributes : nlohmann::json::object();
        attrs["prov:type"] = e.kind == ProvEntityKind::Ontology ? kTypeOntology : kTypeEmbedding;
        attrs["checksum"] = e.checksum;
        doc["entity"][e.id] = std::move(attrs);
    }
    doc["activity"] = nlohmann::json::object();
    for (const auto& a : record.activities()) {
        nlohmann::json attrs = a.hyperparameters.is_object() ? a.hyperparameters : nlohmann::json::object();
        attrs["model"] = a.model;
        attrs["prov:startTime"] = a.started_at;
        attrs["prov:endTime"] = a.ended_at;
        doc["activity"][a.id] = std::move(attrs);
    }
    doc["used"] = nlohmann::json::object();
    std::size_t n = 0;
    for (const auto& u : record.used())
        doc["used"]["_:u" + std::to_string(++n)] = {{"prov:activity", u.activity}, {"prov:entity", u.entity}};
    doc["wasGeneratedBy"] = nlohmann::json::object();
    n = 0;
    for (const auto& g : record.generated())
        doc["wasGeneratedBy"]["_:g" + std::to_string(++n)] = {{"prov:entity", g.entity},
                                                               {"prov:activity", g.activity}};
    return doc;
}

ProvRecord read_prov(const nlohmann::json& doc) {
    try {
        std::vector<ProvEntity> entities;
        for (const auto& [id, attrs] : doc.at("entity").items()) {
            ProvEntity e;
            e.id = id;
            const auto type = attrs.at("prov:type").get<std::string>();
            if (type == kTypeOntology)
                e.kind = ProvEntityKind::Ontology;
            else if (type == kTypeEmbedding)
                e.kind = ProvEntityKind::Embedding;
            else
                invalid("unknown entity type " + type);
            e.checksum = attrs.value("checksum", "");
            e.attributes = attrs;
            e.attributes.erase("prov:type");
            e.attributes.erase("checksum");
            entities.push_back(std::move(e));
        }
        std::vector<ProvActivity> activities;
        for (const auto& [id, attrs] : doc.at("activity").items()) {
            ProvActivity a;
            a.id = id;
            a.model = attrs.at("model").get<std::string>();
            a.started_at = attrs.value("prov:startTime", "");
            a.ended_at = attrs.value("prov:endTime", "");
            a.hyperparameters = attrs;
            for (const char* k : {"model", "prov:startTime", "prov:endTime"})
                a.hyperparameters.erase(k);
            activities.push_back(std::move(a));
        }
        std::vector<ProvUsage> used;
        for (const auto& [_, link] : doc.at("used").items())
            used.push_back({link.at("prov:activity").get<std::string>(), link.at("prov:entity").get<std::string>()});
        std::vector<ProvGeneration> generated;
        for (const auto& [_, link] : doc.at("wasGeneratedBy").items())
            generated.push_back(
                {link.at("prov:entity").get<std::string>(), link.at("prov:activity").get<std::string>()});
        return ProvRecord::make(std::move(entities), std::move(activities), std::move(used), std::move(generated));
    } catch (const nlohmann::json::exception& e) {
        invalid(std::string("malformed PROV document: ") + e.what());
    }
}

} // namespace biokg

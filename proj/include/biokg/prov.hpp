#pragma once

// W3C PROV records for trained embeddings, serialized in the PROV-JSON shape
// (sections "entity", "activity", "used", "wasGeneratedBy").

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace biokg {

enum class ProvEntityKind { Ontology, Embedding };

struct ProvEntity {
    std::string id;
    ProvEntityKind kind = ProvEntityKind::Ontology;
    std::string checksum;  // sha256 hex of the file
    nlohmann::json attributes = nlohmann::json::object();
};

struct ProvActivity {
    std::string id;
    std::string model;
    nlohmann::json hyperparameters = nlohmann::json::object();
    std::string started_at;
    std::string ended_at;
};

struct ProvUsage {
    std::string activity;
    std::string entity;
};

struct ProvGeneration {
    std::string entity;
    std::string activity;
};

class ProvRecord {
public:
    // Validates: unique ids, links reference known nodes, every embedding has
    // exactly one generating activity, every activity uses exactly one
    // ontology entity. Throws InvalidProv.
    static ProvRecord make(std::vector<ProvEntity> entities, std::vector<ProvActivity> activities,
                           std::vector<ProvUsage> used, std::vector<ProvGeneration> generated);

    const std::vector<ProvEntity>& entities() const noexcept { return entities_; }
    const std::vector<ProvActivity>& activities() const noexcept { return activities_; }
    const std::vector<ProvUsage>& used() const noexcept { return used_; }
    const std::vector<ProvGeneration>& generated() const noexcept { return generated_; }

    // Concatenates records sharing ontology entities by id; re-validated.
    static ProvRecord merge(const std::vector<ProvRecord>& records);

private:
    std::vector<ProvEntity> entities_;
    std::vector<ProvActivity> activities_;
    std::vector<ProvUsage> used_;
    std::vector<ProvGeneration> generated_;
};

nlohmann::json write_prov(const ProvRecord& record);
// Throws InvalidProv.
ProvRecord read_prov(const nlohmann::json& doc);

} // namespace biokg

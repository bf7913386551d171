#pragma once

#include "commgraph/dynamics.hpp"
#include "commgraph/forest.hpp"
#include "commgraph/thematic.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace commgraph {

/// Tool defaults, overridable by a JSON config file:
/// {"dynamics": {...}, "categories": [...], "forest": {...}, "fadeThreshold": 0.5}
struct Config {
    DynamicsParams dynamics;
    CategorySet categories = CategorySet::defaults();
    ForestConfig forest;
    double fadeThreshold = 0.5;

    static Config fromJson(const nlohmann::json& doc);
    static Config loadFile(const std::string& path);
};

nlohmann::json toJson(const DynamicsParams& params);
DynamicsParams dynamicsFromJson(const nlohmann::json& doc, DynamicsParams base = {});

} // namespace commgraph

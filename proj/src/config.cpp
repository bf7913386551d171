#include "commgraph/config.hpp"

#include <fstream>

namespace commgraph {

using nlohmann::json;

json toJson(const DynamicsParams& p) {
    return {{"mu", p.mu}, {"sigma", p.sigma}, {"h", p.h}, {"theta", p.theta}, {"minMessages", p.minMessages}};
}

DynamicsParams dynamicsFromJson(const json& doc, DynamicsParams base) {
    if (!doc.is_object()) throw UsageError("dynamics settings must be an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        if (k == "minMessages") {
            if (!it->is_number_integer()) throw LevelError("dynamics", k, "expected an integer");
            base.minMessages = it->get<int>();
            continue;
        }
        if (!it->is_number()) throw LevelError("dynamics", k, "expected a number");
        const double v = it->get<double>();
        if (k == "mu") base.mu = v;
        else if (k == "sigma") base.sigma = v;
        else if (k == "h") base.h = v;
        else if (k == "theta") base.theta = v;
        else throw LevelError("dynamics", k, "unknown field");
    }
    base.validate();
    return base;
}

Config Config::fromJson(const json& doc) {
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    Config c;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& k = it.key();
        if (k == "dynamics") c.dynamics = dynamicsFromJson(*it, c.dynamics);
        else if (k == "forest") c.forest = forestConfigFromJson(*it, c.forest);
        else if (k == "categories") {
            if (!it->is_array()) throw UsageError("config 'categories' must be a list of names");
            std::vector<std::string> names;
            for (const json& n : *it) {
                if (!n.is_string()) throw UsageError("config 'categories' must be a list of names");
                names.push_back(n.get<std::string>());
            }
            c.categories = CategorySet(std::move(names));
        } else if (k == "fadeThreshold") {
            if (!it->is_number()) throw UsageError("config 'fadeThreshold' must be a number");
            c.fadeThreshold = it->get<double>();
            if (!(c.fadeThreshold >= 0 && c.fadeThreshold <= 1)) throw UsageError("config 'fadeThreshold' must lie in [0, 1]");
        } else {
            throw UsageError("unknown config key '" + k + "'");
        }
    }
    return c;
}

Config Config::loadFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    try {
        return fromJson(json::parse(in));
    } catch (const json::exception& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

} // namespace commgraph

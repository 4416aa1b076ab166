#include "ambigate/affordance.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "ambigate/errors.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

AffordanceKB AffordanceKB::from_facts(std::vector<AffordanceFact> facts) {
    AffordanceKB kb;
    for (auto& fact : facts) {
        if (fact.tool.empty() || fact.action.empty() || fact.object.empty()) {
            throw ParseError("empty-token", "affordance fact with an empty token");
        }
        if (kb.index_.insert(fact).second) {
            kb.facts_.push_back(std::move(fact));
        }
    }
    return kb;
}

bool AffordanceKB::can_perform(std::string_view tool, std::string_view action,
                               std::string_view object) const {
    return index_.count(AffordanceFact{std::string(tool), std::string(action),
                                       std::string(object)}) != 0;
}

std::vector<AffordanceFact> AffordanceKB::matching_facts(const SlotValue& tool,
                                                         std::string_view action,
                                                         const SlotValue& target) const {
    std::vector<AffordanceFact> matches;
    for (const auto& fact : facts_) {
        if (fact.action != action) continue;
        if (tool.is_specified() && fact.tool != tool.label()) continue;
        if (target.is_specified() && fact.object != target.label()) continue;
        matches.push_back(fact);
    }
    return matches;
}

std::vector<std::string> AffordanceKB::tools_for(std::string_view action,
                                                 std::string_view object) const {
    std::vector<std::string> tools;
    for (const auto& fact : facts_) {
        if (fact.action == action && fact.object == object &&
            std::find(tools.begin(), tools.end(), fact.tool) == tools.end()) {
            tools.push_back(fact.tool);
        }
    }
    return tools;
}

std::vector<std::string> AffordanceKB::targets_for(std::string_view tool,
                                                   std::string_view action) const {
    std::vector<std::string> targets;
    for (const auto& fact : facts_) {
        if (fact.tool == tool && fact.action == action &&
            std::find(targets.begin(), targets.end(), fact.object) == targets.end()) {
            targets.push_back(fact.object);
        }
    }
    return targets;
}

AffordanceKB parse_kb(std::string_view document) {
    ordered_json root;
    try {
        root = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed", std::string("kb document: ") + e.what());
    }
    if (!root.is_array()) {
        throw ParseError("malformed", "kb document must be a JSON array");
    }
    std::vector<AffordanceFact> facts;
    facts.reserve(root.size());
    for (const auto& node : root) {
        if (!node.is_object()) {
            throw ParseError("malformed", "kb fact must be an object");
        }
        for (const auto& [key, _] : node.items()) {
            if (key != "tool" && key != "action" && key != "object") {
                throw ParseError("malformed", "unknown key '" + key + "' in kb fact");
            }
        }
        AffordanceFact fact;
        const std::pair<const char*, std::string*> fields[] = {
            {"tool", &fact.tool}, {"action", &fact.action}, {"object", &fact.object}};
        for (const auto& [key, dest] : fields) {
            if (!node.contains(key) || !node.at(key).is_string()) {
                throw ParseError("malformed",
                                 std::string("kb fact needs string '") + key + "'");
            }
            *dest = node.at(key).get<std::string>();
        }
        facts.push_back(std::move(fact));
    }
    return AffordanceKB::from_facts(std::move(facts));
}

std::string serialize_kb(const AffordanceKB& kb) {
    ordered_json root = ordered_json::array();
    for (const auto& fact : kb.facts()) {
        ordered_json node;
        node["tool"] = fact.tool;
        node["action"] = fact.action;
        node["object"] = fact.object;
        root.push_back(std::move(node));
    }
    return root.dump(2) + "\n";
}

}  // namespace ambigate

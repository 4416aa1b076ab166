#include "ambigate/scene.hpp"

#include <algorithm>
#include <set>

#include "ambigate/errors.hpp"
#include "ambigate/json_conv.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(EntityKind kind) {
    return kind == EntityKind::Tool ? "tool" : "anatomy";
}

const StateValue* Entity::state(std::string_view predicate) const {
    for (const auto& [name, value] : states) {
        if (name == predicate) {
            return &value;
        }
    }
    return nullptr;
}

const Entity* SceneDescription::find(std::string_view id) const {
    for (const auto& entity : entities) {
        if (entity.id == id) {
            return &entity;
        }
    }
    return nullptr;
}

void validate_scene(const SceneDescription& scene) {
    std::set<std::string> ids;
    for (const auto& entity : scene.entities) {
        if (!ids.insert(entity.id).second) {
            throw ParseError("duplicate-id",
                             "duplicate entity id '" + entity.id + "' in scene '" +
                                 scene.scene_id + "'");
        }
    }
    for (const auto& entity : scene.entities) {
        for (const auto& [predicate, value] : entity.states) {
            const bool is_holding = predicate == "holding";
            const bool is_held_by = predicate == "held_by";
            if (is_holding && entity.kind != EntityKind::Tool) {
                throw ParseError("kind-restriction",
                                 "'holding' state on anatomy entity '" + entity.id + "'");
            }
            if (is_held_by && entity.kind != EntityKind::Anatomy) {
                throw ParseError("kind-restriction",
                                 "'held_by' state on tool entity '" + entity.id + "'");
            }
            if (is_holding || is_held_by) {
                const auto* ref = std::get_if<std::string>(&value);
                if (ref == nullptr) {
                    throw ParseError("malformed",
                                     "'" + predicate + "' on '" + entity.id +
                                         "' must name an entity id");
                }
                if (scene.find(*ref) == nullptr) {
                    throw ParseError("dangling-reference",
                                     "'" + predicate + "' on '" + entity.id +
                                         "' refers to unknown entity '" + *ref + "'");
                }
            }
        }
    }
}

namespace {

// Schema-checked extraction helpers. Unknown keys are rejected so that a
// round-tripped document cannot silently drop information.

void require_keys(const ordered_json& obj, std::initializer_list<const char*> keys,
                  const char* what) {
    for (const char* key : keys) {
        if (!obj.contains(key)) {
            throw ParseError("malformed",
                             std::string(what) + " is missing key '" + key + "'");
        }
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(keys.begin(), keys.end(), [&](const char* k) {
                return key == k;
            }) == keys.end()) {
            throw ParseError("malformed",
                             std::string("unknown key '") + key + "' in " + what);
        }
    }
}

std::string require_string(const ordered_json& value, const char* what) {
    if (!value.is_string()) {
        throw ParseError("malformed", std::string(what) + " must be a string");
    }
    return value.get<std::string>();
}

Entity parse_entity(const ordered_json& node) {
    if (!node.is_object()) {
        throw ParseError("malformed", "entity must be an object");
    }
    require_keys(node, {"id", "label", "kind", "states"}, "entity");

    Entity entity;
    entity.id = require_string(node.at("id"), "entity id");
    entity.label = require_string(node.at("label"), "entity label");
    if (entity.id.empty() || entity.label.empty()) {
        throw ParseError("malformed", "entity id and label must be non-empty");
    }

    const std::string kind = require_string(node.at("kind"), "entity kind");
    if (kind == "tool") {
        entity.kind = EntityKind::Tool;
    } else if (kind == "anatomy") {
        entity.kind = EntityKind::Anatomy;
    } else {
        throw ParseError("malformed", "entity kind must be 'tool' or 'anatomy', got '" +
                                          kind + "'");
    }

    const auto& states = node.at("states");
    if (!states.is_object()) {
        throw ParseError("malformed", "entity states must be an object");
    }
    for (const auto& [predicate, value] : states.items()) {
        if (predicate.empty()) {
            throw ParseError("malformed", "state predicate must be non-empty");
        }
        if (value.is_string()) {
            entity.states.emplace_back(predicate, value.get<std::string>());
        } else if (value.is_boolean()) {
            entity.states.emplace_back(predicate, value.get<bool>());
        } else {
            throw ParseError("malformed", "state '" + predicate +
                                              "' must be a string or boolean");
        }
    }
    return entity;
}

}  // namespace

SceneDescription scene_from_json(const ordered_json& root) {
    if (!root.is_object()) {
        throw ParseError("malformed", "scene document must be a JSON object");
    }
    require_keys(root, {"scene_id", "entities"}, "scene document");

    SceneDescription scene;
    scene.scene_id = require_string(root.at("scene_id"), "scene_id");
    const auto& entities = root.at("entities");
    if (!entities.is_array()) {
        throw ParseError("malformed", "'entities' must be an array");
    }
    scene.entities.reserve(entities.size());
    for (const auto& node : entities) {
        scene.entities.push_back(parse_entity(node));
    }
    validate_scene(scene);
    return scene;
}

ordered_json scene_to_json(const SceneDescription& scene) {
    ordered_json root;
    root["scene_id"] = scene.scene_id;
    ordered_json entities = ordered_json::array();
    for (const auto& entity : scene.entities) {
        ordered_json node;
        node["id"] = entity.id;
        node["label"] = entity.label;
        node["kind"] = std::string(to_string(entity.kind));
        ordered_json states = ordered_json::object();
        for (const auto& [predicate, value] : entity.states) {
            if (const auto* text = std::get_if<std::string>(&value)) {
                states[predicate] = *text;
            } else {
                states[predicate] = std::get<bool>(value);
            }
        }
        node["states"] = std::move(states);
        entities.push_back(std::move(node));
    }
    root["entities"] = std::move(entities);
    return root;
}

SceneDescription parse_scene(std::string_view document) {
    ordered_json root;
    try {
        root = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed", std::string("scene document: ") + e.what());
    }
    return scene_from_json(root);
}

std::string serialize_scene(const SceneDescription& scene) {
    return scene_to_json(scene).dump(2) + "\n";
}

std::vector<std::string> present_tools(const SceneDescription& scene) {
    std::vector<std::string> labels;
    for (const auto& entity : scene.entities) {
        if (entity.kind == EntityKind::Tool) {
            labels.push_back(entity.label);
        }
    }
    return labels;
}

std::vector<std::string> present_objects(const SceneDescription& scene) {
    std::vector<std::string> labels;
    for (const auto& entity : scene.entities) {
        if (entity.kind == EntityKind::Anatomy) {
            labels.push_back(entity.label);
        }
    }
    return labels;
}

std::optional<StateValue> entity_state(const SceneDescription& scene,
                                       std::string_view id,
                                       std::string_view predicate) {
    const Entity* entity = scene.find(id);
    if (entity == nullptr) {
        throw Error("unknown-id", "unknown entity id '" + std::string(id) + "'");
    }
    if (const StateValue* value = entity->state(predicate)) {
        return *value;
    }
    return std::nullopt;
}

}  // namespace ambigate

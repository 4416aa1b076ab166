#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace ambigate {

enum class EntityKind { Tool, Anatomy };

std::string_view to_string(EntityKind kind);

// A state value is either a free-form token / entity id, or a boolean.
using StateValue = std::variant<std::string, bool>;

// One detected tool or anatomical structure. State predicates are an open
// vocabulary; only "holding" (Tool) and "held_by" (Anatomy) are reference
// valued and kind restricted.
struct Entity {
    std::string id;
    std::string label;
    EntityKind kind = EntityKind::Tool;
    // Predicate -> value, in document order. Scenes are small; lookups are
    // linear.
    std::vector<std::pair<std::string, StateValue>> states;

    const StateValue* state(std::string_view predicate) const;
};

// The structured output contract of the vision stage. Entity order is
// preserved exactly as read; it is the global tie-break order downstream.
struct SceneDescription {
    std::string scene_id;
    std::vector<Entity> entities;

    const Entity* find(std::string_view id) const;
};

// Checks all SceneDescription invariants (unique ids, reference integrity
// of holding/held_by, kind restrictions). Throws ParseError with codes
// "duplicate-id", "dangling-reference" or "kind-restriction".
void validate_scene(const SceneDescription& scene);

// Parses and validates a scene document. Throws ParseError; malformed
// JSON or schema violations carry code "malformed".
SceneDescription parse_scene(std::string_view document);

// Canonical serialization; parse_scene(serialize_scene(s)) == s and the
// output is byte-stable for a given scene.
std::string serialize_scene(const SceneDescription& scene);

// Labels of kind=Tool entities in scene order, duplicates preserved.
std::vector<std::string> present_tools(const SceneDescription& scene);

// Labels of kind=Anatomy entities in scene order, duplicates preserved.
std::vector<std::string> present_objects(const SceneDescription& scene);

// Value of `predicate` on entity `id`, or nullopt when the entity carries
// no such state. Throws Error("unknown-id") for an id not in the scene.
std::optional<StateValue> entity_state(const SceneDescription& scene,
                                       std::string_view id,
                                       std::string_view predicate);

}  // namespace ambigate

#pragma once

#include <nlohmann/json.hpp>

#include "ambigate/scene.hpp"

namespace ambigate {

// JSON tree conversions shared by the standalone scene file format and the
// dataset JSON-lines format (which embeds scenes inline).

nlohmann::ordered_json scene_to_json(const SceneDescription& scene);

// Validates the schema and the scene invariants; throws ParseError.
SceneDescription scene_from_json(const nlohmann::ordered_json& node);

}  // namespace ambigate

#include "ambigate/reasoning.hpp"

#include <algorithm>

namespace ambigate {

namespace {

std::vector<std::string> distinct_in_order(const std::vector<std::string>& labels) {
    std::vector<std::string> out;
    for (const auto& label : labels) {
        if (std::find(out.begin(), out.end(), label) == out.end()) {
            out.push_back(label);
        }
    }
    return out;
}

std::string quote(std::string_view token) {
    return "'" + std::string(token) + "'";
}

std::string slot_text(const SlotValue& slot) {
    return slot.is_specified() ? quote(slot.label()) : std::string("?");
}

std::string comma_list(const std::vector<std::string>& tokens) {
    if (tokens.empty()) {
        return "none";
    }
    std::string out;
    for (const auto& token : tokens) {
        if (!out.empty()) {
            out += ", ";
        }
        out += token;
    }
    return out;
}

std::string flag_text(const char* name, bool value) {
    return std::string(name) + "=" + (value ? "1" : "0");
}

}  // namespace

std::string render_trace(const ReasoningTrace& trace) {
    std::string out;
    for (const auto& step : trace) {
        out += "[" + step.name + "] " + step.detail + " => " + step.outcome + "\n";
    }
    return out;
}

DisambiguationResult reason(const SceneDescription& scene,
                            const InstructionTriple& triple, const AffordanceKB& kb) {
    DisambiguationResult result;

    // Step 1: type-level affordance check.
    const std::vector<AffordanceFact> facts =
        kb.matching_facts(triple.tool, triple.action, triple.target);
    result.flags.action_invalid = facts.empty();
    result.trace.push_back(
        {"affordance-check",
         "CanPerform(" + slot_text(triple.tool) + ", " + quote(triple.action) + ", " +
             slot_text(triple.target) + "): " + std::to_string(facts.size()) +
             " fact(s)",
         flag_text("action_invalid", result.flags.action_invalid)});

    // Step 2: capable tools present in the scene, scene order.
    const std::vector<std::string> scene_tools = distinct_in_order(present_tools(scene));
    std::vector<std::string> tools_ok;
    for (const auto& tool : scene_tools) {
        if (std::any_of(facts.begin(), facts.end(),
                        [&](const AffordanceFact& f) { return f.tool == tool; })) {
            tools_ok.push_back(tool);
        }
    }
    result.flags.tool_missing = !facts.empty() && tools_ok.empty();
    result.trace.push_back({"tool-presence-check",
                            "capable tools in scene: " + comma_list(tools_ok),
                            flag_text("tool_missing", result.flags.tool_missing)});

    // Step 3: target resolution.
    const std::vector<std::string> scene_objects =
        distinct_in_order(present_objects(scene));
    std::optional<std::string> resolved_target;
    std::string target_detail;
    if (triple.target.is_specified()) {
        const std::string& wanted = triple.target.label();
        const bool present = std::find(scene_objects.begin(), scene_objects.end(),
                                       wanted) != scene_objects.end();
        result.flags.target_unclear = !present;
        target_detail = "target " + quote(wanted) +
                        (present ? " present in scene" : " absent from scene");
        if (present) {
            resolved_target = wanted;
        }
    } else {
        // When no capable tool is present the tool constraint relaxes to
        // any tool named by the matching facts, so this flag stays
        // independent of step 2.
        std::vector<std::string> targets_ok;
        for (const auto& object : scene_objects) {
            const bool supported = std::any_of(
                facts.begin(), facts.end(), [&](const AffordanceFact& f) {
                    if (f.object != object) {
                        return false;
                    }
                    if (tools_ok.empty()) {
                        return true;
                    }
                    return std::find(tools_ok.begin(), tools_ok.end(), f.tool) !=
                           tools_ok.end();
                });
            if (supported) {
                targets_ok.push_back(object);
            }
        }
        result.flags.target_unclear = targets_ok.size() != 1;
        target_detail = "candidate targets: " + comma_list(targets_ok);
        if (targets_ok.size() == 1) {
            resolved_target = targets_ok.front();
        }
    }
    result.trace.push_back({"target-resolution", target_detail,
                            flag_text("target_unclear", result.flags.target_unclear)});

    // Candidates: every supported (tool, target) completion, scene order.
    for (const auto& tool : tools_ok) {
        for (const auto& object : scene_objects) {
            const bool supported =
                std::any_of(facts.begin(), facts.end(), [&](const AffordanceFact& f) {
                    return f.tool == tool && f.object == object;
                });
            if (supported) {
                result.candidates.emplace_back(tool, object);
            }
        }
    }

    // Step 4: resolution with deterministic tie-break.
    if (result.flags.none() && resolved_target.has_value()) {
        std::vector<std::string> capable;
        for (const auto& tool : tools_ok) {
            if (std::any_of(facts.begin(), facts.end(), [&](const AffordanceFact& f) {
                    return f.tool == tool && f.object == *resolved_target;
                })) {
                capable.push_back(tool);
            }
        }
        result.resolved =
            ResolvedCommand{capable.front(), triple.action, *resolved_target};
        if (capable.size() > 1) {
            result.trace.push_back(
                {"tie-break",
                 "tools capable of " + quote(*resolved_target) + ": " +
                     comma_list(capable) + "; scene order selects " +
                     quote(capable.front()),
                 "selected " + quote(capable.front())});
        }
    }

    return result;
}

const ExpertInterface& rule_based_expert() {
    static const RuleBasedExpert expert;
    return expert;
}

}  // namespace ambigate

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ambigate/affordance.hpp"
#include "ambigate/instruction.hpp"
#include "ambigate/scene.hpp"

namespace ambigate {

// The three binary ambiguity scores. Rendered as 0/1 everywhere.
struct AmbiguityFlags {
    bool tool_missing = false;
    bool action_invalid = false;
    bool target_unclear = false;

    bool any() const { return tool_missing || action_invalid || target_unclear; }
    bool none() const { return !any(); }

    bool operator==(const AmbiguityFlags&) const = default;
};

// One stage of the validation procedure. Names are fixed:
// "affordance-check", "tool-presence-check", "target-resolution" always
// appear in that order; "tie-break" appears only when several tools
// qualify for the resolved command.
struct ReasoningStep {
    std::string name;
    std::string detail;
    std::string outcome;
};

using ReasoningTrace = std::vector<ReasoningStep>;

// Rendered line format, stable across releases:
//   [step-name] detail => outcome
std::string render_trace(const ReasoningTrace& trace);

struct ResolvedCommand {
    std::string tool;
    std::string action;
    std::string target;

    bool operator==(const ResolvedCommand&) const = default;
};

struct DisambiguationResult {
    AmbiguityFlags flags;
    ReasoningTrace trace;
    // Present exactly when all three flags are 0; then the command is in
    // the KB and both labels are present in the scene.
    std::optional<ResolvedCommand> resolved;
    // Every (tool, target) completion supported by the KB and the scene,
    // in scene order (tool major).
    std::vector<std::pair<std::string, std::string>> candidates;
};

// Seam for alternative disambiguation backends. Implementations must be
// deterministic given identical inputs.
class ExpertInterface {
public:
    virtual ~ExpertInterface() = default;
    virtual DisambiguationResult disambiguate(const SceneDescription& scene,
                                              const InstructionTriple& triple,
                                              const AffordanceKB& kb) const = 0;
};

// Validates the instruction against the scene and the KB:
//   1. affordance-check     action_invalid = 1 iff no KB fact matches the
//                           slot-constrained query.
//   2. tool-presence-check  tool_missing = 1 iff facts exist but no capable
//                           tool is present.
//   3. target-resolution    a Specified target must be present; an
//                           Unspecified one must have exactly one supported
//                           present candidate (tool constraint relaxed to
//                           the matching facts when no capable tool is
//                           present, so the flag is assessed independently).
//   4. resolution           iff all flags are 0, pick the scene-order-first
//                           capable tool; a tie-break step records the
//                           choice when several qualify.
// Never throws; flags encode every problem.
DisambiguationResult reason(const SceneDescription& scene,
                            const InstructionTriple& triple, const AffordanceKB& kb);

class RuleBasedExpert final : public ExpertInterface {
public:
    DisambiguationResult disambiguate(const SceneDescription& scene,
                                      const InstructionTriple& triple,
                                      const AffordanceKB& kb) const override {
        return reason(scene, triple, kb);
    }
};

// Shared rule-based expert instance.
const ExpertInterface& rule_based_expert();

}  // namespace ambigate

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace ambigate {

// One slot of an instruction triple: a vocabulary token, or explicitly
// left open by the speaker.
class SlotValue {
public:
    static SlotValue specified(std::string label);
    static SlotValue unspecified() { return SlotValue{}; }

    bool is_specified() const { return label_.has_value(); }
    // Only valid when is_specified().
    const std::string& label() const { return *label_; }

    bool operator==(const SlotValue&) const = default;

private:
    std::optional<std::string> label_;
};

// (tool, action, target) with explicit underspecification. A request with
// no verb is unparseable, so the action is always present.
struct InstructionTriple {
    SlotValue tool;
    std::string action;
    SlotValue target;

    bool operator==(const InstructionTriple&) const = default;
};

enum class AmbiguityLabel { Unambiguous, Deambiguable, TrulyAmbiguous };

std::string_view to_string(AmbiguityLabel label);
AmbiguityLabel ambiguity_label_from_string(std::string_view text);

// Token sets for the request grammar. Tokens are stored lowercase; the
// three sets are pairwise disjoint. Aliases rewrite surface tokens to
// canonical ones before pattern matching.
struct Vocabulary {
    std::set<std::string> verbs;
    std::set<std::string> tool_labels;
    std::set<std::string> object_labels;
    std::map<std::string, std::string> aliases;
};

// Loads a vocabulary file: JSON with keys "verbs", "tool_labels",
// "object_labels", "aliases". Throws ParseError ("malformed",
// "vocab-overlap", "vocab-alias").
Vocabulary parse_vocabulary(std::string_view document);

// The closed request grammar. Slot tokens may span several words
// ("cystic duct"); the fixed keywords delimit them.
enum class GrammarPattern {
    VerbOnly,           // <verb>
    VerbObject,         // <verb> the <object>
    VerbWithTool,       // <verb> with the <tool>
    VerbObjectWithTool, // <verb> the <object> with the <tool>
    UseToolVerbObject,  // use the <tool> to <verb> the <object>
};

// Renders a request string for a pattern from canonical tokens. Tokens
// not used by the pattern may be empty.
std::string render_request(GrammarPattern pattern, std::string_view verb,
                           std::string_view tool, std::string_view object);

// Parses a request into a triple. Matching is case-insensitive, strips
// politeness tokens ("please") and trailing punctuation, and applies the
// alias table before matching. Throws ParseError with codes
// "no-pattern-match", "unknown-verb" or "unknown-token".
InstructionTriple parse_instruction(std::string_view text, const Vocabulary& vocab);

}  // namespace ambigate

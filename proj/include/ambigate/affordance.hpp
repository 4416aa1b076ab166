#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ambigate/instruction.hpp"

namespace ambigate {

// CanPerform(tool_type, action, object_type). Absence of a fact means the
// affordance does not hold (closed world).
struct AffordanceFact {
    std::string tool;
    std::string action;
    std::string object;

    auto operator<=>(const AffordanceFact&) const = default;
};

class AffordanceKB {
public:
    AffordanceKB() = default;

    // Duplicates collapse at their first occurrence; the remaining file
    // order is the iteration order for every query below.
    static AffordanceKB from_facts(std::vector<AffordanceFact> facts);

    const std::vector<AffordanceFact>& facts() const { return facts_; }
    bool empty() const { return facts_.empty(); }
    std::size_t size() const { return facts_.size(); }

    bool can_perform(std::string_view tool, std::string_view action,
                     std::string_view object) const;

    // Facts with the given action whose tool/object fields equal any
    // Specified slot value; Unspecified slots match anything.
    std::vector<AffordanceFact> matching_facts(const SlotValue& tool,
                                               std::string_view action,
                                               const SlotValue& target) const;

    // Distinct tool tokens that can perform `action` on `object`, KB order.
    std::vector<std::string> tools_for(std::string_view action,
                                       std::string_view object) const;

    // Distinct object tokens that `tool` can `action`, KB order.
    std::vector<std::string> targets_for(std::string_view tool,
                                         std::string_view action) const;

private:
    std::vector<AffordanceFact> facts_;
    std::set<AffordanceFact> index_;
};

// KB file format: JSON array of {"tool","action","object"}. Throws
// ParseError ("malformed", "empty-token").
AffordanceKB parse_kb(std::string_view document);

std::string serialize_kb(const AffordanceKB& kb);

}  // namespace ambigate

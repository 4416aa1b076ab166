#include "ambigate/instruction.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "ambigate/errors.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

SlotValue SlotValue::specified(std::string label) {
    if (label.empty()) {
        throw Error("empty-slot", "a specified slot must carry a non-empty label");
    }
    SlotValue value;
    value.label_ = std::move(label);
    return value;
}

std::string_view to_string(AmbiguityLabel label) {
    switch (label) {
        case AmbiguityLabel::Unambiguous: return "unambiguous";
        case AmbiguityLabel::Deambiguable: return "deambiguable";
        case AmbiguityLabel::TrulyAmbiguous: return "truly_ambiguous";
    }
    return "unambiguous";
}

AmbiguityLabel ambiguity_label_from_string(std::string_view text) {
    if (text == "unambiguous") return AmbiguityLabel::Unambiguous;
    if (text == "deambiguable") return AmbiguityLabel::Deambiguable;
    if (text == "truly_ambiguous") return AmbiguityLabel::TrulyAmbiguous;
    throw ParseError("malformed", "unknown ambiguity label '" + std::string(text) + "'");
}

namespace {

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::set<std::string> parse_token_set(const ordered_json& node, const char* key) {
    if (!node.is_array()) {
        throw ParseError("malformed", std::string("vocabulary '") + key +
                                          "' must be an array of strings");
    }
    std::set<std::string> tokens;
    for (const auto& item : node) {
        if (!item.is_string()) {
            throw ParseError("malformed", std::string("vocabulary '") + key +
                                              "' must contain only strings");
        }
        std::string token = lowercase(item.get<std::string>());
        if (token.empty()) {
            throw ParseError("malformed", std::string("empty token in '") + key + "'");
        }
        tokens.insert(std::move(token));
    }
    return tokens;
}

bool in_any_set(const Vocabulary& vocab, const std::string& token) {
    return vocab.verbs.count(token) != 0 || vocab.tool_labels.count(token) != 0 ||
           vocab.object_labels.count(token) != 0;
}

}  // namespace

Vocabulary parse_vocabulary(std::string_view document) {
    ordered_json root;
    try {
        root = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed", std::string("vocabulary document: ") + e.what());
    }
    if (!root.is_object()) {
        throw ParseError("malformed", "vocabulary document must be a JSON object");
    }
    for (const auto& [key, _] : root.items()) {
        if (key != "verbs" && key != "tool_labels" && key != "object_labels" &&
            key != "aliases") {
            throw ParseError("malformed",
                             "unknown key '" + key + "' in vocabulary document");
        }
    }
    for (const char* key : {"verbs", "tool_labels", "object_labels", "aliases"}) {
        if (!root.contains(key)) {
            throw ParseError("malformed",
                             std::string("vocabulary document is missing key '") + key + "'");
        }
    }

    Vocabulary vocab;
    vocab.verbs = parse_token_set(root.at("verbs"), "verbs");
    vocab.tool_labels = parse_token_set(root.at("tool_labels"), "tool_labels");
    vocab.object_labels = parse_token_set(root.at("object_labels"), "object_labels");

    for (const auto& token : vocab.verbs) {
        if (vocab.tool_labels.count(token) != 0 || vocab.object_labels.count(token) != 0) {
            throw ParseError("vocab-overlap",
                             "token '" + token + "' appears in more than one vocabulary set");
        }
    }
    for (const auto& token : vocab.tool_labels) {
        if (vocab.object_labels.count(token) != 0) {
            throw ParseError("vocab-overlap",
                             "token '" + token + "' appears in more than one vocabulary set");
        }
    }

    const auto& aliases = root.at("aliases");
    if (!aliases.is_object()) {
        throw ParseError("malformed", "vocabulary 'aliases' must be an object");
    }
    for (const auto& [surface, canonical] : aliases.items()) {
        if (!canonical.is_string()) {
            throw ParseError("malformed", "alias '" + surface + "' must map to a string");
        }
        std::string from = lowercase(surface);
        std::string to = lowercase(canonical.get<std::string>());
        if (from.empty() || to.empty()) {
            throw ParseError("malformed", "alias tokens must be non-empty");
        }
        if (in_any_set(vocab, from)) {
            throw ParseError("vocab-alias",
                             "alias source '" + from + "' is already a canonical token");
        }
        for (const char* keyword : {"the", "with", "to", "use", "please"}) {
            if (from == keyword) {
                throw ParseError("vocab-alias",
                                 "alias source '" + from + "' is a grammar keyword");
            }
        }
        if (!in_any_set(vocab, to)) {
            throw ParseError("vocab-alias",
                             "alias target '" + to + "' is not a canonical token");
        }
        vocab.aliases[from] = to;
    }
    return vocab;
}

std::string render_request(GrammarPattern pattern, std::string_view verb,
                           std::string_view tool, std::string_view object) {
    std::string v(verb), t(tool), o(object);
    switch (pattern) {
        case GrammarPattern::VerbOnly:
            return v;
        case GrammarPattern::VerbObject:
            return v + " the " + o;
        case GrammarPattern::VerbWithTool:
            return v + " with the " + t;
        case GrammarPattern::VerbObjectWithTool:
            return v + " the " + o + " with the " + t;
        case GrammarPattern::UseToolVerbObject:
            return "use the " + t + " to " + v + " the " + o;
    }
    return v;
}

namespace {

struct RawMatch {
    std::string verb;
    std::optional<std::string> tool;
    std::optional<std::string> object;
};

// Lowercases, strips trailing punctuation and politeness tokens. Aliases
// are applied later, to the extracted verb and whole slot phrases, so a
// token-level alias cannot corrupt a multi-word label it is part of.
std::vector<std::string> tokenize(std::string_view text) {
    std::istringstream stream{lowercase(text)};
    std::vector<std::string> tokens;
    std::string word;
    while (stream >> word) {
        while (!word.empty() && (word.back() == '.' || word.back() == ',' ||
                                 word.back() == '!' || word.back() == '?')) {
            word.pop_back();
        }
        if (word.empty() || word == "please") {
            continue;
        }
        tokens.push_back(word);
    }
    return tokens;
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin,
                 std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (!out.empty()) {
            out += ' ';
        }
        out += tokens[i];
    }
    return out;
}

std::size_t find_token(const std::vector<std::string>& tokens, std::string_view needle,
                       std::size_t from) {
    for (std::size_t i = from; i < tokens.size(); ++i) {
        if (tokens[i] == needle) {
            return i;
        }
    }
    return tokens.size();
}

// Matches the five grammar patterns over the normalized token stream.
// Multi-word slot fills are joined with single spaces.
std::optional<RawMatch> match_patterns(const std::vector<std::string>& tokens) {
    const std::size_t n = tokens.size();
    if (n == 0) {
        return std::nullopt;
    }

    // use the <tool> to <verb> the <object>
    if (n >= 7 && tokens[0] == "use" && tokens[1] == "the") {
        const std::size_t to_pos = find_token(tokens, "to", 2);
        if (to_pos > 2 && to_pos + 3 < n && tokens[to_pos + 2] == "the") {
            RawMatch match;
            match.tool = join(tokens, 2, to_pos);
            match.verb = tokens[to_pos + 1];
            match.object = join(tokens, to_pos + 3, n);
            return match;
        }
        // fall through: the other patterns may still apply
    }

    // <verb>
    if (n == 1) {
        return RawMatch{tokens[0], std::nullopt, std::nullopt};
    }

    // <verb> with the <tool>
    if (tokens[1] == "with") {
        if (n >= 4 && tokens[2] == "the") {
            return RawMatch{tokens[0], join(tokens, 3, n), std::nullopt};
        }
        return std::nullopt;
    }

    if (tokens[1] != "the" || n < 3) {
        return std::nullopt;
    }

    // <verb> the <object> with the <tool>
    const std::size_t with_pos = find_token(tokens, "with", 2);
    if (with_pos < n) {
        if (with_pos > 2 && with_pos + 2 < n && tokens[with_pos + 1] == "the") {
            RawMatch match;
            match.verb = tokens[0];
            match.object = join(tokens, 2, with_pos);
            match.tool = join(tokens, with_pos + 2, n);
            return match;
        }
        return std::nullopt;
    }

    // <verb> the <object>
    return RawMatch{tokens[0], std::nullopt, join(tokens, 2, n)};
}

std::string canonical_slot(std::string token, const Vocabulary& vocab) {
    auto alias = vocab.aliases.find(token);
    return alias == vocab.aliases.end() ? token : alias->second;
}

}  // namespace

InstructionTriple parse_instruction(std::string_view text, const Vocabulary& vocab) {
    const std::vector<std::string> tokens = tokenize(text);
    const auto match = match_patterns(tokens);
    if (!match.has_value()) {
        throw ParseError("no-pattern-match",
                         "request does not match any grammar pattern: \"" +
                             std::string(text) + "\"");
    }
    const std::string verb = canonical_slot(match->verb, vocab);
    if (vocab.verbs.count(verb) == 0) {
        throw ParseError("unknown-verb", "unknown verb '" + verb + "'");
    }

    InstructionTriple triple;
    triple.action = verb;
    if (match->tool.has_value()) {
        const std::string tool = canonical_slot(*match->tool, vocab);
        if (vocab.tool_labels.count(tool) == 0) {
            throw ParseError("unknown-token",
                             "'" + tool + "' is not a known tool label");
        }
        triple.tool = SlotValue::specified(tool);
    }
    if (match->object.has_value()) {
        const std::string object = canonical_slot(*match->object, vocab);
        if (vocab.object_labels.count(object) == 0) {
            throw ParseError("unknown-token",
                             "'" + object + "' is not a known object label");
        }
        triple.target = SlotValue::specified(object);
    }
    return triple;
}

}  // namespace ambigate

#include "ambigate/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ambigate/errors.hpp"
#include "ambigate/io_util.hpp"
#include "ambigate/json_conv.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json gold_to_json(const std::optional<ResolvedCommand>& gold) {
    if (!gold.has_value()) {
        return nullptr;
    }
    ordered_json node;
    node["tool"] = gold->tool;
    node["action"] = gold->action;
    node["target"] = gold->target;
    return node;
}

LabeledSample sample_from_json(const ordered_json& node) {
    if (!node.is_object()) {
        throw ParseError("malformed", "sample line must be a JSON object");
    }
    for (const auto& [key, _] : node.items()) {
        if (key != "scene" && key != "request" && key != "label" && key != "gold") {
            throw ParseError("malformed", "unknown key '" + key + "' in sample line");
        }
    }
    for (const char* key : {"scene", "request", "label", "gold"}) {
        if (!node.contains(key)) {
            throw ParseError("malformed",
                             std::string("sample line is missing key '") + key + "'");
        }
    }

    LabeledSample sample;
    sample.scene = scene_from_json(node.at("scene"));
    if (!node.at("request").is_string()) {
        throw ParseError("malformed", "sample 'request' must be a string");
    }
    sample.request = node.at("request").get<std::string>();
    if (!node.at("label").is_string()) {
        throw ParseError("malformed", "sample 'label' must be a string");
    }
    sample.label = ambiguity_label_from_string(node.at("label").get<std::string>());

    const auto& gold = node.at("gold");
    const bool expects_gold = sample.label != AmbiguityLabel::TrulyAmbiguous;
    if (gold.is_null()) {
        if (expects_gold) {
            throw ParseError("malformed",
                             std::string("label '") +
                                 std::string(to_string(sample.label)) +
                                 "' requires a gold command");
        }
    } else {
        if (!expects_gold) {
            throw ParseError("malformed", "truly_ambiguous sample must not carry gold");
        }
        if (!gold.is_object() || !gold.contains("tool") || !gold.contains("action") ||
            !gold.contains("target") || !gold.at("tool").is_string() ||
            !gold.at("action").is_string() || !gold.at("target").is_string() ||
            gold.size() != 3) {
            throw ParseError("malformed", "gold must carry tool/action/target strings");
        }
        ResolvedCommand command;
        command.tool = gold.at("tool").get<std::string>();
        command.action = gold.at("action").get<std::string>();
        command.target = gold.at("target").get<std::string>();
        const auto tools = present_tools(sample.scene);
        const auto objects = present_objects(sample.scene);
        if (std::find(tools.begin(), tools.end(), command.tool) == tools.end()) {
            throw ParseError("malformed",
                             "gold tool '" + command.tool + "' is not present in scene");
        }
        if (std::find(objects.begin(), objects.end(), command.target) == objects.end()) {
            throw ParseError("malformed", "gold target '" + command.target +
                                              "' is not present in scene");
        }
        sample.gold = std::move(command);
    }
    return sample;
}

ordered_json sample_to_json(const LabeledSample& sample) {
    ordered_json node;
    node["scene"] = scene_to_json(sample.scene);
    node["request"] = sample.request;
    node["label"] = std::string(to_string(sample.label));
    node["gold"] = gold_to_json(sample.gold);
    return node;
}

DatasetHeader header_from_json(const ordered_json& node) {
    if (!node.is_object()) {
        throw ParseError("malformed", "dataset header must be a JSON object");
    }
    for (const char* key : {"format_version", "seed", "generator_config_hash"}) {
        if (!node.contains(key)) {
            throw ParseError("malformed",
                             std::string("dataset header is missing key '") + key + "'");
        }
    }
    DatasetHeader header;
    if (!node.at("format_version").is_number_integer() ||
        node.at("format_version").get<int>() != 1) {
        throw ParseError("malformed", "unsupported dataset format_version");
    }
    if (!node.at("seed").is_number_unsigned() && !node.at("seed").is_number_integer()) {
        throw ParseError("malformed", "dataset 'seed' must be an integer");
    }
    header.seed = node.at("seed").get<std::uint64_t>();
    if (!node.at("generator_config_hash").is_string()) {
        throw ParseError("malformed", "dataset 'generator_config_hash' must be a string");
    }
    header.generator_config_hash = node.at("generator_config_hash").get<std::string>();
    if (node.contains("rng")) {
        if (!node.at("rng").is_string()) {
            throw ParseError("malformed", "dataset 'rng' must be a string");
        }
        header.rng = node.at("rng").get<std::string>();
    }
    return header;
}

}  // namespace

Dataset parse_dataset(std::string_view document) {
    Dataset dataset;
    std::istringstream stream{std::string(document)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        ordered_json node;
        try {
            node = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("malformed", "dataset line " + std::to_string(line_no) +
                                              ": " + e.what());
        }
        try {
            if (!header_seen) {
                dataset.header = header_from_json(node);
                header_seen = true;
            } else {
                dataset.samples.push_back(sample_from_json(node));
            }
        } catch (const ParseError& e) {
            throw ParseError(e.code(), "dataset line " + std::to_string(line_no) + ": " +
                                           e.what());
        }
    }
    return dataset;
}

std::string serialize_dataset(const Dataset& dataset) {
    ordered_json header;
    header["format_version"] = dataset.header.format_version;
    header["seed"] = dataset.header.seed;
    header["generator_config_hash"] = dataset.header.generator_config_hash;
    header["rng"] = dataset.header.rng;

    std::string out = header.dump() + "\n";
    for (const auto& sample : dataset.samples) {
        out += sample_to_json(sample).dump() + "\n";
    }
    return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_file(path));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, serialize_dataset(dataset));
}

DatasetSplit split_dataset(const std::vector<LabeledSample>& samples) {
    DatasetSplit split;
    for (const auto& sample : samples) {
        if (sample.label == AmbiguityLabel::Deambiguable) {
            split.test.push_back(sample);
        } else {
            split.calibration.push_back(sample);
        }
    }
    return split;
}

namespace {

// Deterministic per-sample random stream: mt19937_64 seeded from
// (seed, stream index) through seed_seq. Draws go through explicit modulo
// helpers so the byte-level output does not depend on the standard
// library's distribution implementations.
class SplitRng {
public:
    SplitRng(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed),
                          static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream),
                          static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1)));
    }

    bool chance(double p) {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 < p;
    }

    template <typename T>
    const T& pick(const std::vector<T>& items) {
        return items[below(items.size())];
    }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
};

struct SceneSpec {
    std::vector<std::string> tools;    // required tool labels
    std::vector<std::string> objects;  // required object labels
    std::vector<std::string> forbidden_tools;
};

std::vector<std::string> sorted_tokens(const std::set<std::string>& tokens) {
    return {tokens.begin(), tokens.end()};
}

SceneDescription build_scene(SplitRng& rng, const GeneratorConfig& config,
                             const SceneSpec& spec, std::size_t sample_index) {
    struct Draft {
        std::string label;
        EntityKind kind;
    };
    std::vector<Draft> drafts;
    for (const auto& label : spec.tools) {
        drafts.push_back({label, EntityKind::Tool});
    }
    for (const auto& label : spec.objects) {
        drafts.push_back({label, EntityKind::Anatomy});
    }

    const auto tool_pool = sorted_tokens(config.vocab.tool_labels);
    const auto object_pool = sorted_tokens(config.vocab.object_labels);
    const int distractors =
        config.max_distractors > 0 ? rng.range(0, config.max_distractors) : 0;
    for (int i = 0; i < distractors; ++i) {
        const bool tool_side = rng.chance(0.5);
        if (tool_side && !tool_pool.empty()) {
            const std::string& label = rng.pick(tool_pool);
            if (std::find(spec.forbidden_tools.begin(), spec.forbidden_tools.end(),
                          label) == spec.forbidden_tools.end()) {
                drafts.push_back({label, EntityKind::Tool});
            }
        } else if (!tool_side && !object_pool.empty()) {
            drafts.push_back({rng.pick(object_pool), EntityKind::Anatomy});
        }
    }

    rng.shuffle(drafts);

    SceneDescription scene;
    char scene_id[24];
    std::snprintf(scene_id, sizeof(scene_id), "scene-%04zu", sample_index + 1);
    scene.scene_id = scene_id;
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        Entity entity;
        entity.id = "e" + std::to_string(i + 1);
        entity.label = drafts[i].label;
        entity.kind = drafts[i].kind;
        scene.entities.push_back(std::move(entity));
    }

    // Occasional state annotations: a holding/held_by pair plus sparse
    // boolean predicates. These never influence the reasoning flags.
    std::vector<std::size_t> tool_idx, anatomy_idx;
    for (std::size_t i = 0; i < scene.entities.size(); ++i) {
        (scene.entities[i].kind == EntityKind::Tool ? tool_idx : anatomy_idx).push_back(i);
    }
    if (!tool_idx.empty() && !anatomy_idx.empty() && rng.chance(0.3)) {
        Entity& holder = scene.entities[tool_idx[rng.below(tool_idx.size())]];
        Entity& held = scene.entities[anatomy_idx[rng.below(anatomy_idx.size())]];
        holder.states.emplace_back("holding", StateValue{held.id});
        held.states.emplace_back("held_by", StateValue{holder.id});
    }
    if (!anatomy_idx.empty() && rng.chance(0.2)) {
        Entity& entity = scene.entities[anatomy_idx[rng.below(anatomy_idx.size())]];
        entity.states.emplace_back("exposed", StateValue{rng.chance(0.5)});
    }
    return scene;
}

std::string render_for_masking(DeambiguableMasking masking, const AffordanceFact& fact) {
    switch (masking) {
        case DeambiguableMasking::Tool:
            return render_request(GrammarPattern::VerbObject, fact.action, "",
                                  fact.object);
        case DeambiguableMasking::Target:
            return render_request(GrammarPattern::VerbWithTool, fact.action, fact.tool,
                                  "");
        case DeambiguableMasking::Both:
            return render_request(GrammarPattern::VerbOnly, fact.action, "", "");
    }
    return fact.action;
}

constexpr int kAttemptsPerSample = 64;

LabeledSample make_unambiguous(SplitRng& rng, const GeneratorConfig& config,
                               std::size_t sample_index) {
    for (int attempt = 0; attempt < kAttemptsPerSample; ++attempt) {
        const AffordanceFact& fact = rng.pick(config.kb.facts());
        SceneSpec spec;
        spec.tools.push_back(fact.tool);
        spec.objects.push_back(fact.object);
        SceneDescription scene = build_scene(rng, config, spec, sample_index);

        const auto pattern = rng.chance(0.5) ? GrammarPattern::VerbObjectWithTool
                                             : GrammarPattern::UseToolVerbObject;
        std::string request = render_request(pattern, fact.action, fact.tool, fact.object);
        if (rng.chance(0.15)) {
            request = "please " + request;
        }

        const InstructionTriple triple = parse_instruction(request, config.vocab);
        const DisambiguationResult result = reason(scene, triple, config.kb);
        const ResolvedCommand gold{fact.tool, fact.action, fact.object};
        if (result.flags.none() && result.resolved == gold) {
            return {std::move(scene), std::move(request), AmbiguityLabel::Unambiguous,
                    gold};
        }
    }
    throw ConfigError("unrealizable-label",
                      "cannot realize an unambiguous sample with this vocabulary/KB");
}

LabeledSample make_deambiguable(SplitRng& rng, const GeneratorConfig& config,
                                std::size_t sample_index) {
    if (config.maskings.empty()) {
        throw ConfigError("unrealizable-label", "no deambiguable maskings configured");
    }
    for (int attempt = 0; attempt < kAttemptsPerSample; ++attempt) {
        const AffordanceFact& fact = rng.pick(config.kb.facts());
        const DeambiguableMasking masking =
            config.maskings[rng.below(config.maskings.size())];
        SceneSpec spec;
        spec.tools.push_back(fact.tool);
        spec.objects.push_back(fact.object);
        SceneDescription scene = build_scene(rng, config, spec, sample_index);

        std::string request = render_for_masking(masking, fact);
        if (rng.chance(0.15)) {
            request = "please " + request;
        }

        const InstructionTriple triple = parse_instruction(request, config.vocab);
        const DisambiguationResult result = reason(scene, triple, config.kb);
        // The request must resolve to exactly one completion; the resolved
        // command (not the seed fact) is the gold answer.
        if (result.flags.none() && result.resolved.has_value()) {
            return {std::move(scene), std::move(request), AmbiguityLabel::Deambiguable,
                    result.resolved};
        }
    }
    throw ConfigError("unrealizable-label",
                      "cannot realize a deambiguable sample with this vocabulary/KB");
}

std::optional<LabeledSample> try_tool_removal(SplitRng& rng,
                                              const GeneratorConfig& config,
                                              std::size_t sample_index) {
    const AffordanceFact& fact = rng.pick(config.kb.facts());
    SceneSpec spec;
    spec.objects.push_back(fact.object);
    spec.forbidden_tools = config.kb.tools_for(fact.action, fact.object);
    SceneDescription scene = build_scene(rng, config, spec, sample_index);

    std::string request =
        render_request(GrammarPattern::VerbObject, fact.action, "", fact.object);
    const InstructionTriple triple = parse_instruction(request, config.vocab);
    const DisambiguationResult result = reason(scene, triple, config.kb);
    const AmbiguityFlags expected{true, false, false};
    if (result.flags == expected) {
        return LabeledSample{std::move(scene), std::move(request),
                             AmbiguityLabel::TrulyAmbiguous, std::nullopt};
    }
    return std::nullopt;
}

std::optional<LabeledSample> try_affordance_break(SplitRng& rng,
                                                  const GeneratorConfig& config,
                                                  std::size_t sample_index) {
    // A present tool asked to do something it has no affordance for.
    std::vector<std::string> actions;
    for (const auto& fact : config.kb.facts()) {
        if (std::find(actions.begin(), actions.end(), fact.action) == actions.end()) {
            actions.push_back(fact.action);
        }
    }
    if (actions.empty()) {
        return std::nullopt;
    }
    const std::string& action = actions[rng.below(actions.size())];
    std::vector<std::string> incapable;
    for (const auto& tool : sorted_tokens(config.vocab.tool_labels)) {
        if (config.kb.targets_for(tool, action).empty()) {
            incapable.push_back(tool);
        }
    }
    if (incapable.empty()) {
        return std::nullopt;
    }
    const std::string& tool = incapable[rng.below(incapable.size())];

    SceneSpec spec;
    spec.tools.push_back(tool);
    const auto object_pool = sorted_tokens(config.vocab.object_labels);
    if (!object_pool.empty()) {
        spec.objects.push_back(rng.pick(object_pool));
    }
    SceneDescription scene = build_scene(rng, config, spec, sample_index);

    std::string request = render_request(GrammarPattern::VerbWithTool, action, tool, "");
    const InstructionTriple triple = parse_instruction(request, config.vocab);
    const DisambiguationResult result = reason(scene, triple, config.kb);
    if (result.flags.action_invalid && !result.flags.tool_missing) {
        return LabeledSample{std::move(scene), std::move(request),
                             AmbiguityLabel::TrulyAmbiguous, std::nullopt};
    }
    return std::nullopt;
}

std::optional<LabeledSample> try_multi_target(SplitRng& rng,
                                              const GeneratorConfig& config,
                                              std::size_t sample_index) {
    // Two facts for the same action with distinct targets, all present.
    const auto& facts = config.kb.facts();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        for (std::size_t j = 0; j < facts.size(); ++j) {
            if (i != j && facts[i].action == facts[j].action &&
                facts[i].object != facts[j].object) {
                pairs.emplace_back(i, j);
            }
        }
    }
    if (pairs.empty()) {
        return std::nullopt;
    }
    const auto [i, j] = pairs[rng.below(pairs.size())];
    SceneSpec spec;
    spec.tools.push_back(facts[i].tool);
    if (facts[j].tool != facts[i].tool) {
        spec.tools.push_back(facts[j].tool);
    }
    spec.objects.push_back(facts[i].object);
    spec.objects.push_back(facts[j].object);
    SceneDescription scene = build_scene(rng, config, spec, sample_index);

    std::string request = render_request(GrammarPattern::VerbOnly, facts[i].action, "", "");
    const InstructionTriple triple = parse_instruction(request, config.vocab);
    const DisambiguationResult result = reason(scene, triple, config.kb);
    const AmbiguityFlags expected{false, false, true};
    if (result.flags == expected && result.candidates.size() >= 2) {
        return LabeledSample{std::move(scene), std::move(request),
                             AmbiguityLabel::TrulyAmbiguous, std::nullopt};
    }
    return std::nullopt;
}

LabeledSample make_truly_ambiguous(SplitRng& rng, const GeneratorConfig& config,
                                   std::size_t sample_index) {
    if (config.mechanisms.empty()) {
        throw ConfigError("unrealizable-label", "no ambiguity mechanisms configured");
    }
    for (int attempt = 0; attempt < kAttemptsPerSample; ++attempt) {
        const AmbiguityMechanism mechanism =
            config.mechanisms[rng.below(config.mechanisms.size())];
        std::optional<LabeledSample> sample;
        switch (mechanism) {
            case AmbiguityMechanism::ToolRemoval:
                sample = try_tool_removal(rng, config, sample_index);
                break;
            case AmbiguityMechanism::AffordanceBreak:
                sample = try_affordance_break(rng, config, sample_index);
                break;
            case AmbiguityMechanism::MultiTarget:
                sample = try_multi_target(rng, config, sample_index);
                break;
        }
        if (sample.has_value()) {
            return std::move(*sample);
        }
    }
    throw ConfigError("unrealizable-label",
                      "cannot realize a truly ambiguous sample with the configured "
                      "mechanisms over this vocabulary/KB");
}

std::string mechanism_name(AmbiguityMechanism mechanism) {
    switch (mechanism) {
        case AmbiguityMechanism::ToolRemoval: return "tool-removal";
        case AmbiguityMechanism::AffordanceBreak: return "affordance-break";
        case AmbiguityMechanism::MultiTarget: return "multi-target";
    }
    return "tool-removal";
}

std::string masking_name(DeambiguableMasking masking) {
    switch (masking) {
        case DeambiguableMasking::Tool: return "tool";
        case DeambiguableMasking::Target: return "target";
        case DeambiguableMasking::Both: return "both";
    }
    return "both";
}

}  // namespace

std::string generator_config_hash(const GeneratorConfig& config) {
    std::string canon;
    canon += "counts:" + std::to_string(config.unambiguous) + "," +
             std::to_string(config.deambiguable) + "," +
             std::to_string(config.truly_ambiguous) + ";";
    canon += "distractors:" + std::to_string(config.max_distractors) + ";";
    canon += "mechanisms:";
    for (const auto mechanism : config.mechanisms) {
        canon += mechanism_name(mechanism) + ",";
    }
    canon += ";maskings:";
    for (const auto masking : config.maskings) {
        canon += masking_name(masking) + ",";
    }
    canon += ";verbs:";
    for (const auto& token : config.vocab.verbs) canon += token + ",";
    canon += ";tools:";
    for (const auto& token : config.vocab.tool_labels) canon += token + ",";
    canon += ";objects:";
    for (const auto& token : config.vocab.object_labels) canon += token + ",";
    canon += ";aliases:";
    for (const auto& [from, to] : config.vocab.aliases) canon += from + ">" + to + ",";
    canon += ";kb:";
    for (const auto& fact : config.kb.facts()) {
        canon += fact.tool + "|" + fact.action + "|" + fact.object + ",";
    }
    return fnv1a64_hex(canon);
}

std::vector<LabeledSample> generate_synthetic(const GeneratorConfig& config,
                                              std::uint64_t seed) {
    if (config.unambiguous < 0 || config.deambiguable < 0 ||
        config.truly_ambiguous < 0) {
        throw ConfigError("invalid-config", "sample counts must be non-negative");
    }
    if (config.max_distractors < 0) {
        throw ConfigError("invalid-config", "max_distractors must be non-negative");
    }
    const int total = config.unambiguous + config.deambiguable + config.truly_ambiguous;
    if (total > 0 && config.kb.empty()) {
        throw ConfigError("unrealizable-label",
                          "cannot generate samples from an empty knowledge base");
    }
    for (const auto& fact : config.kb.facts()) {
        if (config.vocab.verbs.count(fact.action) == 0 ||
            config.vocab.tool_labels.count(fact.tool) == 0 ||
            config.vocab.object_labels.count(fact.object) == 0) {
            throw ConfigError("invalid-config",
                              "kb fact (" + fact.tool + ", " + fact.action + ", " +
                                  fact.object + ") uses tokens missing from the vocabulary");
        }
    }

    std::vector<LabeledSample> samples;
    samples.reserve(static_cast<std::size_t>(total));
    std::size_t index = 0;
    for (int i = 0; i < config.unambiguous; ++i, ++index) {
        SplitRng rng(seed, index);
        samples.push_back(make_unambiguous(rng, config, index));
    }
    for (int i = 0; i < config.deambiguable; ++i, ++index) {
        SplitRng rng(seed, index);
        samples.push_back(make_deambiguable(rng, config, index));
    }
    for (int i = 0; i < config.truly_ambiguous; ++i, ++index) {
        SplitRng rng(seed, index);
        samples.push_back(make_truly_ambiguous(rng, config, index));
    }
    return samples;
}

Dataset generate_dataset(const GeneratorConfig& config, std::uint64_t seed) {
    Dataset dataset;
    dataset.header.format_version = 1;
    dataset.header.seed = seed;
    dataset.header.generator_config_hash = generator_config_hash(config);
    dataset.header.rng = "mt19937_64";
    dataset.samples = generate_synthetic(config, seed);
    return dataset;
}

}  // namespace ambigate

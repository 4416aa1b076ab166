#include <random>

#include "doctest.h"

#include "ambigate/dataset.hpp"
#include "ambigate/errors.hpp"
#include "ambigate/pipeline.hpp"
#include "test_support.hpp"

using namespace ambigate;

namespace {

Vocabulary eval_vocab() {
    Vocabulary vocab;
    vocab.verbs = {"cut", "grasp"};
    vocab.tool_labels = {"cutter", "grasper", "hook"};
    vocab.object_labels = {"tissue", "gallbladder", "duct"};
    return vocab;
}

AffordanceKB richer_kb() {
    return AffordanceKB::from_facts({{"cutter", "cut", "tissue"},
                                     {"cutter", "cut", "duct"},
                                     {"grasper", "grasp", "tissue"},
                                     {"grasper", "grasp", "gallbladder"}});
}

GeneratorConfig config_of(int unambiguous, int deambiguable, int truly_ambiguous) {
    GeneratorConfig config;
    config.unambiguous = unambiguous;
    config.deambiguable = deambiguable;
    config.truly_ambiguous = truly_ambiguous;
    config.vocab = eval_vocab();
    config.kb = richer_kb();
    return config;
}

const char* kTinyDataset =
    "{\"format_version\":1,\"seed\":7,\"generator_config_hash\":\"abc\",\"rng\":\"mt19937_64\"}\n"
    "{\"scene\":{\"scene_id\":\"s\",\"entities\":[{\"id\":\"e1\",\"label\":\"cutter\","
    "\"kind\":\"tool\",\"states\":{}},{\"id\":\"e2\",\"label\":\"tissue\",\"kind\":"
    "\"anatomy\",\"states\":{}}]},\"request\":\"cut\",\"label\":\"deambiguable\","
    "\"gold\":{\"tool\":\"cutter\",\"action\":\"cut\",\"target\":\"tissue\"}}\n";

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("parses samples after the header line") {
    const Dataset dataset = parse_dataset(kTinyDataset);
    CHECK(dataset.header.seed == 7);
    CHECK(dataset.header.rng == "mt19937_64");
    REQUIRE(dataset.samples.size() == 1);
    const LabeledSample& sample = dataset.samples[0];
    CHECK(sample.request == "cut");
    CHECK(sample.label == AmbiguityLabel::Deambiguable);
    REQUIRE(sample.gold.has_value());
    CHECK(sample.gold->tool == "cutter");
}

TEST_CASE("empty document yields an empty sample list") {
    CHECK(parse_dataset("").samples.empty());
    CHECK(parse_dataset("\n\n").samples.empty());
}

TEST_CASE("malformed lines report their line number") {
    const std::string broken = std::string(kTinyDataset) + "{oops\n";
    try {
        parse_dataset(broken);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("a deambiguable sample without gold is rejected at its line") {
    std::string doc =
        "{\"format_version\":1,\"seed\":0,\"generator_config_hash\":\"x\"}\n"
        "{\"scene\":{\"scene_id\":\"s\",\"entities\":[]},\"request\":\"cut\","
        "\"label\":\"deambiguable\",\"gold\":null}\n";
    try {
        parse_dataset(doc);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        CHECK(std::string(e.what()).find("gold") != std::string::npos);
    }
}

TEST_CASE("gold commands must name entities present in the scene") {
    std::string doc =
        "{\"format_version\":1,\"seed\":0,\"generator_config_hash\":\"x\"}\n"
        "{\"scene\":{\"scene_id\":\"s\",\"entities\":[{\"id\":\"e1\",\"label\":"
        "\"tissue\",\"kind\":\"anatomy\",\"states\":{}}]},\"request\":\"cut\","
        "\"label\":\"unambiguous\",\"gold\":{\"tool\":\"cutter\",\"action\":\"cut\","
        "\"target\":\"tissue\"}}\n";
    CHECK_THROWS_AS(parse_dataset(doc), ParseError);
}

TEST_CASE("evaluation split: deambiguable to test, rest to calibration") {
    auto sample = [](AmbiguityLabel label, const std::string& request) {
        LabeledSample s;
        s.scene = testsupport::scene_of({{"cutter", EntityKind::Tool},
                                         {"tissue", EntityKind::Anatomy}});
        s.request = request;
        s.label = label;
        if (label != AmbiguityLabel::TrulyAmbiguous) {
            s.gold = ResolvedCommand{"cutter", "cut", "tissue"};
        }
        return s;
    };

    const std::vector<LabeledSample> samples = {
        sample(AmbiguityLabel::Unambiguous, "u1"),
        sample(AmbiguityLabel::Deambiguable, "d1"),
        sample(AmbiguityLabel::TrulyAmbiguous, "t1"),
        sample(AmbiguityLabel::Deambiguable, "d2"),
    };
    const DatasetSplit split = split_dataset(samples);
    REQUIRE(split.test.size() == 2);
    CHECK(split.test[0].request == "d1");
    CHECK(split.test[1].request == "d2");
    REQUIRE(split.calibration.size() == 2);
    CHECK(split.calibration[0].request == "u1");
    CHECK(split.calibration[1].request == "t1");

    CHECK(split_dataset({sample(AmbiguityLabel::Deambiguable, "d")})
              .calibration.empty());

    CHECK(label_to_class(AmbiguityLabel::Unambiguous) == SampleClass::NonAmbiguous);
    CHECK(label_to_class(AmbiguityLabel::TrulyAmbiguous) == SampleClass::Ambiguous);
}

TEST_CASE("generator produces the requested label counts") {
    const auto samples = generate_synthetic(config_of(5, 4, 3), 42);
    REQUIRE(samples.size() == 12);
    int counts[3] = {0, 0, 0};
    for (const auto& sample : samples) {
        ++counts[static_cast<int>(sample.label)];
    }
    CHECK(counts[static_cast<int>(AmbiguityLabel::Unambiguous)] == 5);
    CHECK(counts[static_cast<int>(AmbiguityLabel::Deambiguable)] == 4);
    CHECK(counts[static_cast<int>(AmbiguityLabel::TrulyAmbiguous)] == 3);
}

TEST_CASE("generation is a pure function of config and seed") {
    const Dataset a = generate_dataset(config_of(6, 6, 6), 42);
    const Dataset b = generate_dataset(config_of(6, 6, 6), 42);
    CHECK(serialize_dataset(a) == serialize_dataset(b));

    const Dataset c = generate_dataset(config_of(6, 6, 6), 43);
    CHECK(serialize_dataset(a) != serialize_dataset(c));
}

TEST_CASE("every generated sample re-checks against its label") {
    const auto config = config_of(10, 10, 10);
    const auto samples = generate_synthetic(config, 99);
    for (const auto& sample : samples) {
        const auto triple = parse_instruction(sample.request, config.vocab);
        const auto result = reason(sample.scene, triple, config.kb);
        if (sample.label == AmbiguityLabel::TrulyAmbiguous) {
            CHECK(result.flags.any());
            CHECK_FALSE(sample.gold.has_value());
        } else {
            CHECK(result.flags.none());
            REQUIRE(result.resolved.has_value());
            REQUIRE(sample.gold.has_value());
            CHECK(*result.resolved == *sample.gold);
            CHECK(config.kb.can_perform(sample.gold->tool, sample.gold->action,
                                        sample.gold->target));
        }
    }
}

TEST_CASE("a single-fact KB forces the canonical deambiguable sample") {
    GeneratorConfig config;
    config.unambiguous = 0;
    config.deambiguable = 1;
    config.truly_ambiguous = 0;
    config.max_distractors = 0;
    config.maskings = {DeambiguableMasking::Both};
    config.vocab.verbs = {"cut"};
    config.vocab.tool_labels = {"cutter"};
    config.vocab.object_labels = {"tissue"};
    config.kb = AffordanceKB::from_facts({{"cutter", "cut", "tissue"}});

    const auto samples = generate_synthetic(config, 1);
    REQUIRE(samples.size() == 1);
    CHECK(samples[0].request == "cut");
    CHECK(present_tools(samples[0].scene) == std::vector<std::string>{"cutter"});
    CHECK(present_objects(samples[0].scene) == std::vector<std::string>{"tissue"});
    REQUIRE(samples[0].gold.has_value());
    CHECK(*samples[0].gold == ResolvedCommand{"cutter", "cut", "tissue"});
}

TEST_CASE("unrealizable label requests fail with a config error") {
    // One fact and one object: no second target can exist.
    GeneratorConfig config;
    config.unambiguous = 0;
    config.deambiguable = 0;
    config.truly_ambiguous = 1;
    config.mechanisms = {AmbiguityMechanism::MultiTarget};
    config.vocab.verbs = {"cut"};
    config.vocab.tool_labels = {"cutter"};
    config.vocab.object_labels = {"tissue"};
    config.kb = AffordanceKB::from_facts({{"cutter", "cut", "tissue"}});
    CHECK_THROWS_AS(generate_synthetic(config, 1), ConfigError);

    GeneratorConfig empty_kb = config;
    empty_kb.kb = AffordanceKB{};
    empty_kb.mechanisms = {AmbiguityMechanism::ToolRemoval};
    CHECK_THROWS_AS(generate_synthetic(empty_kb, 1), ConfigError);
}

TEST_CASE("serialize/parse round trip preserves bytes") {
    std::mt19937_64 rng(73);
    for (int i = 0; i < 10; ++i) {
        const Dataset dataset =
            generate_dataset(config_of(1 + static_cast<int>(rng() % 3),
                                       1 + static_cast<int>(rng() % 3),
                                       1 + static_cast<int>(rng() % 3)),
                             rng());
        const std::string bytes = serialize_dataset(dataset);
        CHECK(serialize_dataset(parse_dataset(bytes)) == bytes);
    }
}

}  // TEST_SUITE

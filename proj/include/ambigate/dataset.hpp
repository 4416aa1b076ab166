#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ambigate/affordance.hpp"
#include "ambigate/instruction.hpp"
#include "ambigate/reasoning.hpp"
#include "ambigate/scene.hpp"

namespace ambigate {

// One scene/request pair with its ambiguity category. `gold` is present
// exactly for Unambiguous and Deambiguable samples and names the command
// the request should ultimately resolve to.
struct LabeledSample {
    SceneDescription scene;
    std::string request;
    AmbiguityLabel label = AmbiguityLabel::Unambiguous;
    std::optional<ResolvedCommand> gold;
};

// First line of a dataset file. `rng` names the generator algorithm so
// the deterministic stream can be reproduced.
struct DatasetHeader {
    int format_version = 1;
    std::uint64_t seed = 0;
    std::string generator_config_hash;
    std::string rng = "mt19937_64";
};

struct Dataset {
    DatasetHeader header;
    std::vector<LabeledSample> samples;
};

// JSON-lines: a header line followed by one line per sample. Malformed
// lines raise ParseError with the 1-based line number in the message.
Dataset parse_dataset(std::string_view document);
std::string serialize_dataset(const Dataset& dataset);

Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct DatasetSplit {
    std::vector<LabeledSample> calibration;
    std::vector<LabeledSample> test;
};

// Deambiguable samples form the test set; Unambiguous and TrulyAmbiguous
// samples form the calibration set (classes NonAmbiguous and Ambiguous
// respectively). Input order is preserved within both halves.
DatasetSplit split_dataset(const std::vector<LabeledSample>& samples);

// Ways a generated sample can be truly ambiguous.
enum class AmbiguityMechanism { ToolRemoval, AffordanceBreak, MultiTarget };

// Which slots a generated Deambiguable request leaves open.
enum class DeambiguableMasking { Tool, Target, Both };

struct GeneratorConfig {
    int unambiguous = 60;
    int deambiguable = 60;
    int truly_ambiguous = 60;
    // Extra entities drawn into each scene beyond the required ones.
    int max_distractors = 2;
    std::vector<AmbiguityMechanism> mechanisms = {AmbiguityMechanism::ToolRemoval,
                                                  AmbiguityMechanism::AffordanceBreak,
                                                  AmbiguityMechanism::MultiTarget};
    std::vector<DeambiguableMasking> maskings = {DeambiguableMasking::Tool,
                                                 DeambiguableMasking::Target,
                                                 DeambiguableMasking::Both};
    Vocabulary vocab;
    AffordanceKB kb;
};

// Fingerprint of everything generation depends on besides the seed.
std::string generator_config_hash(const GeneratorConfig& config);

// Draws labeled samples whose category is guaranteed by construction:
// every sample is re-checked through reason() before it is emitted.
// Output is a pure function of (config, seed); per-sample streams are
// split by sample index. Throws ConfigError("unrealizable-label") when
// the vocabulary/KB cannot realize a requested label.
std::vector<LabeledSample> generate_synthetic(const GeneratorConfig& config,
                                              std::uint64_t seed);

// generate_synthetic plus a filled header.
Dataset generate_dataset(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace ambigate

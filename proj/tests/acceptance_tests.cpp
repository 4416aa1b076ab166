// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ambigate/conformal.hpp"
#include "ambigate/dataset.hpp"
#include "ambigate/io_util.hpp"
#include "ambigate/pipeline.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ambigate;

namespace {

const FlagWeights kEqual{1.0, 1.0, 1.0};

struct Failure {
    std::string detail;
};

using CriterionFn = std::function<std::string()>;  // returns pass detail, throws Failure

// Same vocabulary and affordances as the shipped data files, inlined so
// the suite does not depend on working-directory layout.
Vocabulary default_vocab() {
    Vocabulary vocab;
    vocab.verbs = {"grasp", "cut", "clip", "retract", "coagulate", "irrigate", "dissect"};
    vocab.tool_labels = {"grasper", "scissors", "hook", "bipolar", "clipper", "irrigator"};
    vocab.object_labels = {"gallbladder", "cystic duct", "cystic artery", "liver",
                           "tissue", "peritoneum", "omentum"};
    return vocab;
}

AffordanceKB default_kb() {
    return AffordanceKB::from_facts({
        {"grasper", "grasp", "gallbladder"},
        {"grasper", "grasp", "tissue"},
        {"grasper", "grasp", "omentum"},
        {"grasper", "retract", "gallbladder"},
        {"grasper", "retract", "liver"},
        {"grasper", "retract", "omentum"},
        {"scissors", "cut", "cystic duct"},
        {"scissors", "cut", "cystic artery"},
        {"scissors", "cut", "tissue"},
        {"scissors", "cut", "peritoneum"},
        {"hook", "dissect", "tissue"},
        {"hook", "dissect", "gallbladder"},
        {"hook", "dissect", "peritoneum"},
        {"hook", "coagulate", "tissue"},
        {"bipolar", "coagulate", "cystic artery"},
        {"bipolar", "coagulate", "tissue"},
        {"bipolar", "coagulate", "liver"},
        {"clipper", "clip", "cystic duct"},
        {"clipper", "clip", "cystic artery"},
        {"irrigator", "irrigate", "liver"},
        {"irrigator", "irrigate", "tissue"},
    });
}

GeneratorConfig default_config() {
    GeneratorConfig config;
    config.vocab = default_vocab();
    config.kb = default_kb();
    return config;
}

void expect(bool condition, const std::string& detail) {
    if (!condition) {
        throw Failure{detail};
    }
}

std::string fmt(double value) { return format_double_shortest(value); }

// --- criterion 1 -----------------------------------------------------------
// Exchangeable draws: each trial redraws its calibration set, so the
// empirical miscoverage estimates the marginal guarantee.

std::string criterion_validity() {
    std::mt19937_64 rng(2024);
    const double alpha = 0.1;
    const int trials = 2000;
    const int per_class = 60;
    auto draw_amb = [&] {
        return AmbiguityFlags{oracles::coin(rng, 0.7), oracles::coin(rng, 0.4),
                              oracles::coin(rng, 0.5)};
    };
    auto draw_nonamb = [&] {
        return AmbiguityFlags{oracles::coin(rng, 0.1), oracles::coin(rng, 0.1),
                              oracles::coin(rng, 0.2)};
    };

    int low_amb = 0;
    int low_nonamb = 0;
    for (int t = 0; t < trials; ++t) {
        CalibrationSet calib;
        for (int k = 0; k < per_class; ++k) {
            calib.amb_scores.push_back(
                nonconformity(draw_amb(), SampleClass::Ambiguous, kEqual));
            calib.nonamb_scores.push_back(
                nonconformity(draw_nonamb(), SampleClass::NonAmbiguous, kEqual));
        }
        if (p_values(calib, draw_amb(), kEqual).p_amb <= alpha) ++low_amb;
        if (p_values(calib, draw_nonamb(), kEqual).p_nonamb <= alpha) ++low_nonamb;
    }

    const double bound = alpha + 3.0 * std::sqrt(alpha * (1.0 - alpha) / trials);
    const double rate_amb = static_cast<double>(low_amb) / trials;
    const double rate_nonamb = static_cast<double>(low_nonamb) / trials;
    expect(rate_amb <= bound, "amb miscoverage " + fmt(rate_amb) + " exceeds bound " +
                                  fmt(bound));
    expect(rate_nonamb <= bound, "nonamb miscoverage " + fmt(rate_nonamb) +
                                     " exceeds bound " + fmt(bound));
    return "rates " + fmt(rate_amb) + "/" + fmt(rate_nonamb) + " vs bound " + fmt(bound);
}

// --- criterion 2 -----------------------------------------------------------

std::string criterion_pvalue_oracle() {
    std::mt19937_64 rng(501);
    for (int i = 0; i < 1000; ++i) {
        oracles::IntWeights int_weights;
        do {
            int_weights.tool = static_cast<int>(rng() % 5);
            int_weights.action = static_cast<int>(rng() % 5);
            int_weights.target = static_cast<int>(rng() % 5);
        } while (int_weights.sum() == 0);
        const FlagWeights weights{static_cast<double>(int_weights.tool),
                                  static_cast<double>(int_weights.action),
                                  static_cast<double>(int_weights.target)};

        std::vector<AmbiguityFlags> amb_flags(1 + rng() % 50);
        std::vector<AmbiguityFlags> nonamb_flags(1 + rng() % 50);
        std::vector<std::pair<AmbiguityFlags, SampleClass>> samples;
        for (auto& flags : amb_flags) {
            flags = oracles::random_flags(rng);
            samples.emplace_back(flags, SampleClass::Ambiguous);
        }
        for (auto& flags : nonamb_flags) {
            flags = oracles::random_flags(rng);
            samples.emplace_back(flags, SampleClass::NonAmbiguous);
        }
        const AmbiguityFlags test = oracles::random_flags(rng);

        const PValuePair actual = p_values(calibrate(samples, weights), test, weights);
        const oracles::OraclePValues expected =
            oracles::oracle_p_values(amb_flags, nonamb_flags, test, int_weights);
        expect(actual.p_amb == expected.p_amb && actual.p_nonamb == expected.p_nonamb,
               "instance " + std::to_string(i) + ": (" + fmt(actual.p_amb) + ", " +
                   fmt(actual.p_nonamb) + ") vs oracle (" + fmt(expected.p_amb) + ", " +
                   fmt(expected.p_nonamb) + ")");
    }
    return "1000 randomized instances match exactly";
}

// --- criterion 3 -----------------------------------------------------------

std::string criterion_reasoning_oracle() {
    std::mt19937_64 rng(733);
    for (int i = 0; i < 500; ++i) {
        const auto scene = oracles::random_scene(rng, 6);
        const auto triple = oracles::random_triple(rng);
        const auto kb = oracles::random_kb(rng, 20);

        const auto actual = reason(scene, triple, kb);
        const auto expected = oracles::oracle_reason(scene, triple, kb);
        expect(actual.flags == expected.flags,
               "flags diverge on case " + std::to_string(i));
        expect(actual.resolved == expected.resolved,
               "resolution diverges on case " + std::to_string(i));
        const std::set<std::pair<std::string, std::string>> actual_candidates(
            actual.candidates.begin(), actual.candidates.end());
        expect(actual_candidates == expected.candidates,
               "candidate sets diverge on case " + std::to_string(i));
    }
    return "500 randomized cases match the enumeration oracle";
}

// --- criterion 4 -----------------------------------------------------------

void strip_required_tools(LabeledSample& sample, const GeneratorConfig& config) {
    const auto triple = parse_instruction(sample.request, config.vocab);
    const auto facts =
        config.kb.matching_facts(triple.tool, triple.action, triple.target);
    auto& entities = sample.scene.entities;
    entities.erase(std::remove_if(entities.begin(), entities.end(),
                                  [&](const Entity& entity) {
                                      if (entity.kind != EntityKind::Tool) return false;
                                      return std::any_of(
                                          facts.begin(), facts.end(),
                                          [&](const AffordanceFact& fact) {
                                              return fact.tool == entity.label;
                                          });
                                  }),
                   entities.end());
    for (auto& entity : entities) {
        std::erase_if(entity.states, [&](const auto& state) {
            const auto* ref = std::get_if<std::string>(&state.second);
            return ref != nullptr && sample.scene.find(*ref) == nullptr;
        });
    }
}

std::string criterion_end_to_end() {
    const GeneratorConfig config = default_config();  // 60/60/60

    const Dataset dataset = generate_dataset(config, 42);
    const Dataset rerun = generate_dataset(config, 42);
    expect(serialize_dataset(dataset) == serialize_dataset(rerun),
           "generation is not deterministic for seed 42");
    expect(dataset.samples.size() == 180, "expected 180 samples");

    DatasetSplit split = split_dataset(dataset.samples);
    expect(split.calibration.size() == 120 && split.test.size() == 60,
           "expected a 120/60 split");

    const CalibrationSet calib =
        calibrate_from_samples(split.calibration, config.kb, config.vocab, kEqual);
    const SignificanceLevel alpha(0.1);

    const EvaluationReport clean =
        evaluate(split.test, config.kb, config.vocab, calib, alpha, kEqual);
    expect(clean.tally.disambiguated == 60 && clean.tally.failed == 0 &&
               clean.tally.uncertain == 0,
           "clean tally is (" + std::to_string(clean.tally.disambiguated) + ", " +
               std::to_string(clean.tally.failed) + ", " +
               std::to_string(clean.tally.uncertain) + "), expected (60, 0, 0)");

    constexpr std::size_t kCorrupted = 10;
    for (std::size_t i = 0; i < kCorrupted; ++i) {
        strip_required_tools(split.test[i], config);
    }
    const EvaluationReport corrupted =
        evaluate(split.test, config.kb, config.vocab, calib, alpha, kEqual);
    expect(corrupted.tally.disambiguated == 50,
           "corrupted tally kept " + std::to_string(corrupted.tally.disambiguated) +
               " disambiguated, expected 50");
    for (std::size_t i = 0; i < corrupted.outcomes.size(); ++i) {
        const bool disambiguated =
            corrupted.outcomes[i].bucket == OutcomeBucket::Disambiguated;
        expect(disambiguated == (i >= kCorrupted),
               "corruption moved the wrong sample at index " + std::to_string(i));
    }
    return "tally (60,0,0) clean; exactly the 10 corrupted samples left the bucket";
}

// --- criterion 5 -----------------------------------------------------------

std::string criterion_quadrants() {
    for (const double alpha_value : {0.05, 0.1, 0.2}) {
        const SignificanceLevel alpha(alpha_value);
        for (int i = 1; i <= 100; ++i) {
            for (int j = 1; j <= 100; ++j) {
                const PValuePair p{i / 100.0, j / 100.0};
                const Decision decision = decide(p, alpha);
                const bool is_exec = decision.verdict == Verdict::Executable;
                const bool should_exec =
                    p.p_nonamb > alpha_value && p.p_amb <= alpha_value;
                expect(is_exec == should_exec,
                       "executable region mismatch at p=(" + fmt(p.p_amb) + "," +
                           fmt(p.p_nonamb) + "), alpha=" + fmt(alpha_value));
                const int verdict_count =
                    (decision.verdict == Verdict::Executable ? 1 : 0) +
                    (decision.verdict == Verdict::Ambiguous ? 1 : 0) +
                    (decision.verdict == Verdict::Uncertain ? 1 : 0);
                expect(verdict_count == 1, "verdict is not exactly one of the three");
                if (decision.verdict == Verdict::Ambiguous) {
                    expect(p.p_amb > alpha_value && p.p_nonamb <= alpha_value,
                           "ambiguous region mismatch");
                }
                if (decision.verdict == Verdict::Uncertain) {
                    const bool both = p.p_amb > alpha_value && p.p_nonamb > alpha_value;
                    const bool neither =
                        p.p_amb <= alpha_value && p.p_nonamb <= alpha_value;
                    expect(both || neither, "uncertain region mismatch");
                    expect(decision.reason_code == (both ? ReasonCode::BothCredible
                                                         : ReasonCode::NeitherCredible),
                           "uncertain reason code mismatch");
                }
            }
        }
    }
    return "30000 grid points over three alpha levels";
}

// --- criterion 6 -----------------------------------------------------------

std::string criterion_separation() {
    const GeneratorConfig config = default_config();
    const Dataset dataset = generate_dataset(config, 42);
    const DatasetSplit split = split_dataset(dataset.samples);
    const CalibrationSet calib =
        calibrate_from_samples(split.calibration, config.kb, config.vocab, kEqual);

    double sum_p_amb[2] = {0.0, 0.0};     // [unambiguous, truly ambiguous]
    double sum_p_nonamb[2] = {0.0, 0.0};
    int count[2] = {0, 0};
    for (const auto& sample : split.calibration) {
        const auto triple = parse_instruction(sample.request, config.vocab);
        const auto result = reason(sample.scene, triple, config.kb);
        const PValuePair p = p_values(calib, result.flags, kEqual);
        const int group = sample.label == AmbiguityLabel::TrulyAmbiguous ? 1 : 0;
        sum_p_amb[group] += p.p_amb;
        sum_p_nonamb[group] += p.p_nonamb;
        ++count[group];
    }
    expect(count[0] > 0 && count[1] > 0, "calibration set lacks a label group");
    const double mean_p_amb_unamb = sum_p_amb[0] / count[0];
    const double mean_p_amb_truly = sum_p_amb[1] / count[1];
    const double mean_p_nonamb_unamb = sum_p_nonamb[0] / count[0];
    const double mean_p_nonamb_truly = sum_p_nonamb[1] / count[1];

    expect(mean_p_amb_truly > mean_p_amb_unamb,
           "p_amb means are not separated: " + fmt(mean_p_amb_truly) +
               " <= " + fmt(mean_p_amb_unamb));
    expect(mean_p_nonamb_unamb > mean_p_nonamb_truly,
           "p_nonamb means are not separated: " + fmt(mean_p_nonamb_unamb) +
               " <= " + fmt(mean_p_nonamb_truly));
    return "mean p_amb " + fmt(mean_p_amb_truly) + " > " + fmt(mean_p_amb_unamb) +
           "; mean p_nonamb " + fmt(mean_p_nonamb_unamb) + " > " +
           fmt(mean_p_nonamb_truly);
}

// --- criterion 7 -----------------------------------------------------------

std::string criterion_round_trips() {
    std::mt19937_64 rng(907);

    for (int i = 0; i < 100; ++i) {
        const SceneDescription scene = oracles::random_scene(rng);
        const std::string bytes = serialize_scene(scene);
        expect(serialize_scene(parse_scene(bytes)) == bytes,
               "scene round trip diverged on instance " + std::to_string(i));
    }
    for (int i = 0; i < 100; ++i) {
        const AffordanceKB kb = oracles::random_kb(rng);
        const std::string bytes = serialize_kb(kb);
        expect(serialize_kb(parse_kb(bytes)) == bytes,
               "kb round trip diverged on instance " + std::to_string(i));
    }

    GeneratorConfig config = default_config();
    for (int i = 0; i < 100; ++i) {
        config.unambiguous = 1 + static_cast<int>(rng() % 2);
        config.deambiguable = 1 + static_cast<int>(rng() % 2);
        config.truly_ambiguous = 1 + static_cast<int>(rng() % 2);
        const Dataset dataset = generate_dataset(config, rng());
        const std::string bytes = serialize_dataset(dataset);
        expect(serialize_dataset(parse_dataset(bytes)) == bytes,
               "dataset round trip diverged on instance " + std::to_string(i));
    }

    for (int i = 0; i < 100; ++i) {
        CalibrationArtifact artifact;
        artifact.weights = FlagWeights{static_cast<double>(1 + rng() % 4),
                                       static_cast<double>(rng() % 4),
                                       static_cast<double>(1 + rng() % 4)};
        artifact.alpha = (1 + rng() % 98) / 100.0;
        const std::size_t amb_n = 1 + rng() % 20;
        const std::size_t nonamb_n = 1 + rng() % 20;
        for (std::size_t k = 0; k < amb_n; ++k) {
            artifact.scores.amb_scores.push_back(nonconformity(
                oracles::random_flags(rng), SampleClass::Ambiguous, artifact.weights));
        }
        for (std::size_t k = 0; k < nonamb_n; ++k) {
            artifact.scores.nonamb_scores.push_back(
                nonconformity(oracles::random_flags(rng), SampleClass::NonAmbiguous,
                              artifact.weights));
        }
        artifact.created_from = fnv1a64_hex("instance-" + std::to_string(i));
        const std::string bytes = serialize_calibration_artifact(artifact);
        expect(serialize_calibration_artifact(parse_calibration_artifact(bytes)) ==
                   bytes,
               "calibration round trip diverged on instance " + std::to_string(i));
    }
    return "scene/kb/dataset/calibration identity over 100 instances each";
}

struct Criterion {
    int id;
    const char* name;
    long budget_ms;
    CriterionFn run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "conformal validity under exchangeable draws", 5000, criterion_validity},
        {2, "p-value formulas match the counting oracle exactly", 2000,
         criterion_pvalue_oracle},
        {3, "reasoning matches the enumeration oracle", 2000,
         criterion_reasoning_oracle},
        {4, "seeded end-to-end run: (60,0,0) and targeted corruption", 5000,
         criterion_end_to_end},
        {5, "decision quadrants partition the p-value grid", 1000, criterion_quadrants},
        {6, "calibration p-value distributions separate by class", 1000,
         criterion_separation},
        {7, "byte-exact save/load round trips", 2000, criterion_round_trips},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool passed = true;
        try {
            detail = criterion.run();
        } catch (const Failure& failure) {
            passed = false;
            detail = failure.detail;
        } catch (const std::exception& e) {
            passed = false;
            detail = std::string("exception: ") + e.what();
        }
        const auto elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - start)
                                    .count();
        if (passed && elapsed_ms > criterion.budget_ms) {
            passed = false;
            detail = "exceeded runtime budget of " + std::to_string(criterion.budget_ms) +
                     " ms";
        }
        if (!passed) {
            ++failures;
        }
        std::printf("%s  criterion %d: %s — %s [%ld ms]\n", passed ? "PASS" : "FAIL",
                    criterion.id, criterion.name, detail.c_str(),
                    static_cast<long>(elapsed_ms));
    }
    if (failures != 0) {
        std::printf("%d of 7 acceptance criteria failed\n", failures);
    } else {
        std::printf("all 7 acceptance criteria passed\n");
    }
    return failures;
}

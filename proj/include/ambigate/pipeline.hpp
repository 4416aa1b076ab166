#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ambigate/conformal.hpp"
#include "ambigate/dataset.hpp"

namespace ambigate {

// Full gate output for one request. An Executable decision always carries
// a resolved command: if an expert reports clear flags without a command,
// the verdict is forced to Uncertain and the forcing is recorded as a
// "safety-gate" trace step.
struct PipelineVerdict {
    Decision decision;
    PValuePair p;
    AmbiguityFlags flags;
    std::optional<ResolvedCommand> resolved;
    ReasoningTrace trace;
};

// Calibration class a labeled sample belongs to: TrulyAmbiguous samples
// are Ambiguous, everything else NonAmbiguous.
SampleClass label_to_class(AmbiguityLabel label);

// Scores an expert result and applies the decision rule plus the
// Executable-requires-resolved forcing. run_pipeline composes this with
// parsing and the expert; the interactive session uses it directly so it
// can also show the expert's candidate list.
PipelineVerdict apply_conformal_gate(DisambiguationResult result,
                                     const CalibrationSet& calib,
                                     SignificanceLevel alpha,
                                     const FlagWeights& weights);

// parse -> disambiguate -> p-values -> decide. Parse errors propagate with
// the original request text attached.
PipelineVerdict run_pipeline(const SceneDescription& scene, std::string_view request,
                             const AffordanceKB& kb, const Vocabulary& vocab,
                             const CalibrationSet& calib, SignificanceLevel alpha,
                             const FlagWeights& weights,
                             const ExpertInterface& expert = rule_based_expert());

// Runs the expert over every sample and scores each against its own
// class. Used to build calibration artifacts.
CalibrationSet calibrate_from_samples(const std::vector<LabeledSample>& samples,
                                      const AffordanceKB& kb, const Vocabulary& vocab,
                                      const FlagWeights& weights,
                                      const ExpertInterface& expert = rule_based_expert());

enum class OutcomeBucket { Disambiguated, Failed, Uncertain };

std::string_view to_string(OutcomeBucket bucket);

struct OutcomeTally {
    int disambiguated = 0;
    int failed = 0;
    int uncertain = 0;
    int total = 0;
};

struct SampleOutcome {
    std::size_t index = 0;
    std::string request;
    PipelineVerdict verdict;
    OutcomeBucket bucket = OutcomeBucket::Uncertain;
};

struct EvaluationReport {
    OutcomeTally tally;
    std::vector<SampleOutcome> outcomes;
};

// Outcome accounting over a Deambiguable test set:
//   Executable and resolved == gold     -> disambiguated
//   Executable with a wrong resolution,
//   or verdict Ambiguous                -> failed
//   verdict Uncertain                   -> uncertain
// Throws Error("missing-gold") when a test sample has no gold command.
EvaluationReport evaluate(const std::vector<LabeledSample>& test_samples,
                          const AffordanceKB& kb, const Vocabulary& vocab,
                          const CalibrationSet& calib, SignificanceLevel alpha,
                          const FlagWeights& weights,
                          const ExpertInterface& expert = rule_based_expert());

// CSV with header "label,p_amb,p_nonamb" and one row per sample: the true
// label and both conformal p-values of the sample's flags.
std::string export_pvalue_distributions(const CalibrationSet& calib,
                                        const std::vector<LabeledSample>& samples,
                                        const AffordanceKB& kb, const Vocabulary& vocab,
                                        const FlagWeights& weights,
                                        const ExpertInterface& expert = rule_based_expert());

// JSON object with the five verdict fields (decision, p, flags, resolved,
// trace); used by the CLI and the results/transcript files.
std::string verdict_to_json_line(const PipelineVerdict& verdict);

// Per-sample results file: JSON-lines, one record per outcome.
std::string serialize_outcomes(const EvaluationReport& report);

}  // namespace ambigate

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ambigate/reasoning.hpp"

namespace ambigate {

// Per-flag weights for the evidence score. Non-negative with a positive
// sum; scaling all three by the same factor changes nothing downstream.
struct FlagWeights {
    double tool = 1.0;
    double action = 1.0;
    double target = 1.0;

    // Throws ConfigError when a weight is negative or the sum is not
    // positive.
    void validate() const;
};

enum class SampleClass { Ambiguous, NonAmbiguous };

// Weighted fraction of raised flags, in [0,1].
double ambiguity_evidence(const AmbiguityFlags& flags, const FlagWeights& weights);

// Nonconformity A(x, y): how unusual the flags are under the hypothesized
// class. A(x, NonAmbiguous) = e(x); A(x, Ambiguous) = 1 - e(x).
double nonconformity(const AmbiguityFlags& flags, SampleClass hypothesized,
                     const FlagWeights& weights);

// Per-class calibration scores, in input order.
struct CalibrationSet {
    std::vector<double> amb_scores;
    std::vector<double> nonamb_scores;
};

// Scores each sample against its own class and routes it to that class's
// list. Throws Error("missing-class") when either class has no samples.
CalibrationSet calibrate(
    const std::vector<std::pair<AmbiguityFlags, SampleClass>>& samples,
    const FlagWeights& weights);

struct PValuePair {
    double p_amb = 0.0;
    double p_nonamb = 0.0;
};

// Smoothed rank of alpha_test among one class's calibration scores:
//   (|{i : alpha_i >= alpha_test}| + 1) / (n + 1)
// Ties count toward the numerator.
double conformal_p_value(const std::vector<double>& class_scores, double alpha_test);

// Both p-values for a test sample. Throws Error("missing-class") when a
// calibration class is empty.
PValuePair p_values(const CalibrationSet& calib, const AmbiguityFlags& flags,
                    const FlagWeights& weights);

enum class Verdict { Executable, Ambiguous, Uncertain };

enum class ReasonCode { RuleExecutable, RuleAmbiguous, BothCredible, NeitherCredible };

std::string_view to_string(Verdict verdict);
std::string_view to_string(ReasonCode code);
Verdict verdict_from_string(std::string_view text);
ReasonCode reason_code_from_string(std::string_view text);

struct Decision {
    Verdict verdict = Verdict::Uncertain;
    ReasonCode reason_code = ReasonCode::NeitherCredible;

    bool operator==(const Decision&) const = default;
};

// Threshold below which a class's credibility is rejected.
class SignificanceLevel {
public:
    SignificanceLevel() = default;
    // Throws ConfigError unless 0 < alpha < 1.
    explicit SignificanceLevel(double alpha);

    double alpha() const { return alpha_; }

private:
    double alpha_ = 0.1;
};

// The four (p_amb vs alpha, p_nonamb vs alpha) quadrants:
//   Executable  iff p_nonamb >  alpha and p_amb <= alpha
//   Ambiguous   iff p_amb    >  alpha and p_nonamb <= alpha
//   Uncertain   otherwise (both-credible when both exceed alpha,
//                          neither-credible when neither does)
Decision decide(const PValuePair& p, SignificanceLevel level);

// Offline calibration artifact. `created_from` fingerprints the dataset
// the scores came from; `flag_source` records how the flags were obtained
// (this implementation computes them by running the rule-based expert on
// each calibration sample).
struct CalibrationArtifact {
    FlagWeights weights;
    double alpha = 0.1;
    CalibrationSet scores;
    std::string created_from;
    std::string flag_source = "pipeline";
};

CalibrationArtifact parse_calibration_artifact(std::string_view document);

// Scores are serialized as decimal with 17 significant digits, so parsing
// recovers the exact doubles and re-serializing is byte-identical.
std::string serialize_calibration_artifact(const CalibrationArtifact& artifact);

}  // namespace ambigate

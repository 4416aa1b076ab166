#include "ambigate/conformal.hpp"

#include <nlohmann/json.hpp>

#include "ambigate/errors.hpp"
#include "ambigate/io_util.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

void FlagWeights::validate() const {
    if (tool < 0.0 || action < 0.0 || target < 0.0) {
        throw ConfigError("invalid-weights", "flag weights must be non-negative");
    }
    if (tool + action + target <= 0.0) {
        throw ConfigError("invalid-weights", "flag weights must have a positive sum");
    }
}

double ambiguity_evidence(const AmbiguityFlags& flags, const FlagWeights& weights) {
    weights.validate();
    const double raised = weights.tool * (flags.tool_missing ? 1.0 : 0.0) +
                          weights.action * (flags.action_invalid ? 1.0 : 0.0) +
                          weights.target * (flags.target_unclear ? 1.0 : 0.0);
    return raised / (weights.tool + weights.action + weights.target);
}

double nonconformity(const AmbiguityFlags& flags, SampleClass hypothesized,
                     const FlagWeights& weights) {
    const double evidence = ambiguity_evidence(flags, weights);
    return hypothesized == SampleClass::NonAmbiguous ? evidence : 1.0 - evidence;
}

CalibrationSet calibrate(
    const std::vector<std::pair<AmbiguityFlags, SampleClass>>& samples,
    const FlagWeights& weights) {
    CalibrationSet calib;
    for (const auto& [flags, cls] : samples) {
        const double score = nonconformity(flags, cls, weights);
        if (cls == SampleClass::Ambiguous) {
            calib.amb_scores.push_back(score);
        } else {
            calib.nonamb_scores.push_back(score);
        }
    }
    if (calib.amb_scores.empty()) {
        throw Error("missing-class", "no Ambiguous calibration samples");
    }
    if (calib.nonamb_scores.empty()) {
        throw Error("missing-class", "no NonAmbiguous calibration samples");
    }
    return calib;
}

double conformal_p_value(const std::vector<double>& class_scores, double alpha_test) {
    if (class_scores.empty()) {
        throw Error("missing-class", "empty calibration class");
    }
    std::size_t at_least = 0;
    for (double score : class_scores) {
        if (score >= alpha_test) {
            ++at_least;
        }
    }
    return static_cast<double>(at_least + 1) /
           static_cast<double>(class_scores.size() + 1);
}

PValuePair p_values(const CalibrationSet& calib, const AmbiguityFlags& flags,
                    const FlagWeights& weights) {
    PValuePair p;
    p.p_amb = conformal_p_value(calib.amb_scores,
                                nonconformity(flags, SampleClass::Ambiguous, weights));
    p.p_nonamb = conformal_p_value(
        calib.nonamb_scores, nonconformity(flags, SampleClass::NonAmbiguous, weights));
    return p;
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Executable: return "executable";
        case Verdict::Ambiguous: return "ambiguous";
        case Verdict::Uncertain: return "uncertain";
    }
    return "uncertain";
}

std::string_view to_string(ReasonCode code) {
    switch (code) {
        case ReasonCode::RuleExecutable: return "rule-executable";
        case ReasonCode::RuleAmbiguous: return "rule-ambiguous";
        case ReasonCode::BothCredible: return "both-credible";
        case ReasonCode::NeitherCredible: return "neither-credible";
    }
    return "neither-credible";
}

Verdict verdict_from_string(std::string_view text) {
    if (text == "executable") return Verdict::Executable;
    if (text == "ambiguous") return Verdict::Ambiguous;
    if (text == "uncertain") return Verdict::Uncertain;
    throw ParseError("malformed", "unknown verdict '" + std::string(text) + "'");
}

ReasonCode reason_code_from_string(std::string_view text) {
    if (text == "rule-executable") return ReasonCode::RuleExecutable;
    if (text == "rule-ambiguous") return ReasonCode::RuleAmbiguous;
    if (text == "both-credible") return ReasonCode::BothCredible;
    if (text == "neither-credible") return ReasonCode::NeitherCredible;
    throw ParseError("malformed", "unknown reason code '" + std::string(text) + "'");
}

SignificanceLevel::SignificanceLevel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("invalid-alpha", "significance level must lie in (0,1)");
    }
}

Decision decide(const PValuePair& p, SignificanceLevel level) {
    const double alpha = level.alpha();
    const bool amb_credible = p.p_amb > alpha;
    const bool nonamb_credible = p.p_nonamb > alpha;
    if (nonamb_credible && !amb_credible) {
        return {Verdict::Executable, ReasonCode::RuleExecutable};
    }
    if (amb_credible && !nonamb_credible) {
        return {Verdict::Ambiguous, ReasonCode::RuleAmbiguous};
    }
    if (amb_credible && nonamb_credible) {
        return {Verdict::Uncertain, ReasonCode::BothCredible};
    }
    return {Verdict::Uncertain, ReasonCode::NeitherCredible};
}

namespace {

std::string score_array_text(const std::vector<double>& scores) {
    std::string out = "[";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i != 0) {
            out += ", ";
        }
        out += format_double_17(scores[i]);
    }
    out += "]";
    return out;
}

std::vector<double> parse_score_array(const ordered_json& node, const char* key) {
    if (!node.is_array()) {
        throw ParseError("malformed",
                         std::string("calibration '") + key + "' must be an array");
    }
    std::vector<double> scores;
    scores.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_number()) {
            throw ParseError("malformed", std::string("calibration '") + key +
                                              "' must contain only numbers");
        }
        const double value = item.get<double>();
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ParseError("malformed", std::string("calibration score out of [0,1] in '") +
                                              key + "'");
        }
        scores.push_back(value);
    }
    return scores;
}

}  // namespace

CalibrationArtifact parse_calibration_artifact(std::string_view document) {
    ordered_json root;
    try {
        root = ordered_json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed", std::string("calibration document: ") + e.what());
    }
    if (!root.is_object()) {
        throw ParseError("malformed", "calibration document must be a JSON object");
    }
    for (const char* key :
         {"weights", "alpha", "amb_scores", "nonamb_scores", "created_from"}) {
        if (!root.contains(key)) {
            throw ParseError("malformed",
                             std::string("calibration document is missing key '") + key +
                                 "'");
        }
    }

    CalibrationArtifact artifact;
    const auto& weights = root.at("weights");
    if (!weights.is_object() || !weights.contains("tool") || !weights.contains("action") ||
        !weights.contains("target") || !weights.at("tool").is_number() ||
        !weights.at("action").is_number() || !weights.at("target").is_number()) {
        throw ParseError("malformed",
                         "calibration 'weights' must carry tool/action/target numbers");
    }
    artifact.weights.tool = weights.at("tool").get<double>();
    artifact.weights.action = weights.at("action").get<double>();
    artifact.weights.target = weights.at("target").get<double>();
    artifact.weights.validate();

    if (!root.at("alpha").is_number()) {
        throw ParseError("malformed", "calibration 'alpha' must be a number");
    }
    artifact.alpha = SignificanceLevel(root.at("alpha").get<double>()).alpha();
    artifact.scores.amb_scores = parse_score_array(root.at("amb_scores"), "amb_scores");
    artifact.scores.nonamb_scores =
        parse_score_array(root.at("nonamb_scores"), "nonamb_scores");
    if (!root.at("created_from").is_string()) {
        throw ParseError("malformed", "calibration 'created_from' must be a string");
    }
    artifact.created_from = root.at("created_from").get<std::string>();
    if (root.contains("flag_source")) {
        if (!root.at("flag_source").is_string()) {
            throw ParseError("malformed", "calibration 'flag_source' must be a string");
        }
        artifact.flag_source = root.at("flag_source").get<std::string>();
    }
    return artifact;
}

std::string serialize_calibration_artifact(const CalibrationArtifact& artifact) {
    // Hand-rolled so score formatting is exactly %.17g.
    std::string out = "{\n";
    out += "  \"weights\": {\"tool\": " + format_double_17(artifact.weights.tool) +
           ", \"action\": " + format_double_17(artifact.weights.action) +
           ", \"target\": " + format_double_17(artifact.weights.target) + "},\n";
    out += "  \"alpha\": " + format_double_17(artifact.alpha) + ",\n";
    out += "  \"amb_scores\": " + score_array_text(artifact.scores.amb_scores) + ",\n";
    out += "  \"nonamb_scores\": " + score_array_text(artifact.scores.nonamb_scores) +
           ",\n";
    out += "  \"created_from\": " + ordered_json(artifact.created_from).dump() + ",\n";
    out += "  \"flag_source\": " + ordered_json(artifact.flag_source).dump() + "\n";
    out += "}\n";
    return out;
}

}  // namespace ambigate

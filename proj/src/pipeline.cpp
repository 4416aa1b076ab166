#include "ambigate/pipeline.hpp"

#include <nlohmann/json.hpp>

#include "ambigate/errors.hpp"
#include "ambigate/io_util.hpp"

namespace ambigate {

using ordered_json = nlohmann::ordered_json;

SampleClass label_to_class(AmbiguityLabel label) {
    return label == AmbiguityLabel::TrulyAmbiguous ? SampleClass::Ambiguous
                                                   : SampleClass::NonAmbiguous;
}

PipelineVerdict apply_conformal_gate(DisambiguationResult result,
                                     const CalibrationSet& calib,
                                     SignificanceLevel alpha,
                                     const FlagWeights& weights) {
    PipelineVerdict verdict;
    verdict.flags = result.flags;
    verdict.resolved = std::move(result.resolved);
    verdict.trace = std::move(result.trace);
    verdict.p = p_values(calib, verdict.flags, weights);
    verdict.decision = decide(verdict.p, alpha);

    // The gate never authorizes a command it does not have.
    if (verdict.decision.verdict == Verdict::Executable && !verdict.resolved.has_value()) {
        verdict.decision = {Verdict::Uncertain, ReasonCode::NeitherCredible};
        verdict.trace.push_back({"safety-gate",
                                 "flags clear but no resolved command available",
                                 "forced uncertain"});
    }
    return verdict;
}

PipelineVerdict run_pipeline(const SceneDescription& scene, std::string_view request,
                             const AffordanceKB& kb, const Vocabulary& vocab,
                             const CalibrationSet& calib, SignificanceLevel alpha,
                             const FlagWeights& weights, const ExpertInterface& expert) {
    InstructionTriple triple;
    try {
        triple = parse_instruction(request, vocab);
    } catch (const ParseError& e) {
        throw ParseError(e.code(), std::string(e.what()) + " (request: \"" +
                                       std::string(request) + "\")");
    }
    return apply_conformal_gate(expert.disambiguate(scene, triple, kb), calib, alpha,
                                weights);
}

CalibrationSet calibrate_from_samples(const std::vector<LabeledSample>& samples,
                                      const AffordanceKB& kb, const Vocabulary& vocab,
                                      const FlagWeights& weights,
                                      const ExpertInterface& expert) {
    std::vector<std::pair<AmbiguityFlags, SampleClass>> scored;
    scored.reserve(samples.size());
    for (const auto& sample : samples) {
        const InstructionTriple triple = parse_instruction(sample.request, vocab);
        const DisambiguationResult result = expert.disambiguate(sample.scene, triple, kb);
        scored.emplace_back(result.flags, label_to_class(sample.label));
    }
    return calibrate(scored, weights);
}

std::string_view to_string(OutcomeBucket bucket) {
    switch (bucket) {
        case OutcomeBucket::Disambiguated: return "disambiguated";
        case OutcomeBucket::Failed: return "failed";
        case OutcomeBucket::Uncertain: return "uncertain";
    }
    return "uncertain";
}

EvaluationReport evaluate(const std::vector<LabeledSample>& test_samples,
                          const AffordanceKB& kb, const Vocabulary& vocab,
                          const CalibrationSet& calib, SignificanceLevel alpha,
                          const FlagWeights& weights, const ExpertInterface& expert) {
    EvaluationReport report;
    report.outcomes.reserve(test_samples.size());
    for (std::size_t i = 0; i < test_samples.size(); ++i) {
        const LabeledSample& sample = test_samples[i];
        if (!sample.gold.has_value()) {
            throw Error("missing-gold", "test sample " + std::to_string(i) +
                                            " has no gold command");
        }
        SampleOutcome outcome;
        outcome.index = i;
        outcome.request = sample.request;
        outcome.verdict =
            run_pipeline(sample.scene, sample.request, kb, vocab, calib, alpha, weights,
                         expert);

        const Decision& decision = outcome.verdict.decision;
        if (decision.verdict == Verdict::Executable) {
            outcome.bucket = outcome.verdict.resolved == *sample.gold
                                 ? OutcomeBucket::Disambiguated
                                 : OutcomeBucket::Failed;
        } else if (decision.verdict == Verdict::Ambiguous) {
            outcome.bucket = OutcomeBucket::Failed;
        } else {
            outcome.bucket = OutcomeBucket::Uncertain;
        }

        switch (outcome.bucket) {
            case OutcomeBucket::Disambiguated: ++report.tally.disambiguated; break;
            case OutcomeBucket::Failed: ++report.tally.failed; break;
            case OutcomeBucket::Uncertain: ++report.tally.uncertain; break;
        }
        ++report.tally.total;
        report.outcomes.push_back(std::move(outcome));
    }
    return report;
}

std::string export_pvalue_distributions(const CalibrationSet& calib,
                                        const std::vector<LabeledSample>& samples,
                                        const AffordanceKB& kb, const Vocabulary& vocab,
                                        const FlagWeights& weights,
                                        const ExpertInterface& expert) {
    std::string csv = "label,p_amb,p_nonamb\n";
    for (const auto& sample : samples) {
        const InstructionTriple triple = parse_instruction(sample.request, vocab);
        const DisambiguationResult result = expert.disambiguate(sample.scene, triple, kb);
        const PValuePair p = p_values(calib, result.flags, weights);
        csv += std::string(to_string(sample.label)) + "," +
               format_double_shortest(p.p_amb) + "," +
               format_double_shortest(p.p_nonamb) + "\n";
    }
    return csv;
}

namespace {

ordered_json verdict_to_json(const PipelineVerdict& verdict) {
    ordered_json node;
    node["decision"] = {{"verdict", std::string(to_string(verdict.decision.verdict))},
                        {"reason_code",
                         std::string(to_string(verdict.decision.reason_code))}};
    node["p"] = {{"p_amb", verdict.p.p_amb}, {"p_nonamb", verdict.p.p_nonamb}};
    node["flags"] = {{"tool_missing", verdict.flags.tool_missing ? 1 : 0},
                     {"action_invalid", verdict.flags.action_invalid ? 1 : 0},
                     {"target_unclear", verdict.flags.target_unclear ? 1 : 0}};
    if (verdict.resolved.has_value()) {
        node["resolved"] = {{"tool", verdict.resolved->tool},
                            {"action", verdict.resolved->action},
                            {"target", verdict.resolved->target}};
    } else {
        node["resolved"] = nullptr;
    }
    ordered_json trace = ordered_json::array();
    for (const auto& step : verdict.trace) {
        trace.push_back("[" + step.name + "] " + step.detail + " => " + step.outcome);
    }
    node["trace"] = std::move(trace);
    return node;
}

}  // namespace

std::string verdict_to_json_line(const PipelineVerdict& verdict) {
    return verdict_to_json(verdict).dump();
}

std::string serialize_outcomes(const EvaluationReport& report) {
    std::string out;
    for (const auto& outcome : report.outcomes) {
        ordered_json node;
        node["index"] = outcome.index;
        node["request"] = outcome.request;
        node["bucket"] = std::string(to_string(outcome.bucket));
        node["verdict"] = verdict_to_json(outcome.verdict);
        out += node.dump() + "\n";
    }
    return out;
}

}  // namespace ambigate

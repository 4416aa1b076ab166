// ambigate - command disambiguation with a conformal safety gate.
//
// Subcommands: generate, calibrate, evaluate, predict, session,
// export-pvalues. Exit codes: 0 success, 1 operational error, 2
// input/parse error.

#include <array>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"

#include "ambigate/affordance.hpp"
#include "ambigate/conformal.hpp"
#include "ambigate/dataset.hpp"
#include "ambigate/errors.hpp"
#include "ambigate/instruction.hpp"
#include "ambigate/io_util.hpp"
#include "ambigate/pipeline.hpp"
#include "ambigate/reasoning.hpp"
#include "ambigate/scene.hpp"

namespace fs = std::filesystem;
using ambigate::ConfigError;
using ambigate::Error;
using ambigate::ParseError;
using ordered_json = nlohmann::ordered_json;

namespace {

struct Options {
    std::string kb_path;
    std::string vocab_path;
    std::string dataset_path;
    std::string calibration_path;
    std::string scene_path;
    std::string out_path;
    std::string config_path;
    double alpha = 0.1;
    std::string weights_text = "1,1,1";
    std::uint64_t seed = 42;
    std::string counts_text = "60,60,60";
    int max_distractors = 2;
    std::string request;
};

ambigate::FlagWeights parse_weights(const std::string& text) {
    std::istringstream stream(text);
    std::string part;
    std::vector<double> values;
    while (std::getline(stream, part, ',')) {
        try {
            values.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError("invalid-weights", "cannot parse weight '" + part + "'");
        }
    }
    if (values.size() != 3) {
        throw ConfigError("invalid-weights",
                          "--weights expects w_tool,w_action,w_target");
    }
    ambigate::FlagWeights weights{values[0], values[1], values[2]};
    weights.validate();
    return weights;
}

std::array<int, 3> parse_counts(const std::string& text) {
    std::istringstream stream(text);
    std::string part;
    std::vector<int> values;
    while (std::getline(stream, part, ',')) {
        try {
            values.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("invalid-config", "cannot parse count '" + part + "'");
        }
    }
    if (values.size() != 3) {
        throw ConfigError("invalid-config",
                          "--counts expects unambiguous,deambiguable,truly_ambiguous");
    }
    return {values[0], values[1], values[2]};
}

// Values from --config fill in any option the command line left untouched.
void apply_config_file(const CLI::App& app, Options& opts) {
    if (opts.config_path.empty()) {
        return;
    }
    ordered_json root;
    try {
        root = ordered_json::parse(ambigate::read_file(opts.config_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("malformed", std::string("config file: ") + e.what());
    }
    if (!root.is_object()) {
        throw ParseError("malformed", "config file must be a JSON object");
    }

    auto unset = [&](const char* flag) {
        const CLI::Option* opt = app.get_option_no_throw(flag);
        return opt != nullptr && opt->count() == 0;
    };
    auto take_string = [&](const char* key, const char* flag, std::string& dest) {
        if (root.contains(key) && unset(flag)) {
            dest = root.at(key).get<std::string>();
        }
    };
    take_string("kb", "--kb", opts.kb_path);
    take_string("vocab", "--vocab", opts.vocab_path);
    take_string("dataset", "--dataset", opts.dataset_path);
    take_string("calibration", "--calibration", opts.calibration_path);
    take_string("scene", "--scene", opts.scene_path);
    take_string("out", "--out", opts.out_path);
    if (root.contains("alpha") && unset("--alpha")) {
        opts.alpha = root.at("alpha").get<double>();
    }
    if (root.contains("seed") && unset("--seed")) {
        opts.seed = root.at("seed").get<std::uint64_t>();
    }
    if (root.contains("weights") && unset("--weights")) {
        const auto& node = root.at("weights");
        if (node.is_string()) {
            opts.weights_text = node.get<std::string>();
        } else if (node.is_array() && node.size() == 3) {
            opts.weights_text = ambigate::format_double_shortest(node[0].get<double>()) +
                                "," +
                                ambigate::format_double_shortest(node[1].get<double>()) +
                                "," +
                                ambigate::format_double_shortest(node[2].get<double>());
        } else {
            throw ParseError("malformed",
                             "config 'weights' must be a string or 3-element array");
        }
    }
    if (root.contains("counts") && unset("--counts")) {
        opts.counts_text = root.at("counts").get<std::string>();
    }
}

std::string require_path(const std::string& value, const char* flag) {
    if (value.empty()) {
        throw ConfigError("missing-option", std::string(flag) + " is required");
    }
    return value;
}

ambigate::Vocabulary load_vocab(const Options& opts) {
    return ambigate::parse_vocabulary(
        ambigate::read_file(require_path(opts.vocab_path, "--vocab")));
}

ambigate::AffordanceKB load_kb(const Options& opts) {
    return ambigate::parse_kb(ambigate::read_file(require_path(opts.kb_path, "--kb")));
}

ambigate::CalibrationArtifact load_artifact(const Options& opts) {
    return ambigate::parse_calibration_artifact(
        ambigate::read_file(require_path(opts.calibration_path, "--calibration")));
}

std::string out_or(const Options& opts, const char* fallback) {
    return opts.out_path.empty() ? fallback : opts.out_path;
}

int cmd_generate(const Options& opts) {
    const auto counts = parse_counts(opts.counts_text);
    ambigate::GeneratorConfig config;
    config.unambiguous = counts[0];
    config.deambiguable = counts[1];
    config.truly_ambiguous = counts[2];
    config.max_distractors = opts.max_distractors;
    config.vocab = load_vocab(opts);
    config.kb = load_kb(opts);

    const ambigate::Dataset dataset = ambigate::generate_dataset(config, opts.seed);
    const std::string out = out_or(opts, "dataset.jsonl");
    ambigate::save_dataset(dataset, out);

    std::printf("generated %zu samples -> %s\n", dataset.samples.size(), out.c_str());
    std::printf("  unambiguous:     %d\n", config.unambiguous);
    std::printf("  deambiguable:    %d\n", config.deambiguable);
    std::printf("  truly_ambiguous: %d\n", config.truly_ambiguous);
    return 0;
}

int cmd_calibrate(const Options& opts) {
    const std::string dataset_bytes =
        ambigate::read_file(require_path(opts.dataset_path, "--dataset"));
    const ambigate::Dataset dataset = ambigate::parse_dataset(dataset_bytes);
    const ambigate::Vocabulary vocab = load_vocab(opts);
    const ambigate::AffordanceKB kb = load_kb(opts);
    const ambigate::FlagWeights weights = parse_weights(opts.weights_text);
    const ambigate::SignificanceLevel alpha(opts.alpha);

    const ambigate::DatasetSplit split = ambigate::split_dataset(dataset.samples);
    ambigate::CalibrationArtifact artifact;
    artifact.weights = weights;
    artifact.alpha = alpha.alpha();
    artifact.scores = ambigate::calibrate_from_samples(split.calibration, kb, vocab,
                                                       weights);
    artifact.created_from = ambigate::fnv1a64_hex(dataset_bytes);
    artifact.flag_source = "pipeline";

    const std::string out = out_or(opts, "calibration.json");
    ambigate::write_file(out, ambigate::serialize_calibration_artifact(artifact));

    std::printf("calibrated from %zu samples -> %s\n", split.calibration.size(),
                out.c_str());
    std::printf("  C_Amb:    %zu scores\n", artifact.scores.amb_scores.size());
    std::printf("  C_NonAmb: %zu scores\n", artifact.scores.nonamb_scores.size());
    return 0;
}

void print_tally_row(const char* name, int count, int total) {
    const double pct = total > 0 ? 100.0 * count / total : 0.0;
    std::printf("%-41s %5d %10.1f%%\n", name, count, pct);
}

int cmd_evaluate(const Options& opts) {
    const ambigate::Dataset dataset =
        ambigate::load_dataset(require_path(opts.dataset_path, "--dataset"));
    const ambigate::Vocabulary vocab = load_vocab(opts);
    const ambigate::AffordanceKB kb = load_kb(opts);
    const ambigate::CalibrationArtifact artifact = load_artifact(opts);

    const ambigate::DatasetSplit split = ambigate::split_dataset(dataset.samples);
    const ambigate::EvaluationReport report = ambigate::evaluate(
        split.test, kb, vocab, artifact.scores,
        ambigate::SignificanceLevel(artifact.alpha), artifact.weights);

    const std::string out = out_or(opts, "results.jsonl");
    ambigate::write_file(out, ambigate::serialize_outcomes(report));

    std::printf("%-41s %5s %11s\n", "Outcome Category", "Count", "Percentage");
    print_tally_row("Successfully Disambiguated", report.tally.disambiguated,
                    report.tally.total);
    print_tally_row("Failed Disambiguation (Still Ambiguous)", report.tally.failed,
                    report.tally.total);
    print_tally_row("Flagged as Uncertain", report.tally.uncertain, report.tally.total);
    print_tally_row("Total", report.tally.total, report.tally.total);
    std::printf("per-sample results -> %s\n", out.c_str());
    return 0;
}

int cmd_predict(const Options& opts) {
    const ambigate::SceneDescription scene = ambigate::parse_scene(
        ambigate::read_file(require_path(opts.scene_path, "--scene")));
    const ambigate::Vocabulary vocab = load_vocab(opts);
    const ambigate::AffordanceKB kb = load_kb(opts);
    const ambigate::CalibrationArtifact artifact = load_artifact(opts);

    const ambigate::PipelineVerdict verdict = ambigate::run_pipeline(
        scene, opts.request, kb, vocab, artifact.scores,
        ambigate::SignificanceLevel(artifact.alpha), artifact.weights);
    std::printf("%s\n", ambigate::verdict_to_json_line(verdict).c_str());
    return 0;
}

std::string candidates_text(
    const std::vector<std::pair<std::string, std::string>>& candidates) {
    if (candidates.empty()) {
        return "none";
    }
    std::string out;
    for (const auto& [tool, target] : candidates) {
        if (!out.empty()) {
            out += ", ";
        }
        out += "(" + tool + ", " + target + ")";
    }
    return out;
}

int cmd_session(const Options& opts) {
    const ambigate::SceneDescription scene = ambigate::parse_scene(
        ambigate::read_file(require_path(opts.scene_path, "--scene")));
    const ambigate::Vocabulary vocab = load_vocab(opts);
    const ambigate::AffordanceKB kb = load_kb(opts);
    const ambigate::CalibrationArtifact artifact = load_artifact(opts);
    const ambigate::SignificanceLevel alpha(artifact.alpha);

    const std::string transcript_path = out_or(opts, "session_transcript.jsonl");
    ambigate::write_file(transcript_path, "");  // fresh transcript per session
    std::string transcript;

    std::printf("scene '%s' loaded; enter a request ('quit' to exit)\n",
                scene.scene_id.c_str());
    std::string line;
    int turn = 0;
    while (true) {
        std::printf("request> ");
        std::fflush(stdout);
        if (!std::getline(std::cin, line)) {
            std::printf("\n");
            break;
        }
        if (line == "quit") {
            break;
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        ++turn;

        ordered_json entry;
        entry["turn"] = turn;
        entry["request"] = line;
        try {
            ambigate::InstructionTriple triple = ambigate::parse_instruction(line, vocab);
            ambigate::DisambiguationResult result =
                ambigate::rule_based_expert().disambiguate(scene, triple, kb);
            const auto candidates = result.candidates;
            const ambigate::PipelineVerdict verdict = ambigate::apply_conformal_gate(
                std::move(result), artifact.scores, alpha, artifact.weights);

            if (verdict.decision.verdict == ambigate::Verdict::Executable) {
                std::printf("executable: %s %s %s\n", verdict.resolved->tool.c_str(),
                            verdict.resolved->action.c_str(),
                            verdict.resolved->target.c_str());
            } else {
                std::printf("verdict: %s (%s)\n",
                            std::string(to_string(verdict.decision.verdict)).c_str(),
                            std::string(to_string(verdict.decision.reason_code)).c_str());
                std::printf("flags: tool_missing=%d action_invalid=%d target_unclear=%d\n",
                            verdict.flags.tool_missing ? 1 : 0,
                            verdict.flags.action_invalid ? 1 : 0,
                            verdict.flags.target_unclear ? 1 : 0);
                std::printf("candidates: %s\n", candidates_text(candidates).c_str());
                std::printf("clarify the request or type 'quit'\n");
            }
            entry["verdict"] = ordered_json::parse(ambigate::verdict_to_json_line(verdict));
        } catch (const ParseError& e) {
            std::printf("parse error: %s\n", e.what());
            entry["error"] = std::string(e.what());
        }
        transcript += entry.dump() + "\n";
        ambigate::write_file(transcript_path, transcript);
    }
    return 0;
}

int cmd_export_pvalues(const Options& opts) {
    const ambigate::Dataset dataset =
        ambigate::load_dataset(require_path(opts.dataset_path, "--dataset"));
    const ambigate::Vocabulary vocab = load_vocab(opts);
    const ambigate::AffordanceKB kb = load_kb(opts);
    const ambigate::CalibrationArtifact artifact = load_artifact(opts);

    const ambigate::DatasetSplit split = ambigate::split_dataset(dataset.samples);
    const std::string csv = ambigate::export_pvalue_distributions(
        artifact.scores, split.calibration, kb, vocab, artifact.weights);
    const std::string out = out_or(opts, "pvalues.csv");
    ambigate::write_file(out, csv);
    std::printf("wrote %zu p-value rows -> %s\n", split.calibration.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"command disambiguation with a dual-set conformal safety gate"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    Options opts;
    app.add_option("--kb", opts.kb_path, "affordance KB file (JSON array)");
    app.add_option("--vocab", opts.vocab_path, "vocabulary file (JSON)");
    app.add_option("--dataset", opts.dataset_path, "dataset file (JSON lines)");
    app.add_option("--calibration", opts.calibration_path, "calibration artifact (JSON)");
    app.add_option("--scene", opts.scene_path, "scene description file (JSON)");
    app.add_option("--alpha", opts.alpha, "significance level in (0,1)")
        ->capture_default_str();
    app.add_option("--weights", opts.weights_text, "w_tool,w_action,w_target")
        ->capture_default_str();
    app.add_option("--seed", opts.seed, "generator seed")->capture_default_str();
    app.add_option("--out", opts.out_path, "output path");
    app.add_option("--config", opts.config_path, "JSON config file; flags override it");

    CLI::App* generate = app.add_subcommand("generate", "generate a synthetic dataset");
    generate->add_option("--counts", opts.counts_text,
                         "unambiguous,deambiguable,truly_ambiguous")
        ->capture_default_str();
    generate->add_option("--max-distractors", opts.max_distractors,
                         "extra scene entities per sample")
        ->capture_default_str();

    CLI::App* calibrate =
        app.add_subcommand("calibrate", "build a calibration artifact from a dataset");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "run the outcome accounting over the test split");
    CLI::App* predict =
        app.add_subcommand("predict", "gate a single request against a scene");
    predict->add_option("request", opts.request, "verbal request text")->required();
    CLI::App* session =
        app.add_subcommand("session", "interactive clarification session");
    CLI::App* export_pvalues = app.add_subcommand(
        "export-pvalues", "export calibration p-values as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        apply_config_file(app, opts);
        // --alpha and --weights are validated eagerly so every subcommand
        // rejects bad values the same way.
        ambigate::SignificanceLevel(opts.alpha);
        parse_weights(opts.weights_text);

        if (generate->parsed()) return cmd_generate(opts);
        if (calibrate->parsed()) return cmd_calibrate(opts);
        if (evaluate->parsed()) return cmd_evaluate(opts);
        if (predict->parsed()) return cmd_predict(opts);
        if (session->parsed()) return cmd_session(opts);
        if (export_pvalues->parsed()) return cmd_export_pvalues(opts);
        std::fprintf(stderr, "no subcommand selected\n");
        return 1;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "envsense/classify.hpp"
#include "envsense/error.hpp"
#include "envsense/features.hpp"
#include "envsense/location.hpp"
#include "envsense/pipeline.hpp"
#include "envsense/synth.hpp"
#include "envsense/text.hpp"

namespace {

using namespace envsense;

std::string read_file_or_throw(const std::string& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PipelineConfigError("cannot open " + std::string(what) + " file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_or_throw(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw ReportError("failed writing " + path);
}

PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return parse_pipeline_config(read_file_or_throw(path, "config"));
}

LocationContext make_context(const PipelineConfig& config, const std::string& lab_path,
                             const std::string& cubicle_path) {
    const SensorStream lab =
        parse_stream(read_file_or_throw(lab_path, "lab reference"),
                     StreamSource{StreamSource::Kind::ReferenceLab, -1});
    const SensorStream cubicle =
        parse_stream(read_file_or_throw(cubicle_path, "cubicle reference"),
                     StreamSource{StreamSource::Kind::ReferenceCubicle, -1});
    LocationContext context;
    context.lab = fit_reference_stats(lab.channel_values(Channel::Light));
    context.cubicle = fit_reference_stats(cubicle.channel_values(Channel::Light));
    context.stair_template = build_stair_template(
        config.generator.floor_lights, config.generator.landing_light,
        config.generator.climb_velocity, config.generator.sampling_rate);
    return context;
}

std::string significance_table_or_csv(const std::vector<SignificanceRow>& rows, bool csv) {
    return csv ? render_significance_csv(rows) : render_significance_text(rows);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"indoor activity and location estimation from wearable environmental "
                 "sensor streams"};
    app.require_subcommand(0, 1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool dump_config = false;
    app.add_option("--config", config_path, "key = value config file")
        ->envname("ENVSENSE_CONFIG");
    app.add_option("--seed", seed, "override the config seed")
        ->envname("ENVSENSE_SEED")
        ->trigger_on_parse()
        ->each([&](const std::string&) { seed_given = true; });
    app.add_flag("--dump-config", dump_config,
                 "print the effective config, documenting every default");

    auto* generate_cmd =
        app.add_subcommand("generate", "generate a labeled synthetic dataset");
    std::string generate_out;
    generate_cmd->add_option("--out", generate_out, "output directory")
        ->envname("ENVSENSE_OUT")
        ->required();

    auto* extract_cmd =
        app.add_subcommand("extract", "extract windowed features from a stream CSV");
    std::string extract_input, extract_out, extract_lab, extract_cubicle;
    extract_cmd->add_option("--input", extract_input, "wearable stream CSV")->required();
    extract_cmd->add_option("--out", extract_out, "feature CSV path (stdout when omitted)");
    extract_cmd->add_option("--lab", extract_lab, "lab reference CSV (enables light LR/DTW)");
    extract_cmd->add_option("--cubicle", extract_cubicle, "cubicle reference CSV");

    auto* test_cmd = app.add_subcommand(
        "test", "permutation-test feature separability between activity groups");
    std::string test_features, test_out;
    bool test_csv = false;
    test_cmd->add_option("--features", test_features, "labeled feature CSV")->required();
    test_cmd->add_option("--out", test_out, "write the table here instead of stdout");
    test_cmd->add_flag("--csv", test_csv, "emit CSV instead of the text table");

    auto* locate_cmd = app.add_subcommand(
        "locate", "per-window location ratio and stair detection for a wearable stream");
    std::string locate_input, locate_lab, locate_cubicle, locate_out;
    locate_cmd->add_option("--input", locate_input, "wearable stream CSV")->required();
    locate_cmd->add_option("--lab", locate_lab, "lab reference CSV")->required();
    locate_cmd->add_option("--cubicle", locate_cubicle, "cubicle reference CSV")->required();
    locate_cmd->add_option("--out", locate_out, "output CSV path (stdout when omitted)");

    auto* classify_cmd =
        app.add_subcommand("classify", "cross-validate a classifier on a feature CSV");
    std::string classify_features, classify_mask = "fused", classify_model = "forest";
    std::string classify_out;
    std::size_t classify_folds = 0;
    classify_cmd->add_option("--features", classify_features, "labeled feature CSV")
        ->required();
    classify_cmd->add_option("--mask", classify_mask, "accel|env|fused");
    classify_cmd->add_option("--model", classify_model, "nb|tree|forest");
    classify_cmd->add_option("--folds", classify_folds, "cross-validation folds");
    classify_cmd->add_option("--out", classify_out, "write the confusion CSV here");

    auto* report_cmd = app.add_subcommand(
        "report", "re-render the text reports from the CSV twins in a directory");
    std::string report_dir;
    report_cmd->add_option("--dir", report_dir, "directory holding the report CSVs")
        ->required();

    auto* pipeline_cmd =
        app.add_subcommand("pipeline", "run generate/extract/test/classify end to end");
    std::string pipeline_out;
    pipeline_cmd->add_option("--out", pipeline_out, "report directory (overrides config)")
        ->envname("ENVSENSE_OUT");

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig config = load_config(config_path);
        if (seed_given) config.seed = seed;

        if (dump_config) {
            std::cout << dump_pipeline_config(config);
            if (app.get_subcommands().empty()) return 0;
        }

        if (*generate_cmd) {
            GeneratorConfig gen = config.generator;
            gen.seed = config.seed;
            export_dataset(generate(gen), generate_out);
            std::cout << "dataset written to " << generate_out << "\n";
        } else if (*extract_cmd) {
            const SensorStream stream =
                parse_stream(read_file_or_throw(extract_input, "input"));
            std::vector<FeatureVector> vectors;
            if (!extract_lab.empty() && !extract_cubicle.empty()) {
                const LocationContext context =
                    make_context(config, extract_lab, extract_cubicle);
                vectors = extract_features(stream, config.window, config.stride, &context);
            } else {
                vectors = extract_features(stream, config.window, config.stride);
            }
            const std::string csv = feature_csv(vectors);
            if (extract_out.empty())
                std::cout << csv;
            else
                write_file_or_throw(extract_out, csv);
        } else if (*test_cmd) {
            const auto vectors =
                parse_feature_csv(read_file_or_throw(test_features, "feature"));
            const auto rows = significance_rows(vectors, config);
            const std::string table = significance_table_or_csv(rows, test_csv);
            if (test_out.empty())
                std::cout << table;
            else
                write_file_or_throw(test_out, table);
        } else if (*locate_cmd) {
            const SensorStream stream =
                parse_stream(read_file_or_throw(locate_input, "input"));
            const LocationContext context = make_context(config, locate_lab, locate_cubicle);
            FeatureSet wanted;
            wanted.set(static_cast<std::size_t>(Feature::LightLr));
            wanted.set(static_cast<std::size_t>(Feature::DtwDist));
            const auto vectors =
                extract_features(stream, config.window, config.stride, &context, wanted);
            std::string out = "end_time,light_lr,location,dtw_distance,climbing\n";
            for (const FeatureVector& fv : vectors) {
                const Location where = classify_location(*fv.light_lr, config.lda_threshold);
                out += text::format_double(fv.end_time) + "," +
                       text::format_double(*fv.light_lr) + "," +
                       (where == Location::Lab ? "lab" : "cubicle") + "," +
                       text::format_double(*fv.dtw_dist) + "," +
                       (*fv.dtw_dist < config.dtw_threshold ? "1" : "0") + "\n";
            }
            if (locate_out.empty())
                std::cout << out;
            else
                write_file_or_throw(locate_out, out);
        } else if (*classify_cmd) {
            const auto mask = parse_mask(classify_mask);
            if (!mask) throw InputError("unknown mask: " + classify_mask);
            const auto kind = parse_model_kind(classify_model);
            if (!kind) throw InputError("unknown model: " + classify_model);
            const auto vectors =
                parse_feature_csv(read_file_or_throw(classify_features, "feature"));
            const FeatureMatrix matrix = FeatureMatrix::from_vectors(vectors, *mask);
            ModelSpec spec;
            spec.kind = *kind;
            spec.tree = config.tree;
            spec.forest = config.forest;
            const std::size_t folds = classify_folds > 0 ? classify_folds : config.folds;
            const CVReport report = cross_validate(matrix, spec, folds, config.seed);

            AccuracyTable table;
            table.models.push_back(*kind);
            std::array<double, 3> row{};
            row[static_cast<std::size_t>(*mask)] = report.matrix.accuracy();
            table.accuracies.push_back(row);
            std::cout << model_display_name(*kind) << " on " << mask_name(*mask)
                      << " features, " << folds << "-fold stratified CV\n";
            std::cout << "aggregated accuracy = "
                      << text::format_double(report.matrix.accuracy()) << "\n";
            std::cout << "mean fold accuracy = "
                      << text::format_double(report.mean_accuracy) << "\n\n";
            std::cout << render_confusion_text(report.matrix);
            if (!classify_out.empty())
                write_file_or_throw(classify_out, render_confusion_csv(report.matrix));
        } else if (*report_cmd) {
            const std::filesystem::path dir(report_dir);
            bool any = false;
            if (std::filesystem::exists(dir / "significance.csv")) {
                const auto rows = parse_significance_csv(
                    read_file_or_throw((dir / "significance.csv").string(), "report"));
                write_file_or_throw((dir / "significance.txt").string(),
                                    render_significance_text(rows));
                any = true;
            }
            if (std::filesystem::exists(dir / "accuracy.csv")) {
                const auto table = parse_accuracy_csv(
                    read_file_or_throw((dir / "accuracy.csv").string(), "report"));
                write_file_or_throw((dir / "accuracy.txt").string(),
                                    render_accuracy_text(table));
                any = true;
            }
            for (const char* name : {"confusion_accel", "confusion_fused"}) {
                const auto csv_path = dir / (std::string(name) + ".csv");
                if (!std::filesystem::exists(csv_path)) continue;
                const auto matrix =
                    parse_confusion_csv(read_file_or_throw(csv_path.string(), "report"));
                write_file_or_throw((dir / (std::string(name) + ".txt")).string(),
                                    render_confusion_text(matrix));
                any = true;
            }
            if (!any) throw ReportError("no report CSVs found in " + report_dir);
            std::cout << "text reports refreshed in " << report_dir << "\n";
        } else if (*pipeline_cmd) {
            if (!pipeline_out.empty()) config.out_dir = pipeline_out;
            const PipelineResult result = run_pipeline(config);
            for (const auto& file : result.files) std::cout << file.string() << "\n";
        } else if (!dump_config) {
            std::cout << app.help();
        }
    } catch (const Error& e) {
        std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

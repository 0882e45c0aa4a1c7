#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "envsense/classify.hpp"
#include "envsense/stats.hpp"
#include "envsense/synth.hpp"

namespace envsense {

// Everything the end-to-end run needs in one place; the CLI reads and writes
// this through a flat key=value config file.
struct PipelineConfig {
    std::size_t window = 60;
    std::size_t stride = 60;
    std::size_t bins = 50;
    double epsilon = 0.5;
    std::size_t permutations = 999;
    double lda_threshold = 0.0;
    // midpoint of the stair / non-stair class medians on the default
    // synthetic dataset (stair windows top out near 26k, the nearest
    // non-stair activity starts above 62k)
    double dtw_threshold = 46500.0;
    std::vector<ModelSpec::Kind> models = {ModelSpec::Kind::NaiveBayes,
                                           ModelSpec::Kind::DecisionTree,
                                           ModelSpec::Kind::RandomForest};
    TreeParams tree;
    ForestParams forest;
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    GeneratorConfig generator;  // its seed field is overridden by `seed`
    std::string data_dir;       // when nonempty, load instead of generating
    std::string out_dir = "out";
};

// Flat `key = value` text, '#' comments. parse accepts any subset of keys on
// top of defaults and rejects unknown keys or malformed values with
// PipelineConfigError. dump emits every key with its current value so a
// dumped file documents every default.
PipelineConfig parse_pipeline_config(std::string_view text);
std::string dump_pipeline_config(const PipelineConfig& config);

struct SignificanceRow {
    std::string feature;  // e.g. "grad(Tp)"
    std::string group_a, group_b;
    PermutationResult result;
};

struct AccuracyTable {
    std::vector<ModelSpec::Kind> models;
    std::vector<std::array<double, 3>> accuracies;  // accel, env, fused
};

struct PipelineResult {
    std::vector<SignificanceRow> significance;
    std::vector<CVReport> cv_reports;  // model-major, masks accel/env/fused inside
    AccuracyTable accuracy;
    ConfusionMatrix confusion_accel, confusion_fused;
    std::string confusion_model;  // which model the confusion tables show
    std::vector<std::filesystem::path> files;
};

// generate (or load) -> extract -> significance tests -> cross-validated
// classification -> report files under config.out_dir. Deterministic given
// the config; two runs with the same config produce byte-identical files.
PipelineResult run_pipeline(const PipelineConfig& config);

// The five hypothesis rows (temperature gradient and sd for dynamic vs
// static, humidity sd for rest vs other, light LR for lab vs cubicle, DTW
// for stairs vs other) evaluated on labeled feature vectors. Rows whose
// groups are absent from the data are skipped.
std::vector<SignificanceRow> significance_rows(const std::vector<FeatureVector>& vectors,
                                               const PipelineConfig& config);

// Report rendering. Text tables follow the published layouts; CSV twins are
// machine-readable with the same content. Empty input throws ReportError.
std::string render_significance_text(const std::vector<SignificanceRow>& rows);
std::string render_significance_csv(const std::vector<SignificanceRow>& rows);
std::vector<SignificanceRow> parse_significance_csv(std::string_view csv);

std::string render_accuracy_text(const AccuracyTable& table);
std::string render_accuracy_csv(const AccuracyTable& table);
AccuracyTable parse_accuracy_csv(std::string_view csv);

// Confusion tables print in the published order (climb, elevator, rest,
// run indoor, walk indoor, walk outdoor, sit lab, sit cubicle) regardless of
// the matrix's own class order.
std::string render_confusion_text(const ConfusionMatrix& matrix);
std::string render_confusion_csv(const ConfusionMatrix& matrix);
ConfusionMatrix parse_confusion_csv(std::string_view csv);

std::string_view model_display_name(ModelSpec::Kind kind);

}  // namespace envsense

#include "envsense/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "envsense/error.hpp"
#include "envsense/features.hpp"
#include "envsense/location.hpp"
#include "envsense/rng.hpp"
#include "envsense/text.hpp"

namespace envsense {

namespace {

// confusion-table order used by the published tables: a..h
constexpr std::array<ActivityLabel, kActivityCount> kDisplayOrder = {
    ActivityLabel::ClimbStairs, ActivityLabel::TakeElevator, ActivityLabel::Rest,
    ActivityLabel::RunIndoor,   ActivityLabel::WalkIndoor,   ActivityLabel::WalkOutdoor,
    ActivityLabel::SitLab,      ActivityLabel::SitCubicle,
};

constexpr std::array<FeatureMask, 3> kAllMasks = {FeatureMask::AccelOnly, FeatureMask::EnvOnly,
                                                  FeatureMask::Fused};

std::optional<std::uint64_t> parse_u64(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// fixed-point rendering for the human-facing tables
std::string format_fixed(double v, int places) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", places, v);
    return buf;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string pad_left(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(s.begin(), width - s.size(), ' ');
    return s;
}

// field accessors for the flat config keys; captureless lambdas only
using DoubleRef = double& (*)(PipelineConfig&);
using SizeRef = std::size_t& (*)(PipelineConfig&);

struct DoubleKey {
    const char* name;
    DoubleRef ref;
};
struct SizeKey {
    const char* name;
    SizeRef ref;
};
// size_t fields where 0 in the file means "unlimited"
struct DepthKey {
    const char* name;
    SizeRef ref;
};

constexpr DoubleKey kDoubleKeys[] = {
    {"epsilon", [](PipelineConfig& c) -> double& { return c.epsilon; }},
    {"lda_threshold", [](PipelineConfig& c) -> double& { return c.lda_threshold; }},
    {"dtw_threshold", [](PipelineConfig& c) -> double& { return c.dtw_threshold; }},
    {"generator.sampling_rate",
     [](PipelineConfig& c) -> double& { return c.generator.sampling_rate; }},
    {"generator.reference_rate",
     [](PipelineConfig& c) -> double& { return c.generator.reference_rate; }},
    {"generator.gap_seconds",
     [](PipelineConfig& c) -> double& { return c.generator.gap_seconds; }},
    {"generator.ambient_temp",
     [](PipelineConfig& c) -> double& { return c.generator.ambient_temp; }},
    {"generator.skin_offset",
     [](PipelineConfig& c) -> double& { return c.generator.skin_offset; }},
    {"generator.cooling_slope",
     [](PipelineConfig& c) -> double& { return c.generator.cooling_slope; }},
    {"generator.cooling_tau",
     [](PipelineConfig& c) -> double& { return c.generator.cooling_tau; }},
    {"generator.run_slope_factor",
     [](PipelineConfig& c) -> double& { return c.generator.run_slope_factor; }},
    {"generator.run_noise_factor",
     [](PipelineConfig& c) -> double& { return c.generator.run_noise_factor; }},
    {"generator.temp_noise_dynamic",
     [](PipelineConfig& c) -> double& { return c.generator.temp_noise_dynamic; }},
    {"generator.temp_noise_static",
     [](PipelineConfig& c) -> double& { return c.generator.temp_noise_static; }},
    {"generator.humidity_base",
     [](PipelineConfig& c) -> double& { return c.generator.humidity_base; }},
    {"generator.humidity_noise",
     [](PipelineConfig& c) -> double& { return c.generator.humidity_noise; }},
    {"generator.rest_humidity_drift",
     [](PipelineConfig& c) -> double& { return c.generator.rest_humidity_drift; }},
    {"generator.rest_humidity_boost",
     [](PipelineConfig& c) -> double& { return c.generator.rest_humidity_boost; }},
    {"generator.lab_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.lab_light_mean; }},
    {"generator.lab_light_var",
     [](PipelineConfig& c) -> double& { return c.generator.lab_light_var; }},
    {"generator.cubicle_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.cubicle_light_mean; }},
    {"generator.cubicle_light_var",
     [](PipelineConfig& c) -> double& { return c.generator.cubicle_light_var; }},
    {"generator.elevator_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.elevator_light_mean; }},
    {"generator.corridor_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.corridor_light_mean; }},
    {"generator.rest_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.rest_light_mean; }},
    {"generator.indoor_light_var",
     [](PipelineConfig& c) -> double& { return c.generator.indoor_light_var; }},
    {"generator.outdoor_light_mean",
     [](PipelineConfig& c) -> double& { return c.generator.outdoor_light_mean; }},
    {"generator.outdoor_light_var",
     [](PipelineConfig& c) -> double& { return c.generator.outdoor_light_var; }},
    {"generator.landing_light",
     [](PipelineConfig& c) -> double& { return c.generator.landing_light; }},
    {"generator.climb_velocity",
     [](PipelineConfig& c) -> double& { return c.generator.climb_velocity; }},
    {"generator.velocity_jitter",
     [](PipelineConfig& c) -> double& { return c.generator.velocity_jitter; }},
};

constexpr SizeKey kSizeKeys[] = {
    {"window", [](PipelineConfig& c) -> std::size_t& { return c.window; }},
    {"stride", [](PipelineConfig& c) -> std::size_t& { return c.stride; }},
    {"bins", [](PipelineConfig& c) -> std::size_t& { return c.bins; }},
    {"permutations", [](PipelineConfig& c) -> std::size_t& { return c.permutations; }},
    {"folds", [](PipelineConfig& c) -> std::size_t& { return c.folds; }},
    {"tree.min_leaf", [](PipelineConfig& c) -> std::size_t& { return c.tree.min_leaf; }},
    {"forest.trees", [](PipelineConfig& c) -> std::size_t& { return c.forest.n_trees; }},
    {"forest.min_leaf", [](PipelineConfig& c) -> std::size_t& { return c.forest.min_leaf; }},
    {"forest.subset", [](PipelineConfig& c) -> std::size_t& { return c.forest.feature_subset; }},
};

constexpr DepthKey kDepthKeys[] = {
    {"tree.max_depth", [](PipelineConfig& c) -> std::size_t& { return c.tree.max_depth; }},
    {"forest.max_depth", [](PipelineConfig& c) -> std::size_t& { return c.forest.max_depth; }},
};

std::string activity_key(std::string_view prefix, ActivityLabel label) {
    return std::string(prefix) + "." + std::string(to_string(label));
}

std::string join_doubles(std::span<const double> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += text::format_double(values[i]);
    }
    return out;
}

std::string join_models(const std::vector<ModelSpec::Kind>& models) {
    std::string out;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (i) out += ",";
        ModelSpec spec;
        spec.kind = models[i];
        out += spec.name();
    }
    return out;
}

void apply_key(PipelineConfig& config, std::string_view key, std::string_view value,
               std::size_t line_no) {
    const auto fail = [&](const std::string& why) {
        throw PipelineConfigError("line " + std::to_string(line_no) + ": " + why);
    };

    for (const DoubleKey& k : kDoubleKeys) {
        if (key != k.name) continue;
        const auto v = text::parse_double(value);
        if (!v) fail("malformed number for " + std::string(key));
        k.ref(config) = *v;
        return;
    }
    for (const SizeKey& k : kSizeKeys) {
        if (key != k.name) continue;
        const auto v = parse_u64(value);
        if (!v) fail("malformed integer for " + std::string(key));
        k.ref(config) = static_cast<std::size_t>(*v);
        return;
    }
    for (const DepthKey& k : kDepthKeys) {
        if (key != k.name) continue;
        const auto v = parse_u64(value);
        if (!v) fail("malformed integer for " + std::string(key));
        k.ref(config) = *v == 0 ? kUnlimitedDepth : static_cast<std::size_t>(*v);
        return;
    }
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        const ActivityLabel label = kAllActivities[i];
        if (key == activity_key("generator.duration_minutes", label)) {
            const auto v = text::parse_double(value);
            if (!v) fail("malformed number for " + std::string(key));
            config.generator.duration_minutes[i] = *v;
            return;
        }
        if (key == activity_key("generator.accel_sd", label)) {
            const auto v = text::parse_double(value);
            if (!v) fail("malformed number for " + std::string(key));
            config.generator.accel_sd[i] = *v;
            return;
        }
    }
    if (key == "seed") {
        const auto v = parse_u64(value);
        if (!v) fail("malformed integer for seed");
        config.seed = *v;
        return;
    }
    if (key == "models") {
        std::vector<ModelSpec::Kind> models;
        for (std::string_view token : text::split(value, ',')) {
            token = text::trim(token);
            if (token.empty()) continue;
            const auto kind = parse_model_kind(token);
            if (!kind) fail("unknown model: " + std::string(token));
            models.push_back(*kind);
        }
        if (models.empty()) fail("models list is empty");
        config.models = std::move(models);
        return;
    }
    if (key == "forest.bootstrap") {
        if (value == "true" || value == "1")
            config.forest.bootstrap = true;
        else if (value == "false" || value == "0")
            config.forest.bootstrap = false;
        else
            fail("forest.bootstrap expects true or false");
        return;
    }
    if (key == "generator.floor_lights") {
        std::vector<double> levels;
        for (std::string_view token : text::split(value, ',')) {
            const auto v = text::parse_double(text::trim(token));
            if (!v) fail("malformed number in generator.floor_lights");
            levels.push_back(*v);
        }
        config.generator.floor_lights = std::move(levels);
        return;
    }
    if (key == "data_dir") {
        config.data_dir = std::string(value);
        return;
    }
    if (key == "out_dir") {
        config.out_dir = std::string(value);
        return;
    }
    fail("unknown config key: " + std::string(key));
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view textdata) {
    PipelineConfig config;
    std::size_t line_no = 0;
    for (std::string_view raw : text::split(textdata, '\n')) {
        ++line_no;
        std::string_view line = text::trim(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = text::trim(line.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw PipelineConfigError("line " + std::to_string(line_no) +
                                      ": expected key = value");
        const std::string_view key = text::trim(line.substr(0, eq));
        const std::string_view value = text::trim(line.substr(eq + 1));
        if (key.empty())
            throw PipelineConfigError("line " + std::to_string(line_no) + ": empty key");
        apply_key(config, key, value, line_no);
    }
    return config;
}

std::string dump_pipeline_config(const PipelineConfig& c) {
    std::string out;
    const auto emit = [&](std::string_view key, const std::string& value) {
        out += std::string(key) + " = " + value + "\n";
    };
    const auto depth_value = [](std::size_t depth) {
        return depth == kUnlimitedDepth ? std::string("0") : std::to_string(depth);
    };

    out += "# feature extraction\n";
    emit("window", std::to_string(c.window));
    emit("stride", std::to_string(c.stride));
    out += "\n# divergence testing\n";
    emit("bins", std::to_string(c.bins));
    emit("epsilon", text::format_double(c.epsilon));
    emit("permutations", std::to_string(c.permutations));
    out += "\n# location detection\n";
    emit("lda_threshold", text::format_double(c.lda_threshold));
    emit("dtw_threshold", text::format_double(c.dtw_threshold));
    out += "\n# classification; max_depth/subset 0 means unlimited/sqrt rule\n";
    emit("models", join_models(c.models));
    emit("folds", std::to_string(c.folds));
    emit("tree.max_depth", depth_value(c.tree.max_depth));
    emit("tree.min_leaf", std::to_string(c.tree.min_leaf));
    emit("forest.trees", std::to_string(c.forest.n_trees));
    emit("forest.max_depth", depth_value(c.forest.max_depth));
    emit("forest.min_leaf", std::to_string(c.forest.min_leaf));
    emit("forest.subset", std::to_string(c.forest.feature_subset));
    emit("forest.bootstrap", c.forest.bootstrap ? "true" : "false");
    out += "\n# run control; the seed drives generation, folds and forests\n";
    emit("seed", std::to_string(c.seed));
    emit("data_dir", c.data_dir);
    emit("out_dir", c.out_dir);
    out += "\n# synthetic recording lengths, minutes\n";
    for (std::size_t i = 0; i < kActivityCount; ++i)
        emit(activity_key("generator.duration_minutes", kAllActivities[i]),
             text::format_double(c.generator.duration_minutes[i]));
    out += "\n# synthetic signal model\n";
    emit("generator.sampling_rate", text::format_double(c.generator.sampling_rate));
    emit("generator.reference_rate", text::format_double(c.generator.reference_rate));
    emit("generator.gap_seconds", text::format_double(c.generator.gap_seconds));
    emit("generator.ambient_temp", text::format_double(c.generator.ambient_temp));
    emit("generator.skin_offset", text::format_double(c.generator.skin_offset));
    emit("generator.cooling_slope", text::format_double(c.generator.cooling_slope));
    emit("generator.cooling_tau", text::format_double(c.generator.cooling_tau));
    emit("generator.run_slope_factor", text::format_double(c.generator.run_slope_factor));
    emit("generator.run_noise_factor", text::format_double(c.generator.run_noise_factor));
    emit("generator.temp_noise_dynamic", text::format_double(c.generator.temp_noise_dynamic));
    emit("generator.temp_noise_static", text::format_double(c.generator.temp_noise_static));
    emit("generator.humidity_base", text::format_double(c.generator.humidity_base));
    emit("generator.humidity_noise", text::format_double(c.generator.humidity_noise));
    emit("generator.rest_humidity_drift",
         text::format_double(c.generator.rest_humidity_drift));
    emit("generator.rest_humidity_boost",
         text::format_double(c.generator.rest_humidity_boost));
    emit("generator.lab_light_mean", text::format_double(c.generator.lab_light_mean));
    emit("generator.lab_light_var", text::format_double(c.generator.lab_light_var));
    emit("generator.cubicle_light_mean", text::format_double(c.generator.cubicle_light_mean));
    emit("generator.cubicle_light_var", text::format_double(c.generator.cubicle_light_var));
    emit("generator.elevator_light_mean",
         text::format_double(c.generator.elevator_light_mean));
    emit("generator.corridor_light_mean",
         text::format_double(c.generator.corridor_light_mean));
    emit("generator.rest_light_mean", text::format_double(c.generator.rest_light_mean));
    emit("generator.indoor_light_var", text::format_double(c.generator.indoor_light_var));
    emit("generator.outdoor_light_mean", text::format_double(c.generator.outdoor_light_mean));
    emit("generator.outdoor_light_var", text::format_double(c.generator.outdoor_light_var));
    emit("generator.floor_lights", join_doubles(c.generator.floor_lights));
    emit("generator.landing_light", text::format_double(c.generator.landing_light));
    emit("generator.climb_velocity", text::format_double(c.generator.climb_velocity));
    emit("generator.velocity_jitter", text::format_double(c.generator.velocity_jitter));
    out += "\n# per-axis accel noise per activity\n";
    for (std::size_t i = 0; i < kActivityCount; ++i)
        emit(activity_key("generator.accel_sd", kAllActivities[i]),
             text::format_double(c.generator.accel_sd[i]));
    return out;
}

std::string_view model_display_name(ModelSpec::Kind kind) {
    switch (kind) {
        case ModelSpec::Kind::NaiveBayes: return "Naive Bayes";
        case ModelSpec::Kind::DecisionTree: return "Decision Tree";
        case ModelSpec::Kind::RandomForest: return "Random Forest";
    }
    return "Random Forest";
}

namespace {

struct GroupSpec {
    std::string feature_label;
    std::string group_a, group_b;
    Feature feature;
    bool (*in_a)(ActivityLabel);
    bool (*in_b)(ActivityLabel);
    // DTW distances span several decades (outdoor windows sit ~200x above indoor
    // ones), which would squeeze every other value into the first histogram bin.
    // Testing log10(1+d) keeps the equal-width bins informative.
    bool log_scale = false;
};

const GroupSpec kGroupSpecs[] = {
    {"grad(Tp)", "dynamic", "static", Feature::TempGradient, &is_dynamic_activity,
     &is_static_activity},
    {"sd(Tp)", "dynamic", "static", Feature::TempSd, &is_dynamic_activity,
     &is_static_activity},
    {"sd(Hm)", "rest", "other", Feature::HumiditySd,
     [](ActivityLabel l) { return l == ActivityLabel::Rest; },
     [](ActivityLabel l) { return l != ActivityLabel::Rest; }},
    {"LR(light)", "sit_lab", "sit_cubicle", Feature::LightLr,
     [](ActivityLabel l) { return l == ActivityLabel::SitLab; },
     [](ActivityLabel l) { return l == ActivityLabel::SitCubicle; }},
    {"DTW(light)", "climb_stairs", "other", Feature::DtwDist,
     [](ActivityLabel l) { return l == ActivityLabel::ClimbStairs; },
     [](ActivityLabel l) { return l != ActivityLabel::ClimbStairs; }, true},
};

void write_report_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ReportError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw ReportError("failed writing " + path.string());
}

}  // namespace

std::vector<SignificanceRow> significance_rows(const std::vector<FeatureVector>& vectors,
                                               const PipelineConfig& config) {
    std::vector<SignificanceRow> rows;
    for (std::size_t g = 0; g < std::size(kGroupSpecs); ++g) {
        const GroupSpec& spec = kGroupSpecs[g];
        std::vector<double> a, b;
        for (const FeatureVector& fv : vectors) {
            if (!fv.label || !fv.get(spec.feature)) continue;
            const double raw = *fv.get(spec.feature);
            const double value = spec.log_scale ? std::log10(1.0 + raw) : raw;
            if (spec.in_a(*fv.label))
                a.push_back(value);
            else if (spec.in_b(*fv.label))
                b.push_back(value);
        }
        if (a.empty() || b.empty()) continue;  // partial datasets skip the row
        SignificanceRow row;
        row.feature = spec.feature_label;
        row.group_a = spec.group_a;
        row.group_b = spec.group_b;
        row.result = permutation_test(a, b, config.permutations, config.bins, config.epsilon,
                                      rng::derive_seed(config.seed, 500 + g));
        rows.push_back(std::move(row));
    }
    return rows;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    if (config.window < 2) throw WindowError("window must be at least 2 samples");
    if (config.stride < 1) throw PipelineConfigError("stride must be at least 1");
    if (config.models.empty()) throw PipelineConfigError("no models configured");

    LabeledDataset dataset;
    if (config.data_dir.empty()) {
        GeneratorConfig gen = config.generator;
        gen.seed = config.seed;
        dataset = generate(gen);
    } else {
        dataset = load_dataset(config.data_dir);
    }

    const SensorStream* lab =
        dataset.reference(StreamSource{StreamSource::Kind::ReferenceLab, -1});
    const SensorStream* cubicle =
        dataset.reference(StreamSource{StreamSource::Kind::ReferenceCubicle, -1});
    if (lab == nullptr || cubicle == nullptr)
        throw PipelineConfigError("dataset lacks lab/cubicle reference streams");

    LocationContext context;
    context.lab = fit_reference_stats(lab->channel_values(Channel::Light));
    context.cubicle = fit_reference_stats(cubicle->channel_values(Channel::Light));
    context.stair_template = build_stair_template(
        dataset.config.floor_lights, dataset.config.landing_light,
        dataset.config.climb_velocity, dataset.config.sampling_rate);

    std::vector<FeatureVector> vectors;
    for (const Episode& episode : dataset.episodes) {
        auto episode_vectors = extract_features(dataset.wearable[episode.stream_index],
                                                config.window, config.stride, &context);
        vectors.insert(vectors.end(), episode_vectors.begin(), episode_vectors.end());
    }

    // keep only fully populated windows so every mask sees the same rows
    std::erase_if(vectors, [](const FeatureVector& fv) {
        if (!fv.label) return true;
        for (Feature f : kAllFeatures)
            if (!fv.get(f)) return true;
        return false;
    });

    PipelineResult result;
    result.significance = significance_rows(vectors, config);

    std::array<FeatureMatrix, 3> matrices;
    for (std::size_t m = 0; m < kAllMasks.size(); ++m)
        matrices[m] = FeatureMatrix::from_vectors(vectors, kAllMasks[m]);

    for (ModelSpec::Kind kind : config.models) {
        ModelSpec spec;
        spec.kind = kind;
        spec.tree = config.tree;
        spec.forest = config.forest;
        std::array<double, 3> row{};
        for (std::size_t m = 0; m < kAllMasks.size(); ++m) {
            CVReport report = cross_validate(matrices[m], spec, config.folds, config.seed);
            row[m] = report.matrix.accuracy();
            result.cv_reports.push_back(std::move(report));
        }
        result.accuracy.models.push_back(kind);
        result.accuracy.accuracies.push_back(row);
    }

    // confusion tables follow the strongest configured model
    ModelSpec::Kind confusion_kind = config.models.back();
    for (ModelSpec::Kind kind : config.models)
        if (kind == ModelSpec::Kind::RandomForest) confusion_kind = kind;
    for (std::size_t i = 0; i < config.models.size(); ++i) {
        if (config.models[i] != confusion_kind) continue;
        result.confusion_accel = result.cv_reports[i * 3 + 0].matrix;
        result.confusion_fused = result.cv_reports[i * 3 + 2].matrix;
        result.confusion_model = model_display_name(confusion_kind);
        break;
    }

    const std::filesystem::path out_dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ReportError("cannot create " + out_dir.string() + ": " + ec.message());

    const auto emit = [&](const char* name, const std::string& content) {
        const std::filesystem::path path = out_dir / name;
        write_report_file(path, content);
        result.files.push_back(path);
    };
    emit("significance.txt", render_significance_text(result.significance));
    emit("significance.csv", render_significance_csv(result.significance));
    emit("accuracy.txt", render_accuracy_text(result.accuracy));
    emit("accuracy.csv", render_accuracy_csv(result.accuracy));
    emit("confusion_accel.txt", render_confusion_text(result.confusion_accel));
    emit("confusion_accel.csv", render_confusion_csv(result.confusion_accel));
    emit("confusion_fused.txt", render_confusion_text(result.confusion_fused));
    emit("confusion_fused.csv", render_confusion_csv(result.confusion_fused));
    return result;
}

std::string render_significance_text(const std::vector<SignificanceRow>& rows) {
    if (rows.empty()) throw ReportError("no significance rows to render");
    const std::array<std::string, 6> header = {"Feature", "Groups", "JSD",
                                               "Permuted mean", "Permuted sd", "p-value"};
    std::vector<std::array<std::string, 6>> cells;
    for (const SignificanceRow& row : rows)
        cells.push_back({row.feature, row.group_a + " vs " + row.group_b,
                         format_fixed(row.result.observed_jsd, 4),
                         format_fixed(row.result.mean_permuted, 4),
                         format_fixed(row.result.sd_permuted, 4),
                         text::format_double(row.result.p_value)});

    std::array<std::size_t, 6> width{};
    for (std::size_t c = 0; c < 6; ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    std::string out = "Permutation test summary\n\n";
    for (std::size_t c = 0; c < 6; ++c)
        out += pad_right(header[c], width[c] + (c + 1 < 6 ? 2 : 0));
    out += "\n";
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < 6; ++c)
            out += pad_right(row[c], width[c] + (c + 1 < 6 ? 2 : 0));
        out += "\n";
    }
    return out;
}

std::string render_significance_csv(const std::vector<SignificanceRow>& rows) {
    if (rows.empty()) throw ReportError("no significance rows to render");
    std::string out = "feature,group_a,group_b,jsd,permuted_mean,permuted_sd,p_value\n";
    for (const SignificanceRow& row : rows) {
        out += row.feature + "," + row.group_a + "," + row.group_b + "," +
               text::format_double(row.result.observed_jsd) + "," +
               text::format_double(row.result.mean_permuted) + "," +
               text::format_double(row.result.sd_permuted) + "," +
               text::format_double(row.result.p_value) + "\n";
    }
    return out;
}

std::vector<SignificanceRow> parse_significance_csv(std::string_view csv) {
    const auto lines = text::split(csv, '\n');
    if (lines.empty() ||
        text::trim(lines[0]) != "feature,group_a,group_b,jsd,permuted_mean,permuted_sd,p_value")
        throw ReportError("malformed significance CSV header");
    std::vector<SignificanceRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != 7)
            throw ReportError("significance CSV row " + std::to_string(i) + " is malformed");
        SignificanceRow row;
        row.feature = std::string(fields[0]);
        row.group_a = std::string(fields[1]);
        row.group_b = std::string(fields[2]);
        const auto jsd_v = text::parse_double(fields[3]);
        const auto mean_v = text::parse_double(fields[4]);
        const auto sd_v = text::parse_double(fields[5]);
        const auto p_v = text::parse_double(fields[6]);
        if (!jsd_v || !mean_v || !sd_v || !p_v)
            throw ReportError("significance CSV row " + std::to_string(i) + " is malformed");
        row.result.observed_jsd = *jsd_v;
        row.result.mean_permuted = *mean_v;
        row.result.sd_permuted = *sd_v;
        row.result.p_value = *p_v;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ReportError("significance CSV has no data rows");
    return rows;
}

std::string render_accuracy_text(const AccuracyTable& table) {
    if (table.models.empty() || table.models.size() != table.accuracies.size())
        throw ReportError("no accuracy rows to render");
    const std::array<std::string, 4> header = {"Classifier", "Acceleration", "Environment",
                                               "Acc+Environment"};
    std::size_t name_width = header[0].size();
    for (ModelSpec::Kind kind : table.models)
        name_width = std::max(name_width, model_display_name(kind).size());

    std::string out = "Cross-validated accuracy by feature set\n\n";
    out += pad_right(header[0], name_width + 2);
    for (std::size_t c = 1; c < 4; ++c) out += pad_left(header[c], header[c].size() + 2);
    out += "\n";
    for (std::size_t r = 0; r < table.models.size(); ++r) {
        out += pad_right(std::string(model_display_name(table.models[r])), name_width + 2);
        for (std::size_t c = 0; c < 3; ++c)
            out += pad_left(format_fixed(table.accuracies[r][c], 4), header[c + 1].size() + 2);
        out += "\n";
    }
    return out;
}

std::string render_accuracy_csv(const AccuracyTable& table) {
    if (table.models.empty() || table.models.size() != table.accuracies.size())
        throw ReportError("no accuracy rows to render");
    std::string out = "model,accel,env,fused\n";
    for (std::size_t r = 0; r < table.models.size(); ++r) {
        ModelSpec spec;
        spec.kind = table.models[r];
        out += std::string(spec.name());
        for (double v : table.accuracies[r]) out += "," + text::format_double(v);
        out += "\n";
    }
    return out;
}

AccuracyTable parse_accuracy_csv(std::string_view csv) {
    const auto lines = text::split(csv, '\n');
    if (lines.empty() || text::trim(lines[0]) != "model,accel,env,fused")
        throw ReportError("malformed accuracy CSV header");
    AccuracyTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != 4)
            throw ReportError("accuracy CSV row " + std::to_string(i) + " is malformed");
        const auto kind = parse_model_kind(fields[0]);
        if (!kind) throw ReportError("unknown model in accuracy CSV: " + std::string(fields[0]));
        std::array<double, 3> row{};
        for (std::size_t c = 0; c < 3; ++c) {
            const auto v = text::parse_double(fields[c + 1]);
            if (!v) throw ReportError("accuracy CSV row " + std::to_string(i) + " is malformed");
            row[c] = *v;
        }
        table.models.push_back(*kind);
        table.accuracies.push_back(row);
    }
    if (table.models.empty()) throw ReportError("accuracy CSV has no data rows");
    return table;
}

namespace {

// the matrix's classes arranged in published display order
std::vector<std::size_t> display_permutation(const ConfusionMatrix& matrix) {
    std::vector<std::size_t> perm;
    for (ActivityLabel label : kDisplayOrder)
        for (std::size_t i = 0; i < matrix.classes.size(); ++i)
            if (matrix.classes[i] == label) perm.push_back(i);
    return perm;
}

}  // namespace

std::string render_confusion_text(const ConfusionMatrix& matrix) {
    if (matrix.classes.empty()) throw ReportError("empty confusion matrix");
    const std::vector<std::size_t> perm = display_permutation(matrix);

    std::vector<std::string> row_labels;
    std::size_t label_width = 0;
    for (std::size_t d = 0; d < perm.size(); ++d) {
        row_labels.push_back(std::string(1, static_cast<char>('a' + d)) + " = " +
                             std::string(to_string(matrix.classes[perm[d]])));
        label_width = std::max(label_width, row_labels.back().size());
    }
    std::size_t cell_width = 1;
    for (std::size_t i : perm)
        for (std::size_t j : perm)
            cell_width = std::max(cell_width, std::to_string(matrix.counts[i][j]).size());
    cell_width += 2;

    std::string out = "Confusion matrix (rows = truth)\n\n";
    out += pad_right("", label_width) + "  Classified As\n";
    out += pad_right("", label_width);
    for (std::size_t d = 0; d < perm.size(); ++d)
        out += pad_left(std::string(1, static_cast<char>('a' + d)), cell_width);
    out += "\n";
    for (std::size_t d = 0; d < perm.size(); ++d) {
        out += pad_right(row_labels[d], label_width);
        for (std::size_t e = 0; e < perm.size(); ++e)
            out += pad_left(std::to_string(matrix.counts[perm[d]][perm[e]]), cell_width);
        out += "\n";
    }
    out += "\naccuracy = " + format_fixed(matrix.accuracy(), 4) + "\n";
    return out;
}

std::string render_confusion_csv(const ConfusionMatrix& matrix) {
    if (matrix.classes.empty()) throw ReportError("empty confusion matrix");
    const std::vector<std::size_t> perm = display_permutation(matrix);
    std::string out = "truth";
    for (std::size_t j : perm) out += "," + std::string(to_string(matrix.classes[j]));
    out += "\n";
    for (std::size_t i : perm) {
        out += std::string(to_string(matrix.classes[i]));
        for (std::size_t j : perm) out += "," + std::to_string(matrix.counts[i][j]);
        out += "\n";
    }
    return out;
}

ConfusionMatrix parse_confusion_csv(std::string_view csv) {
    const auto lines = text::split(csv, '\n');
    if (lines.empty()) throw ReportError("empty confusion CSV");
    const auto header = text::split(text::trim(lines[0]), ',');
    if (header.size() < 2 || header[0] != "truth")
        throw ReportError("malformed confusion CSV header");

    ConfusionMatrix matrix;
    for (std::size_t c = 1; c < header.size(); ++c) {
        const auto label = parse_activity(header[c]);
        if (!label)
            throw ReportError("unknown class in confusion CSV: " + std::string(header[c]));
        matrix.classes.push_back(*label);
    }
    const std::size_t k = matrix.classes.size();
    matrix.counts.assign(k, std::vector<std::size_t>(k, 0));
    std::vector<bool> seen(k, false);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto fields = text::split(line, ',');
        if (fields.size() != k + 1)
            throw ReportError("confusion CSV row " + std::to_string(i) + " is malformed");
        const auto label = parse_activity(fields[0]);
        if (!label)
            throw ReportError("unknown class in confusion CSV: " + std::string(fields[0]));
        std::size_t row = k;
        for (std::size_t r = 0; r < k; ++r)
            if (matrix.classes[r] == *label) row = r;
        if (row == k || seen[row])
            throw ReportError("confusion CSV row " + std::to_string(i) + " is malformed");
        seen[row] = true;
        for (std::size_t c = 0; c < k; ++c) {
            const auto v = parse_u64(fields[c + 1]);
            if (!v)
                throw ReportError("confusion CSV row " + std::to_string(i) + " is malformed");
            matrix.counts[row][c] = static_cast<std::size_t>(*v);
        }
    }
    for (bool s : seen)
        if (!s) throw ReportError("confusion CSV is missing a class row");
    return matrix;
}

}  // namespace envsense

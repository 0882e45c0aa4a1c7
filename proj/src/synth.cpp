#include "envsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "envsense/error.hpp"
#include "envsense/rng.hpp"

namespace envsense {

namespace {

using nlohmann::json;

// episode order on the timeline; rest directly follows the run so the
// post-exercise humidity story reads naturally in the manifest
constexpr std::array<ActivityLabel, kActivityCount> kTimeline = {
    ActivityLabel::ClimbStairs, ActivityLabel::TakeElevator, ActivityLabel::WalkOutdoor,
    ActivityLabel::WalkIndoor,  ActivityLabel::RunIndoor,    ActivityLabel::Rest,
    ActivityLabel::SitLab,      ActivityLabel::SitCubicle,
};

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

void validate(const GeneratorConfig& c) {
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        require(c.duration_minutes[i] > 0.0,
                "duration for " + std::string(to_string(kAllActivities[i])) +
                    " must be positive");
        require(c.accel_sd[i] > 0.0, "accel sd for " +
                                         std::string(to_string(kAllActivities[i])) +
                                         " must be positive");
    }
    require(c.sampling_rate > 0.0, "sampling_rate must be positive");
    require(c.reference_rate > 0.0, "reference_rate must be positive");
    require(c.gap_seconds >= 0.0, "gap_seconds must be nonnegative");
    require(c.cooling_slope < 0.0, "cooling_slope must be negative");
    require(c.cooling_tau > 0.0, "cooling_tau must be positive");
    require(c.run_slope_factor > 0.0, "run_slope_factor must be positive");
    require(c.run_noise_factor > 0.0, "run_noise_factor must be positive");
    require(c.temp_noise_dynamic > 0.0, "temp_noise_dynamic must be positive");
    require(c.temp_noise_static > 0.0, "temp_noise_static must be positive");
    require(c.humidity_base > 0.0 && c.humidity_base < 100.0,
            "humidity_base must lie inside (0, 100)");
    require(c.humidity_noise > 0.0, "humidity_noise must be positive");
    require(c.rest_humidity_drift > 0.0, "rest_humidity_drift must be positive");
    require(c.rest_humidity_boost >= 1.0, "rest_humidity_boost must be at least 1");
    require(c.lab_light_var > 0.0 && c.cubicle_light_var > 0.0 && c.indoor_light_var > 0.0 &&
                c.outdoor_light_var > 0.0,
            "light variances must be positive");
    require(c.lab_light_mean >= 0.0 && c.cubicle_light_mean >= 0.0 &&
                c.elevator_light_mean >= 0.0 && c.corridor_light_mean >= 0.0 &&
                c.rest_light_mean >= 0.0 && c.outdoor_light_mean >= 0.0,
            "light means must be nonnegative");
    require(c.floor_lights.size() >= 2, "need at least two floor light levels");
    for (double level : c.floor_lights)
        require(level > c.landing_light, "every floor must be brighter than the landing");
    require(c.landing_light >= 0.0, "landing_light must be nonnegative");
    require(c.climb_velocity > 0.0, "climb_velocity must be positive");
    require(c.velocity_jitter >= 0.0 && c.velocity_jitter < 0.5,
            "velocity_jitter must lie in [0, 0.5)");
}

bool is_moving(ActivityLabel label) {
    return label == ActivityLabel::ClimbStairs || label == ActivityLabel::WalkOutdoor ||
           label == ActivityLabel::WalkIndoor || label == ActivityLabel::RunIndoor;
}

SensorStream make_episode(const GeneratorConfig& c, ActivityLabel label, double start,
                          std::size_t samples, std::mt19937_64& engine) {
    const bool run = label == ActivityLabel::RunIndoor;
    const double slope = c.cooling_slope * (run ? c.run_slope_factor : 1.0);
    const double drop = slope * c.cooling_tau;
    const double temp_sigma = is_moving(label)
                                  ? c.temp_noise_dynamic * (run ? c.run_noise_factor : 1.0)
                                  : c.temp_noise_static;
    const double light_sigma = std::sqrt(c.indoor_light_var);

    double light_mean = 0.0;
    double light_var_sigma = light_sigma;
    switch (label) {
        case ActivityLabel::SitLab:
            light_mean = c.lab_light_mean;
            light_var_sigma = std::sqrt(c.lab_light_var);
            break;
        case ActivityLabel::SitCubicle:
            light_mean = c.cubicle_light_mean;
            light_var_sigma = std::sqrt(c.cubicle_light_var);
            break;
        case ActivityLabel::TakeElevator: light_mean = c.elevator_light_mean; break;
        case ActivityLabel::WalkIndoor:
        case ActivityLabel::RunIndoor: light_mean = c.corridor_light_mean; break;
        case ActivityLabel::Rest: light_mean = c.rest_light_mean; break;
        case ActivityLabel::WalkOutdoor:
            light_mean = c.outdoor_light_mean;
            light_var_sigma = std::sqrt(c.outdoor_light_var);
            break;
        case ActivityLabel::ClimbStairs: break;  // plateau pattern below
    }

    // each climb runs at its own pace near the configured velocity
    double velocity = c.climb_velocity;
    if (label == ActivityLabel::ClimbStairs)
        velocity *= 1.0 + c.velocity_jitter * (2.0 * rng::uniform01(engine) - 1.0);

    std::vector<SensorSample> out(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / c.sampling_rate;
        SensorSample& s = out[i];
        s.timestamp = start + t;

        double temp = c.ambient_temp + c.skin_offset;
        if (is_moving(label)) temp += drop * (1.0 - std::exp(-t / c.cooling_tau));
        temp += rng::gaussian(engine, 0.0, temp_sigma);
        s.channel(Channel::Temperature) = temp;

        double humidity = c.humidity_base;
        double humidity_sigma = c.humidity_noise;
        if (label == ActivityLabel::Rest) {
            humidity += c.rest_humidity_drift * t;
            humidity_sigma *= c.rest_humidity_boost;
        }
        humidity += rng::gaussian(engine, 0.0, humidity_sigma);
        s.channel(Channel::Humidity) = std::clamp(humidity, 0.0, 100.0);

        double light;
        if (label == ActivityLabel::ClimbStairs) {
            const auto segment = static_cast<std::size_t>(t * 2.0 * velocity);
            const double level =
                segment % 2 == 0
                    ? c.floor_lights[(segment / 2) % c.floor_lights.size()]
                    : c.landing_light;
            light = level + rng::gaussian(engine, 0.0, light_sigma);
        } else {
            light = rng::gaussian(engine, light_mean, light_var_sigma);
        }
        s.channel(Channel::Light) = std::max(light, 0.0);

        const double accel_sigma = c.accel_sd[static_cast<std::size_t>(label)];
        s.channel(Channel::AccelX) = rng::gaussian(engine, 0.0, accel_sigma);
        s.channel(Channel::AccelY) = rng::gaussian(engine, 0.0, accel_sigma);
        s.channel(Channel::AccelZ) = rng::gaussian(engine, 0.0, accel_sigma);
    }
    return SensorStream::create(std::move(out), label, StreamSource{});
}

SensorStream make_room_reference(const GeneratorConfig& c, StreamSource source,
                                 double light_mean, double light_var, double end_time,
                                 std::mt19937_64& engine) {
    const auto samples = static_cast<std::size_t>(end_time * c.reference_rate) + 1;
    const double light_sigma = std::sqrt(light_var);
    std::vector<SensorSample> out(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        SensorSample& s = out[i];
        s.timestamp = static_cast<double>(i) / c.reference_rate;
        s.channel(Channel::Temperature) =
            c.ambient_temp + rng::gaussian(engine, 0.0, c.temp_noise_static);
        s.channel(Channel::Humidity) = std::clamp(
            c.humidity_base + rng::gaussian(engine, 0.0, c.humidity_noise), 0.0, 100.0);
        s.channel(Channel::Light) =
            std::max(rng::gaussian(engine, light_mean, light_sigma), 0.0);
    }
    return SensorStream::create(std::move(out), std::nullopt, source);
}

SensorStream make_floor_reference(const GeneratorConfig& c, int floor, double end_time,
                                  std::mt19937_64& engine) {
    const auto samples = static_cast<std::size_t>(end_time * c.reference_rate) + 1;
    const double level = c.floor_lights[static_cast<std::size_t>(floor - 1)];
    const double sigma = std::sqrt(c.indoor_light_var);
    std::vector<SensorSample> out(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        out[i].timestamp = static_cast<double>(i) / c.reference_rate;
        out[i].channel(Channel::Light) =
            std::max(level + rng::gaussian(engine, 0.0, sigma), 0.0);
    }
    return SensorStream::create(std::move(out), std::nullopt,
                                StreamSource{StreamSource::Kind::ReferenceFloor, floor});
}

std::string episode_file_name(std::size_t index, ActivityLabel label) {
    std::string idx = std::to_string(index);
    if (idx.size() < 2) idx.insert(idx.begin(), '0');
    return "episode_" + idx + "_" + std::string(to_string(label)) + ".csv";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ExportError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw ExportError("failed writing " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ExportError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    GeneratorConfig, duration_minutes, sampling_rate, reference_rate, gap_seconds,
    ambient_temp, skin_offset, cooling_slope, cooling_tau, run_slope_factor,
    run_noise_factor, temp_noise_dynamic, temp_noise_static, humidity_base, humidity_noise,
    rest_humidity_drift, rest_humidity_boost, lab_light_mean, lab_light_var,
    cubicle_light_mean, cubicle_light_var, elevator_light_mean, corridor_light_mean,
    rest_light_mean, indoor_light_var, outdoor_light_mean, outdoor_light_var, floor_lights,
    landing_light, climb_velocity, velocity_jitter, accel_sd, seed)

const SensorStream* LabeledDataset::reference(const StreamSource& source) const {
    for (const SensorStream& stream : references)
        if (stream.source() == source) return &stream;
    return nullptr;
}

LabeledDataset generate(const GeneratorConfig& config) {
    validate(config);
    LabeledDataset dataset;
    dataset.config = config;

    double start = 0.0;
    for (std::size_t e = 0; e < kTimeline.size(); ++e) {
        const ActivityLabel label = kTimeline[e];
        const auto samples = static_cast<std::size_t>(std::llround(
            config.duration_minutes[static_cast<std::size_t>(label)] * 60.0 *
            config.sampling_rate));
        std::mt19937_64 engine = rng::make_engine(config.seed, 10 + e);
        SensorStream stream = make_episode(config, label, start, samples, engine);
        Episode episode;
        episode.label = label;
        episode.stream_index = dataset.wearable.size();
        episode.start_time = start;
        episode.end_time = stream.time(stream.size() - 1);
        dataset.episodes.push_back(episode);
        dataset.wearable.push_back(std::move(stream));
        start += static_cast<double>(samples) / config.sampling_rate + config.gap_seconds;
    }

    const double end_time = dataset.episodes.back().end_time;
    {
        std::mt19937_64 engine = rng::make_engine(config.seed, 200);
        dataset.references.push_back(make_room_reference(
            config, StreamSource{StreamSource::Kind::ReferenceLab, -1}, config.lab_light_mean,
            config.lab_light_var, end_time, engine));
    }
    {
        std::mt19937_64 engine = rng::make_engine(config.seed, 201);
        dataset.references.push_back(make_room_reference(
            config, StreamSource{StreamSource::Kind::ReferenceCubicle, -1},
            config.cubicle_light_mean, config.cubicle_light_var, end_time, engine));
    }
    for (std::size_t f = 0; f < config.floor_lights.size(); ++f) {
        std::mt19937_64 engine = rng::make_engine(config.seed, 210 + f);
        dataset.references.push_back(
            make_floor_reference(config, static_cast<int>(f) + 1, end_time, engine));
    }
    return dataset;
}

void export_dataset(const LabeledDataset& dataset, const std::filesystem::path& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw ExportError("cannot create " + directory.string() + ": " + ec.message());

    json manifest;
    manifest["config"] = dataset.config;
    manifest["episodes"] = json::array();
    for (const Episode& episode : dataset.episodes) {
        const std::string file = episode_file_name(episode.stream_index, episode.label);
        write_file(directory / file,
                   serialize_stream(dataset.wearable[episode.stream_index]));
        manifest["episodes"].push_back({{"label", to_string(episode.label)},
                                        {"file", file},
                                        {"stream_index", episode.stream_index},
                                        {"start_time", episode.start_time},
                                        {"end_time", episode.end_time}});
    }
    manifest["references"] = json::array();
    for (const SensorStream& stream : dataset.references) {
        const std::string name = source_name(stream.source());
        const std::string file = name + ".csv";
        write_file(directory / file, serialize_stream(stream));
        manifest["references"].push_back({{"source", name}, {"file", file}});
    }
    write_file(directory / "manifest.json", manifest.dump(2) + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& directory) {
    json manifest;
    try {
        manifest = json::parse(read_file(directory / "manifest.json"));
    } catch (const json::exception& e) {
        throw ExportError("malformed manifest in " + directory.string() + ": " + e.what());
    }

    LabeledDataset dataset;
    try {
        dataset.config = manifest.at("config").get<GeneratorConfig>();
        for (const json& entry : manifest.at("episodes")) {
            Episode episode;
            const auto label = parse_activity(entry.at("label").get<std::string>());
            if (!label)
                throw ExportError("unknown label in manifest: " +
                                  entry.at("label").get<std::string>());
            episode.label = *label;
            episode.stream_index = entry.at("stream_index").get<std::size_t>();
            episode.start_time = entry.at("start_time").get<double>();
            episode.end_time = entry.at("end_time").get<double>();
            const std::string csv = read_file(directory / entry.at("file").get<std::string>());
            if (episode.stream_index != dataset.wearable.size())
                throw ExportError("episode stream indices out of order in manifest");
            dataset.wearable.push_back(parse_stream(csv, StreamSource{}));
            dataset.episodes.push_back(episode);
        }
        for (const json& entry : manifest.at("references")) {
            const std::string name = entry.at("source").get<std::string>();
            const auto source = parse_source(name);
            if (!source) throw ExportError("unknown reference source: " + name);
            const std::string csv = read_file(directory / entry.at("file").get<std::string>());
            dataset.references.push_back(parse_stream(csv, *source));
        }
    } catch (const json::exception& e) {
        throw ExportError("malformed manifest in " + directory.string() + ": " + e.what());
    }
    return dataset;
}

}  // namespace envsense

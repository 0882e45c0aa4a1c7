#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "envsense/core.hpp"

namespace envsense {

// Signal-shape knobs of the synthetic recorder. Activity-indexed arrays
// follow the ActivityLabel enum order. Noise defaults sit at the hardware
// accuracy figures (temperature 0.3 degC, humidity 1 %RH) so the generated
// data is no cleaner than a real sensor.
struct GeneratorConfig {
    // minutes of recording per activity
    std::array<double, kActivityCount> duration_minutes{44.0, 25.0, 41.0, 37.0,
                                                        52.0, 176.0, 169.0, 26.0};
    double sampling_rate = 1.0;   // wearable Hz
    double reference_rate = 1.0;  // fixed-sensor Hz
    double gap_seconds = 60.0;    // silence between consecutive episodes

    double ambient_temp = 24.0;   // degC room baseline
    double skin_offset = 8.0;     // wrist reads this much above ambient at rest
    double cooling_slope = -0.017;  // initial airflow cooling, degC/s
    double cooling_tau = 180.0;     // seconds to approach the cooled plateau
    double run_slope_factor = 2.0;  // running cools harder than walking
    double run_noise_factor = 1.5;
    double temp_noise_dynamic = 0.6;  // sigma degC while moving
    double temp_noise_static = 0.3;   // sigma degC at rest (sensor accuracy)

    double humidity_base = 40.0;       // %RH
    double humidity_noise = 1.0;       // sigma %RH
    double rest_humidity_drift = 0.015;  // %RH per second while resting
    double rest_humidity_boost = 3.0;    // noise multiplier while resting

    double lab_light_mean = 600.0;  // lux
    double lab_light_var = 400.0;
    double cubicle_light_mean = 300.0;
    double cubicle_light_var = 400.0;
    double elevator_light_mean = 300.0;  // same as the cubicle on purpose:
                                         // light alone cannot tell them apart
    double corridor_light_mean = 450.0;  // indoor walk/run
    double rest_light_mean = 500.0;
    double indoor_light_var = 400.0;  // shared by elevator/corridor/rest/stairs
    double outdoor_light_mean = 5000.0;
    double outdoor_light_var = 40000.0;

    std::vector<double> floor_lights{780.0, 760.0, 820.0, 800.0, 840.0, 770.0, 810.0};
    double landing_light = 80.0;
    double climb_velocity = 0.1;    // floors per second
    double velocity_jitter = 0.05;  // relative spread of the per-episode pace

    // per-axis accel sigma per activity; static classes share one low value
    // so acceleration alone cannot resolve location
    std::array<double, kActivityCount> accel_sd{0.45, 0.05, 0.3, 0.3,
                                                0.8, 0.02, 0.02, 0.02};

    std::uint64_t seed = 1;

    bool operator==(const GeneratorConfig&) const = default;
};

struct Episode {
    ActivityLabel label = ActivityLabel::Rest;
    std::size_t stream_index = 0;  // into LabeledDataset::wearable
    double start_time = 0.0;
    double end_time = 0.0;  // timestamp of the last sample
};

struct LabeledDataset {
    GeneratorConfig config;
    std::vector<SensorStream> wearable;    // one labeled stream per episode
    std::vector<SensorStream> references;  // lab, cubicle, then one per floor
    std::vector<Episode> episodes;

    const SensorStream* reference(const StreamSource& source) const;
};

// Deterministic given config.seed. Episodes occupy one global timeline with
// gaps between them; reference streams span the whole timeline. Throws
// ConfigError on out-of-range parameters.
LabeledDataset generate(const GeneratorConfig& config);

// One CSV per stream plus manifest.json describing episodes, references and
// the generating config. Throws ExportError on I/O failure. An empty dataset
// writes only a manifest with zero episodes.
void export_dataset(const LabeledDataset& dataset, const std::filesystem::path& directory);

// Reads back what export_dataset wrote; round-trips exactly.
LabeledDataset load_dataset(const std::filesystem::path& directory);

}  // namespace envsense

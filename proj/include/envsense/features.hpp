#pragma once

#include <bitset>
#include <optional>
#include <string_view>
#include <vector>

#include "envsense/core.hpp"
#include "envsense/location.hpp"

namespace envsense {

// The windowed features, in feature-matrix column order.
enum class Feature : std::uint8_t {
    TempGradient = 0,
    TempSd,
    HumiditySd,
    AccelSdX,
    AccelSdY,
    AccelSdZ,
    LightLr,
    DtwDist,
};

inline constexpr std::size_t kFeatureCount = 8;

inline constexpr std::array<Feature, kFeatureCount> kAllFeatures = {
    Feature::TempGradient, Feature::TempSd,   Feature::HumiditySd, Feature::AccelSdX,
    Feature::AccelSdY,     Feature::AccelSdZ, Feature::LightLr,    Feature::DtwDist,
};

using FeatureSet = std::bitset<kFeatureCount>;

std::string_view feature_name(Feature f);
std::optional<Feature> parse_feature(std::string_view name);

// Derived features of one window. Fields are absent when the stream lacks
// the channel, the window lacks the gradient's history, or no location
// context was supplied.
struct FeatureVector {
    double end_time = 0.0;
    std::optional<ActivityLabel> label;
    std::optional<double> temp_gradient;
    std::optional<double> temp_sd;
    std::optional<double> humidity_sd;
    std::optional<double> accel_sd_x;
    std::optional<double> accel_sd_y;
    std::optional<double> accel_sd_z;
    std::optional<double> light_lr;
    std::optional<double> dtw_dist;

    const std::optional<double>& get(Feature f) const;
    std::optional<double>& get(Feature f);

    bool operator==(const FeatureVector&) const = default;
};

// Windowed average of paired finite-difference temperature slopes,
//   (1/(h+1)) * sum_{i=0..h} (Tp[k-i] - Tp[k-h-i]) / (T[k-i] - T[k-h-i])
// with h = floor(w/2). Reads back to index k-2h, one sample before the
// window start when w is even; throws WindowError when that history is
// missing.
double temp_gradient(const Window& window);

// Population standard deviation of one channel over the window,
// sqrt((1/w) * sum (v - mean)^2).
double rolling_sd(const Window& window, Channel channel);

// Reference statistics and stair pattern that let extraction fill the
// location features.
struct LocationContext {
    GaussianStats cubicle;
    GaussianStats lab;
    StairTemplate stair_template;
};

// One FeatureVector per sliding window. With `requested` unset (the
// default), every feature the stream's channels and the context allow is
// produced; an explicit request throws ChannelError when its channel is
// missing from the stream, or SequenceError when a location feature is
// requested without context. The gradient stays absent in windows that
// lack its one-sample lookback.
std::vector<FeatureVector> extract_features(const SensorStream& stream, std::size_t w,
                                            std::size_t stride,
                                            const LocationContext* context = nullptr,
                                            std::optional<FeatureSet> requested = std::nullopt);

// Feature matrix CSV: a header row of feature names with a trailing label
// column, one row per window, empty cells for absent fields.
std::string feature_csv(const std::vector<FeatureVector>& vectors);
std::vector<FeatureVector> parse_feature_csv(std::string_view csv);

}  // namespace envsense

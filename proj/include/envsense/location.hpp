#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "envsense/error.hpp"

namespace envsense {

struct GaussianStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased sample variance
    std::size_t count = 0;
};

// Sample mean and unbiased variance of reference readings. Throws
// DegenerateStatsError for fewer than two readings or zero variance.
GaussianStats fit_reference_stats(std::span<const double> readings);

// Summed Gaussian log likelihood ratio of light observations under the lab
// versus cubicle reference distributions:
//   LR = sum_i [ ln(var_lab / var_cub)
//                + (x_i - mean_cub)^2 / (2 var_cub)
//                - (x_i - mean_lab)^2 / (2 var_lab) ]
// Large LR favours the lab. Additive over observation batches.
double lda_log_ratio(std::span<const double> observations, const GaussianStats& cubicle,
                     const GaussianStats& lab);

enum class Location : std::uint8_t { Cubicle, Lab };

// Below-threshold scores read as cubicle, everything else (boundary
// included) as lab.
Location classify_location(double log_ratio, double threshold = 0.0);

// Dynamic time warping distance with squared pointwise cost:
//   D[i][j] = (s[i]-t[j])^2 + min(D[i-1][j], D[i][j-1], D[i-1][j-1])
// Unconstrained alignment; returns D at the final cell. Throws SequenceError
// on an empty input.
double dtw_distance(std::span<const double> s, std::span<const double> t);

// dtw_distance scaled by 1/(|s|+|t|) so one threshold serves windows of
// different lengths.
double normalized_dtw_distance(std::span<const double> s, std::span<const double> t);

// Rendered light pattern of a stair climb: bright floor plateaus alternating
// with dim intermediate landings.
struct StairTemplate {
    std::vector<double> levels;   // one light level per segment, floor first
    double segment_duration = 0;  // seconds per plateau
    std::vector<double> samples;  // rendered sequence at the build rate
};

// Floors alternate with landings; each plateau lasts 1/(2*velocity) seconds
// sampled at `sample_rate`. Throws TemplateError when fewer than two floors
// are given, the landing is as bright as a floor, or the geometry yields no
// samples per segment.
StairTemplate build_stair_template(std::span<const double> floor_light_levels,
                                   double landing_level, double climb_velocity,
                                   double sample_rate);

struct ClimbDetection {
    bool climbing = false;
    double distance = 0.0;  // length-normalized DTW distance
};

// Matches a window of light readings against the stair template; climbing
// iff the normalized distance falls below the threshold.
ClimbDetection detect_climbing(std::span<const double> window_lights,
                               const StairTemplate& pattern, double threshold);

}  // namespace envsense

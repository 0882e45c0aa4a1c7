#include "envsense/location.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace envsense {

GaussianStats fit_reference_stats(std::span<const double> readings) {
    const std::size_t n = readings.size();
    if (n < 2) {
        throw DegenerateStatsError("need at least 2 readings, got " + std::to_string(n));
    }
    double sum = 0.0;
    for (double v : readings) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : readings) {
        const double d = v - mean;
        ss += d * d;
    }
    const double variance = ss / static_cast<double>(n - 1);
    if (variance <= 0.0) {
        throw DegenerateStatsError("reference readings have zero variance");
    }
    return {mean, variance, n};
}

double lda_log_ratio(std::span<const double> observations, const GaussianStats& cubicle,
                     const GaussianStats& lab) {
    if (observations.empty()) {
        throw SequenceError("log likelihood ratio needs at least one observation");
    }
    const double log_var_ratio = std::log(lab.variance / cubicle.variance);
    double lr = 0.0;
    for (double x : observations) {
        const double dc = x - cubicle.mean;
        const double dl = x - lab.mean;
        lr += log_var_ratio + dc * dc / (2.0 * cubicle.variance) - dl * dl / (2.0 * lab.variance);
    }
    return lr;
}

Location classify_location(double log_ratio, double threshold) {
    return log_ratio < threshold ? Location::Cubicle : Location::Lab;
}

double dtw_distance(std::span<const double> s, std::span<const double> t) {
    if (s.empty() || t.empty()) throw SequenceError("DTW input sequence is empty");
    const std::size_t n = s.size();
    const std::size_t m = t.size();
    constexpr double inf = std::numeric_limits<double>::infinity();

    // One rolling row of the table; prev holds D[i-1][*].
    std::vector<double> prev(m), curr(m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            const double d = s[i] - t[j];
            const double cost = d * d;
            double best;
            if (i == 0 && j == 0) {
                best = 0.0;
            } else {
                const double up = i > 0 ? prev[j] : inf;
                const double left = j > 0 ? curr[j - 1] : inf;
                const double diag = (i > 0 && j > 0) ? prev[j - 1] : inf;
                best = std::min({up, left, diag});
            }
            curr[j] = cost + best;
        }
        std::swap(prev, curr);
    }
    return prev[m - 1];
}

double normalized_dtw_distance(std::span<const double> s, std::span<const double> t) {
    return dtw_distance(s, t) / static_cast<double>(s.size() + t.size());
}

StairTemplate build_stair_template(std::span<const double> floor_light_levels,
                                   double landing_level, double climb_velocity,
                                   double sample_rate) {
    if (floor_light_levels.size() < 2) {
        throw TemplateError("stair template needs at least 2 floors");
    }
    if (!(climb_velocity > 0.0)) throw TemplateError("climb velocity must be positive");
    if (!(sample_rate > 0.0)) throw TemplateError("sample rate must be positive");
    const double min_floor = *std::min_element(floor_light_levels.begin(), floor_light_levels.end());
    if (landing_level >= min_floor) {
        throw TemplateError("landing level must be dimmer than every floor level");
    }

    StairTemplate out;
    out.segment_duration = 1.0 / (2.0 * climb_velocity);
    const auto per_segment = static_cast<std::size_t>(std::llround(out.segment_duration * sample_rate));
    if (per_segment < 1) {
        throw TemplateError("segment duration shorter than one sample period");
    }
    for (std::size_t f = 0; f < floor_light_levels.size(); ++f) {
        if (f > 0) out.levels.push_back(landing_level);
        out.levels.push_back(floor_light_levels[f]);
    }
    out.samples.reserve(out.levels.size() * per_segment);
    for (double level : out.levels) {
        out.samples.insert(out.samples.end(), per_segment, level);
    }
    return out;
}

ClimbDetection detect_climbing(std::span<const double> window_lights,
                               const StairTemplate& pattern, double threshold) {
    const double distance = normalized_dtw_distance(window_lights, pattern.samples);
    return {distance < threshold, distance};
}

}  // namespace envsense

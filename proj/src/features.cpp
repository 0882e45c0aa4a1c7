#include "envsense/features.hpp"

#include <cmath>
#include <string>

#include "envsense/text.hpp"

namespace envsense {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "temp_gradient", "temp_sd",    "humidity_sd", "accel_sd_x",
    "accel_sd_y",    "accel_sd_z", "light_lr",    "dtw_dist",
};

std::optional<Channel> feature_channel(Feature f) {
    switch (f) {
        case Feature::TempGradient:
        case Feature::TempSd: return Channel::Temperature;
        case Feature::HumiditySd: return Channel::Humidity;
        case Feature::AccelSdX: return Channel::AccelX;
        case Feature::AccelSdY: return Channel::AccelY;
        case Feature::AccelSdZ: return Channel::AccelZ;
        case Feature::LightLr:
        case Feature::DtwDist: return Channel::Light;
    }
    return std::nullopt;
}

}  // namespace

std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

std::optional<Feature> parse_feature(std::string_view name) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        if (kFeatureNames[i] == name) return static_cast<Feature>(i);
    }
    return std::nullopt;
}

const std::optional<double>& FeatureVector::get(Feature f) const {
    switch (f) {
        case Feature::TempGradient: return temp_gradient;
        case Feature::TempSd: return temp_sd;
        case Feature::HumiditySd: return humidity_sd;
        case Feature::AccelSdX: return accel_sd_x;
        case Feature::AccelSdY: return accel_sd_y;
        case Feature::AccelSdZ: return accel_sd_z;
        case Feature::LightLr: return light_lr;
        case Feature::DtwDist: return dtw_dist;
    }
    return temp_gradient;
}

std::optional<double>& FeatureVector::get(Feature f) {
    return const_cast<std::optional<double>&>(static_cast<const FeatureVector&>(*this).get(f));
}

double temp_gradient(const Window& window) {
    const SensorStream& stream = window.stream();
    if (!stream.has_channel(Channel::Temperature)) {
        throw ChannelError("temp_gradient requires the temperature channel");
    }
    const std::size_t k = window.end_index();
    const std::size_t half = window.length() / 2;
    if (k < 2 * half) {
        throw WindowError("temp_gradient at index " + std::to_string(k) + " needs " +
                          std::to_string(2 * half) + " samples of history");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i <= half; ++i) {
        const std::size_t hi = k - i;
        const std::size_t lo = k - half - i;
        sum += (stream.value(hi, Channel::Temperature) - stream.value(lo, Channel::Temperature)) /
               (stream.time(hi) - stream.time(lo));
    }
    return sum / static_cast<double>(half + 1);
}

double rolling_sd(const Window& window, Channel channel) {
    const SensorStream& stream = window.stream();
    if (!stream.has_channel(channel)) {
        throw ChannelError(std::string("rolling_sd requires the ") +
                           std::string(channel_name(channel)) + " channel");
    }
    const std::size_t w = window.length();
    const std::size_t begin = window.begin_index();
    double sum = 0.0;
    for (std::size_t i = begin; i <= window.end_index(); ++i) {
        sum += stream.value(i, channel);
    }
    const double mean = sum / static_cast<double>(w);
    double ss = 0.0;
    for (std::size_t i = begin; i <= window.end_index(); ++i) {
        const double d = stream.value(i, channel) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(w));
}

std::vector<FeatureVector> extract_features(const SensorStream& stream, std::size_t w,
                                            std::size_t stride, const LocationContext* context,
                                            std::optional<FeatureSet> requested) {
    FeatureSet wanted;
    if (requested) {
        wanted = *requested;
        for (Feature f : kAllFeatures) {
            if (!wanted.test(static_cast<std::size_t>(f))) continue;
            const auto channel = feature_channel(f);
            if (channel && !stream.has_channel(*channel)) {
                throw ChannelError(std::string(feature_name(f)) + " requires the " +
                                   std::string(channel_name(*channel)) + " channel");
            }
            if ((f == Feature::LightLr || f == Feature::DtwDist) && context == nullptr) {
                throw SequenceError(std::string(feature_name(f)) +
                                    " requires a location context");
            }
        }
    } else {
        for (Feature f : kAllFeatures) {
            const auto channel = feature_channel(f);
            bool available = !channel || stream.has_channel(*channel);
            if ((f == Feature::LightLr || f == Feature::DtwDist) && context == nullptr) {
                available = false;
            }
            if (available) wanted.set(static_cast<std::size_t>(f));
        }
    }

    std::vector<FeatureVector> out;
    const std::size_t half = w / 2;
    for (const Window& window : windows(stream, w, stride)) {
        FeatureVector fv;
        fv.end_time = window.end_time();
        fv.label = stream.label();
        if (wanted.test(static_cast<std::size_t>(Feature::TempGradient)) &&
            window.end_index() >= 2 * half) {
            fv.temp_gradient = temp_gradient(window);
        }
        if (wanted.test(static_cast<std::size_t>(Feature::TempSd))) {
            fv.temp_sd = rolling_sd(window, Channel::Temperature);
        }
        if (wanted.test(static_cast<std::size_t>(Feature::HumiditySd))) {
            fv.humidity_sd = rolling_sd(window, Channel::Humidity);
        }
        if (wanted.test(static_cast<std::size_t>(Feature::AccelSdX))) {
            fv.accel_sd_x = rolling_sd(window, Channel::AccelX);
        }
        if (wanted.test(static_cast<std::size_t>(Feature::AccelSdY))) {
            fv.accel_sd_y = rolling_sd(window, Channel::AccelY);
        }
        if (wanted.test(static_cast<std::size_t>(Feature::AccelSdZ))) {
            fv.accel_sd_z = rolling_sd(window, Channel::AccelZ);
        }
        const bool need_lights = wanted.test(static_cast<std::size_t>(Feature::LightLr)) ||
                                 wanted.test(static_cast<std::size_t>(Feature::DtwDist));
        if (need_lights) {
            const std::vector<double> lights = window.values(Channel::Light);
            if (wanted.test(static_cast<std::size_t>(Feature::LightLr))) {
                fv.light_lr = lda_log_ratio(lights, context->cubicle, context->lab);
            }
            if (wanted.test(static_cast<std::size_t>(Feature::DtwDist))) {
                fv.dtw_dist = normalized_dtw_distance(lights, context->stair_template.samples);
            }
        }
        out.push_back(fv);
    }
    return out;
}

std::string feature_csv(const std::vector<FeatureVector>& vectors) {
    std::string out;
    for (Feature f : kAllFeatures) {
        out += feature_name(f);
        out += ',';
    }
    out += "label\n";
    for (const FeatureVector& fv : vectors) {
        for (Feature f : kAllFeatures) {
            const auto& v = fv.get(f);
            if (v) out += text::format_double(*v);
            out += ',';
        }
        if (fv.label) out += to_string(*fv.label);
        out += '\n';
    }
    return out;
}

std::vector<FeatureVector> parse_feature_csv(std::string_view csv) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= csv.size(); ++i) {
        if (i == csv.size() || csv[i] == '\n') {
            std::string_view line = csv.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) lines.push_back(line);
            start = i + 1;
        }
    }
    if (lines.empty()) throw ParseError("empty feature CSV");

    auto headers = text::split(lines[0], ',');
    std::vector<std::optional<Feature>> columns;  // nullopt = label/end_time column
    int label_col = -1;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        std::string_view h = text::trim(headers[c]);
        if (h == "label") {
            label_col = static_cast<int>(c);
            columns.push_back(std::nullopt);
        } else if (h == "end_time") {
            columns.push_back(std::nullopt);
        } else {
            auto f = parse_feature(h);
            if (!f) throw ParseError("unknown feature column '" + std::string(h) + "'");
            columns.push_back(f);
        }
    }

    std::vector<FeatureVector> out;
    out.reserve(lines.size() - 1);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        auto cells = text::split(lines[r], ',');
        if (cells.size() != headers.size()) {
            throw ParseError("expected " + std::to_string(headers.size()) + " cells at row " +
                             std::to_string(r));
        }
        FeatureVector fv;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::string_view cell = cells[c];
            if (cell.empty()) continue;
            if (static_cast<int>(c) == label_col) {
                auto label = parse_activity(cell);
                if (!label) {
                    throw LabelError("unknown activity label '" + std::string(cell) + "' at row " +
                                     std::to_string(r));
                }
                fv.label = label;
            } else if (columns[c]) {
                auto v = text::parse_double(cell);
                if (!v) {
                    throw ParseError("malformed number '" + std::string(cell) + "' at row " +
                                     std::to_string(r));
                }
                fv.get(*columns[c]) = *v;
            }
        }
        out.push_back(fv);
    }
    return out;
}

}  // namespace envsense

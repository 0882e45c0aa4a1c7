#include "envsense/core.hpp"

#include <algorithm>
#include <cmath>

#include "envsense/text.hpp"

namespace envsense {

namespace {

constexpr std::array<std::string_view, kActivityCount> kActivityNames = {
    "climb_stairs", "take_elevator", "walk_outdoor", "walk_indoor",
    "run_indoor",   "sit_lab",       "sit_cubicle",  "rest",
};

constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "temperature", "humidity", "light", "accel_x", "accel_y", "accel_z",
};

void check_sample(const SensorSample& s, std::size_t row) {
    if (!std::isfinite(s.timestamp)) {
        throw RangeError("non-finite timestamp at row " + std::to_string(row));
    }
    const auto& hum = s.channel(Channel::Humidity);
    if (hum && (*hum < 0.0 || *hum > 100.0)) {
        throw RangeError("humidity " + text::format_double(*hum) + " outside [0, 100] at row " +
                         std::to_string(row));
    }
    const auto& light = s.channel(Channel::Light);
    if (light && *light < 0.0) {
        throw RangeError("negative light level at row " + std::to_string(row));
    }
}

ChannelSet present_channels(const SensorSample& s) {
    ChannelSet set;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        if (s.channels[c]) set.set(c);
    }
    return set;
}

}  // namespace

std::string_view to_string(ActivityLabel label) {
    return kActivityNames[static_cast<std::size_t>(label)];
}

std::optional<ActivityLabel> parse_activity(std::string_view name) {
    for (std::size_t i = 0; i < kActivityCount; ++i) {
        if (kActivityNames[i] == name) return static_cast<ActivityLabel>(i);
    }
    return std::nullopt;
}

bool is_dynamic_activity(ActivityLabel label) {
    return label == ActivityLabel::WalkIndoor || label == ActivityLabel::RunIndoor;
}

bool is_static_activity(ActivityLabel label) {
    return label == ActivityLabel::SitLab || label == ActivityLabel::SitCubicle ||
           label == ActivityLabel::TakeElevator;
}

std::string_view channel_name(Channel c) {
    return kChannelNames[static_cast<std::size_t>(c)];
}

std::string source_name(const StreamSource& source) {
    switch (source.kind) {
        case StreamSource::Kind::Wearable: return "wearable";
        case StreamSource::Kind::ReferenceLab: return "reference-lab";
        case StreamSource::Kind::ReferenceCubicle: return "reference-cubicle";
        case StreamSource::Kind::ReferenceFloor:
            return "reference-floor-" + std::to_string(source.floor);
    }
    return "wearable";
}

std::optional<StreamSource> parse_source(std::string_view name) {
    if (name == "wearable") return StreamSource{StreamSource::Kind::Wearable, -1};
    if (name == "reference-lab") return StreamSource{StreamSource::Kind::ReferenceLab, -1};
    if (name == "reference-cubicle") return StreamSource{StreamSource::Kind::ReferenceCubicle, -1};
    constexpr std::string_view prefix = "reference-floor-";
    if (name.substr(0, prefix.size()) == prefix) {
        auto idx = text::parse_double(name.substr(prefix.size()));
        if (idx && *idx >= 0 && *idx == std::floor(*idx)) {
            return StreamSource{StreamSource::Kind::ReferenceFloor, static_cast<int>(*idx)};
        }
    }
    return std::nullopt;
}

SensorStream SensorStream::create(std::vector<SensorSample> samples,
                                  std::optional<ActivityLabel> label, StreamSource source) {
    SensorStream stream;
    if (!samples.empty()) {
        stream.channels_ = present_channels(samples.front());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            check_sample(samples[i], i + 1);
            if (i > 0 && samples[i].timestamp <= samples[i - 1].timestamp) {
                throw OrderingError("non-increasing timestamp at row " + std::to_string(i + 1));
            }
            if (present_channels(samples[i]) != stream.channels_) {
                throw ChannelError("channel set changes at row " + std::to_string(i + 1));
            }
        }
    }
    stream.samples_ = std::move(samples);
    stream.label_ = label;
    stream.source_ = source;
    return stream;
}

std::vector<double> SensorStream::channel_values(Channel c) const {
    if (!has_channel(c)) {
        throw ChannelError(std::string("stream has no ") + std::string(channel_name(c)) + " channel");
    }
    std::vector<double> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) out.push_back(*s.channel(c));
    return out;
}

SensorStream parse_stream(std::string_view csv, StreamSource source) {
    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= csv.size(); ++i) {
            if (i == csv.size() || csv[i] == '\n') {
                std::string_view line = csv.substr(start, i - start);
                if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
                lines.push_back(line);
                start = i + 1;
            }
        }
        while (!lines.empty() && lines.back().empty()) lines.pop_back();
    }
    if (lines.empty()) throw ParseError("empty input: missing header row");

    // Map header names to columns. -1 timestamp, -2 label, else channel index.
    auto headers = text::split(lines[0], ',');
    std::vector<int> column_kind;
    int timestamp_col = -1;
    int label_col = -1;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        std::string_view h = text::trim(headers[c]);
        if (h == "timestamp") {
            timestamp_col = static_cast<int>(c);
            column_kind.push_back(-1);
        } else if (h == "label") {
            label_col = static_cast<int>(c);
            column_kind.push_back(-2);
        } else {
            bool known = false;
            for (std::size_t ch = 0; ch < kChannelCount; ++ch) {
                if (h == kChannelNames[ch]) {
                    column_kind.push_back(static_cast<int>(ch));
                    known = true;
                    break;
                }
            }
            if (!known) throw ParseError("unknown column '" + std::string(h) + "' in header");
        }
    }
    if (timestamp_col < 0) throw ParseError("header is missing the timestamp column");

    std::vector<SensorSample> samples;
    samples.reserve(lines.size() - 1);
    std::optional<ActivityLabel> label;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const std::size_t row = r;  // 1-based data row
        auto cells = text::split(lines[r], ',');
        if (cells.size() != headers.size()) {
            throw ParseError("expected " + std::to_string(headers.size()) + " cells, got " +
                             std::to_string(cells.size()) + " at row " + std::to_string(row));
        }
        SensorSample sample;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::string_view cell = cells[c];
            if (column_kind[c] == -2) {
                if (cell.empty()) continue;
                auto parsed = parse_activity(cell);
                if (!parsed) {
                    throw LabelError("unknown activity label '" + std::string(cell) + "' at row " +
                                     std::to_string(row));
                }
                if (label && *label != *parsed) {
                    throw LabelError("conflicting activity labels in one stream at row " +
                                     std::to_string(row));
                }
                label = parsed;
                continue;
            }
            if (cell.empty()) {
                if (column_kind[c] == -1) {
                    throw ParseError("missing timestamp at row " + std::to_string(row));
                }
                continue;
            }
            auto value = text::parse_double(cell);
            if (!value) {
                throw ParseError("malformed number '" + std::string(cell) + "' at row " +
                                 std::to_string(row) + ", column " +
                                 std::string(text::trim(headers[c])));
            }
            if (column_kind[c] == -1) {
                sample.timestamp = *value;
            } else {
                sample.channels[static_cast<std::size_t>(column_kind[c])] = *value;
            }
        }
        samples.push_back(sample);
    }
    (void)label_col;
    return SensorStream::create(std::move(samples), label, source);
}

std::string serialize_stream(const SensorStream& stream) {
    std::string out = "timestamp";
    for (std::size_t c = 0; c < kChannelCount; ++c) {
        out += ',';
        out += kChannelNames[c];
    }
    const bool labeled = stream.label().has_value();
    if (labeled) out += ",label";
    out += '\n';
    for (const auto& s : stream.samples()) {
        out += text::format_double(s.timestamp);
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            out += ',';
            if (s.channels[c]) out += text::format_double(*s.channels[c]);
        }
        if (labeled) {
            out += ',';
            out += to_string(*stream.label());
        }
        out += '\n';
    }
    return out;
}

Window::Window(const SensorStream& stream, std::size_t end_index, std::size_t length)
    : stream_(&stream), end_index_(end_index), length_(length) {
    if (length < 2) throw WindowError("window length must be at least 2");
    if (end_index >= stream.size()) throw WindowError("window end index beyond stream");
    if (end_index + 1 < length) throw WindowError("window reaches before the stream start");
}

std::vector<double> Window::values(Channel c) const {
    if (!stream_->has_channel(c)) {
        throw ChannelError(std::string("stream has no ") + std::string(channel_name(c)) + " channel");
    }
    std::vector<double> out;
    out.reserve(length_);
    for (std::size_t i = begin_index(); i <= end_index_; ++i) {
        out.push_back(stream_->value(i, c));
    }
    return out;
}

std::size_t window_count(std::size_t stream_length, std::size_t w, std::size_t stride) {
    if (stream_length < w) return 0;
    return (stream_length - w) / stride + 1;
}

std::vector<Window> windows(const SensorStream& stream, std::size_t w, std::size_t stride) {
    if (w < 2) throw WindowError("window length must be at least 2");
    if (stride < 1) throw WindowError("stride must be at least 1");
    if (stream.size() < w) {
        throw WindowError("stream of " + std::to_string(stream.size()) +
                          " samples is shorter than window length " + std::to_string(w));
    }
    std::vector<Window> out;
    out.reserve(window_count(stream.size(), w, stride));
    for (std::size_t k = w - 1; k < stream.size(); k += stride) {
        out.emplace_back(stream, k, w);
    }
    return out;
}

std::vector<StreamAlignment> align(const SensorStream& wearable,
                                   const std::vector<const SensorStream*>& references,
                                   double max_offset) {
    if (wearable.empty()) throw AlignmentError("wearable stream is empty");
    std::vector<StreamAlignment> out;
    out.reserve(references.size());
    for (const SensorStream* ref : references) {
        if (ref == nullptr || ref->empty()) throw AlignmentError("reference stream is empty");
        const double w_lo = wearable.time(0);
        const double w_hi = wearable.time(wearable.size() - 1);
        const double r_lo = ref->time(0);
        const double r_hi = ref->time(ref->size() - 1);
        if (w_hi < r_lo || r_hi < w_lo) {
            throw AlignmentError("no time overlap between wearable [" + text::format_double(w_lo) +
                                 ", " + text::format_double(w_hi) + "] and reference " +
                                 source_name(ref->source()));
        }
        StreamAlignment alignment;
        alignment.reference = ref;
        alignment.pairs.reserve(wearable.size());
        for (std::size_t i = 0; i < wearable.size(); ++i) {
            const double t = wearable.time(i);
            // First reference sample with time >= t.
            std::size_t lo = 0, hi = ref->size();
            while (lo < hi) {
                std::size_t mid = (lo + hi) / 2;
                if (ref->time(mid) < t) {
                    lo = mid + 1;
                } else {
                    hi = mid;
                }
            }
            std::size_t best;
            if (lo == 0) {
                best = 0;
            } else if (lo == ref->size()) {
                best = ref->size() - 1;
            } else {
                const double after = ref->time(lo) - t;
                const double before = t - ref->time(lo - 1);
                best = (before <= after) ? lo - 1 : lo;  // tie -> earlier sample
            }
            const double offset = t - ref->time(best);
            if (std::abs(offset) <= max_offset) {
                alignment.pairs.push_back({i, best, offset});
            }
        }
        out.push_back(std::move(alignment));
    }
    return out;
}

}  // namespace envsense

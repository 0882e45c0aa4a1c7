#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "envsense/error.hpp"

namespace envsense {

// The eight activities of interest. Enum order matches the experiment's
// duration table; report rendering reorders to the confusion-matrix layout.
enum class ActivityLabel : std::uint8_t {
    ClimbStairs = 0,
    TakeElevator,
    WalkOutdoor,
    WalkIndoor,
    RunIndoor,
    SitLab,
    SitCubicle,
    Rest,
};

inline constexpr std::size_t kActivityCount = 8;

inline constexpr std::array<ActivityLabel, kActivityCount> kAllActivities = {
    ActivityLabel::ClimbStairs, ActivityLabel::TakeElevator,
    ActivityLabel::WalkOutdoor, ActivityLabel::WalkIndoor,
    ActivityLabel::RunIndoor,   ActivityLabel::SitLab,
    ActivityLabel::SitCubicle,  ActivityLabel::Rest,
};

std::string_view to_string(ActivityLabel label);

// Closed enumeration: unknown strings yield nullopt.
std::optional<ActivityLabel> parse_activity(std::string_view name);

// True for indoor walking/running; the "dynamic" side of the
// stationary-vs-dynamic grouping used by the temperature hypotheses.
bool is_dynamic_activity(ActivityLabel label);
// True for sitting in lab/cubicle and standing in an elevator.
bool is_static_activity(ActivityLabel label);

enum class Channel : std::uint8_t {
    Temperature = 0,
    Humidity,
    Light,
    AccelX,
    AccelY,
    AccelZ,
};

inline constexpr std::size_t kChannelCount = 6;
using ChannelSet = std::bitset<kChannelCount>;

std::string_view channel_name(Channel c);

// One timestamped multi-channel reading. Channels may be absent, but a
// stream requires the same presence pattern in every sample.
struct SensorSample {
    double timestamp = 0.0;  // seconds since stream epoch
    std::array<std::optional<double>, kChannelCount> channels;

    std::optional<double>& channel(Channel c) { return channels[static_cast<std::size_t>(c)]; }
    const std::optional<double>& channel(Channel c) const { return channels[static_cast<std::size_t>(c)]; }

    bool operator==(const SensorSample&) const = default;
};

struct StreamSource {
    enum class Kind : std::uint8_t { Wearable, ReferenceLab, ReferenceCubicle, ReferenceFloor };
    Kind kind = Kind::Wearable;
    int floor = -1;  // meaningful for ReferenceFloor only

    bool operator==(const StreamSource&) const = default;
};

std::string source_name(const StreamSource& source);
std::optional<StreamSource> parse_source(std::string_view name);

// Immutable, validated sample sequence. Construction enforces strictly
// increasing timestamps, per-channel ranges, and a uniform channel set.
class SensorStream {
public:
    SensorStream() = default;

    // Throws OrderingError / RangeError / ChannelError on invariant breaches.
    static SensorStream create(std::vector<SensorSample> samples,
                               std::optional<ActivityLabel> label = std::nullopt,
                               StreamSource source = {});

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::vector<SensorSample>& samples() const { return samples_; }
    const SensorSample& operator[](std::size_t i) const { return samples_[i]; }

    ChannelSet channels() const { return channels_; }
    bool has_channel(Channel c) const { return channels_.test(static_cast<std::size_t>(c)); }

    std::optional<ActivityLabel> label() const { return label_; }
    const StreamSource& source() const { return source_; }

    double time(std::size_t i) const { return samples_[i].timestamp; }
    // Requires the channel to be present in the stream.
    double value(std::size_t i, Channel c) const { return *samples_[i].channel(c); }

    // All values of one channel, in sample order.
    std::vector<double> channel_values(Channel c) const;

    bool operator==(const SensorStream& other) const {
        return samples_ == other.samples_ && label_ == other.label_ && source_ == other.source_;
    }

private:
    std::vector<SensorSample> samples_;
    ChannelSet channels_;
    std::optional<ActivityLabel> label_;
    StreamSource source_;
};

// CSV ingestion. Header row names the columns (any subset/order of
// timestamp,temperature,humidity,light,accel_x,accel_y,accel_z,label with
// timestamp mandatory); one row per sample; empty cells mark absent channels.
// Row indices in error messages are 1-based over data rows.
SensorStream parse_stream(std::string_view csv, StreamSource source = {});

// Full-schema CSV (label column only when the stream is labeled). Doubles
// are written in shortest round-trip form: parse(serialize(s)) == s.
std::string serialize_stream(const SensorStream& stream);

// A length-w view ending at sample index end_index of its parent stream.
class Window {
public:
    Window(const SensorStream& stream, std::size_t end_index, std::size_t length);

    const SensorStream& stream() const { return *stream_; }
    std::size_t end_index() const { return end_index_; }
    std::size_t length() const { return length_; }
    std::size_t begin_index() const { return end_index_ - length_ + 1; }

    double end_time() const { return stream_->time(end_index_); }

    // Values of one channel inside the window, oldest first.
    std::vector<double> values(Channel c) const;

private:
    const SensorStream* stream_;
    std::size_t end_index_;
    std::size_t length_;
};

// Sliding windows ending at w-1, w-1+stride, ... Throws WindowError when the
// stream is shorter than w.
std::vector<Window> windows(const SensorStream& stream, std::size_t w, std::size_t stride = 1);

// Closed-form count of the windows the enumeration yields.
std::size_t window_count(std::size_t stream_length, std::size_t w, std::size_t stride = 1);

struct AlignedPair {
    std::size_t wearable_index = 0;
    std::size_t reference_index = 0;
    double offset = 0.0;  // wearable time minus reference time
};

struct StreamAlignment {
    const SensorStream* reference = nullptr;
    std::vector<AlignedPair> pairs;
};

// Nearest-in-time pairing of each wearable sample against each reference
// stream; ties break toward the earlier reference sample. Pairs whose offset
// magnitude exceeds max_offset are dropped. Throws AlignmentError when a
// reference shares no time overlap with the wearable stream.
std::vector<StreamAlignment> align(const SensorStream& wearable,
                                   const std::vector<const SensorStream*>& references,
                                   double max_offset = std::numeric_limits<double>::infinity());

}  // namespace envsense

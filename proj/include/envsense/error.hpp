#pragma once

#include <stdexcept>
#include <string>

namespace envsense {

// Base for all library errors. Messages are prefixed with the module that
// raised them so the CLI can surface module-qualified diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string_view module, const std::string& message)
        : std::runtime_error(std::string(module) + ": " + message),
          module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

// core
struct ParseError : Error {
    explicit ParseError(const std::string& m) : Error("core", m) {}
};
struct OrderingError : Error {
    explicit OrderingError(const std::string& m) : Error("core", m) {}
};
struct RangeError : Error {
    explicit RangeError(const std::string& m) : Error("core", m) {}
};
struct LabelError : Error {
    explicit LabelError(const std::string& m) : Error("core", m) {}
};
struct ChannelError : Error {
    explicit ChannelError(const std::string& m) : Error("core", m) {}
};
struct WindowError : Error {
    explicit WindowError(const std::string& m) : Error("core", m) {}
};
struct AlignmentError : Error {
    explicit AlignmentError(const std::string& m) : Error("core", m) {}
};

// stats
struct HistogramError : Error {
    explicit HistogramError(const std::string& m) : Error("stats", m) {}
};
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& m) : Error("stats", m) {}
};

// location
struct DegenerateStatsError : Error {
    explicit DegenerateStatsError(const std::string& m) : Error("location", m) {}
};
struct TemplateError : Error {
    explicit TemplateError(const std::string& m) : Error("location", m) {}
};
struct SequenceError : Error {
    explicit SequenceError(const std::string& m) : Error("location", m) {}
};

// classify
struct TrainingError : Error {
    explicit TrainingError(const std::string& m) : Error("classify", m) {}
};
struct FeatureError : Error {
    explicit FeatureError(const std::string& m) : Error("classify", m) {}
};
struct FoldError : Error {
    explicit FoldError(const std::string& m) : Error("classify", m) {}
};
struct InputError : Error {
    explicit InputError(const std::string& m) : Error("classify", m) {}
};

// synth
struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("synth", m) {}
};
struct ExportError : Error {
    explicit ExportError(const std::string& m) : Error("synth", m) {}
};

// pipeline
struct PipelineConfigError : Error {
    explicit PipelineConfigError(const std::string& m) : Error("pipeline", m) {}
};
struct ReportError : Error {
    explicit ReportError(const std::string& m) : Error("pipeline", m) {}
};

}  // namespace envsense

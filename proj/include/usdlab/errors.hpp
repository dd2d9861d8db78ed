#pragma once

#include <stdexcept>
#include <string>

namespace usd {

/// Root of every error raised by the library. `kind()` is the stable,
/// machine-readable tag used in CLI error JSON.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept = 0;
    /// True for errors caused by bad input (exit code 1), false for runtime
    /// failures (exit code 2).
    virtual bool is_input_error() const noexcept { return true; }
};

#define USD_DEFINE_ERROR(Name, Tag, Input)                                \
    class Name : public Error {                                           \
    public:                                                               \
        using Error::Error;                                               \
        const char* kind() const noexcept override { return Tag; }        \
        bool is_input_error() const noexcept override { return Input; }   \
    };

USD_DEFINE_ERROR(ValidationError, "validation", true)
USD_DEFINE_ERROR(SpecError, "spec", true)
USD_DEFINE_ERROR(ParameterError, "parameter", true)
USD_DEFINE_ERROR(CapacityError, "capacity", true)
USD_DEFINE_ERROR(MetricError, "undefined_metric", false)
USD_DEFINE_ERROR(AnalysisError, "analysis", false)
USD_DEFINE_ERROR(NumericError, "numeric", false)
USD_DEFINE_ERROR(GenerationError, "generation", false)
USD_DEFINE_ERROR(MixingError, "mixing_undefined", false)
USD_DEFINE_ERROR(IoError, "io", false)

#undef USD_DEFINE_ERROR

} // namespace usd

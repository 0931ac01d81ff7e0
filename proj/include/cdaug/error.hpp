#pragma once

#include <stdexcept>
#include <string>

namespace cdaug {

/// Every failure the library can signal, one code per violated contract.
enum class ErrorCode {
    NonFinite,
    ShapeMismatch,
    BadSamplingRate,
    MalformedInput,
    NegativeAlpha,
    BadBand,
    BadRange,
    BadChannel,
    BadConfig,
    BadLabel,
    LengthMismatch,
    EmptyDataset,
    DivergedLoss,
    TooManyVariants,
    ForeignTransform,
    TooFewSubjects,
    ParseError,
    LabelMismatch,
    WindowTooLong,
    BadSpec,
    IoError,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

} // namespace cdaug

#include "cdaug/error.hpp"

namespace cdaug {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::BadSamplingRate: return "BadSamplingRate";
        case ErrorCode::MalformedInput: return "MalformedInput";
        case ErrorCode::NegativeAlpha: return "NegativeAlpha";
        case ErrorCode::BadBand: return "BadBand";
        case ErrorCode::BadRange: return "BadRange";
        case ErrorCode::BadChannel: return "BadChannel";
        case ErrorCode::BadConfig: return "BadConfig";
        case ErrorCode::BadLabel: return "BadLabel";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::TooManyVariants: return "TooManyVariants";
        case ErrorCode::ForeignTransform: return "ForeignTransform";
        case ErrorCode::TooFewSubjects: return "TooFewSubjects";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::LabelMismatch: return "LabelMismatch";
        case ErrorCode::WindowTooLong: return "WindowTooLong";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace cdaug

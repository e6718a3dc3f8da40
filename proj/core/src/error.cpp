#include "c2ft/error.hpp"

namespace c2ft {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DivideByZero: return "DivideByZero";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NotScalar: return "NotScalar";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonDivisibleCube: return "NonDivisibleCube";
        case ErrorCode::EmptyVolume: return "EmptyVolume";
        case ErrorCode::MalformedHeader: return "MalformedHeader";
        case ErrorCode::TruncatedRLE: return "TruncatedRLE";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::SizeMismatch: return "SizeMismatch";
        case ErrorCode::OddWidth: return "OddWidth";
        case ErrorCode::TooManyViews: return "TooManyViews";
        case ErrorCode::EmptyViewList: return "EmptyViewList";
        case ErrorCode::WidthMismatch: return "WidthMismatch";
        case ErrorCode::BoxLargerThanImage: return "BoxLargerThanImage";
        case ErrorCode::TooFewObjects: return "TooFewObjects";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::MissingViews: return "MissingViews";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::ConfigHashMismatch: return "ConfigHashMismatch";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace c2ft

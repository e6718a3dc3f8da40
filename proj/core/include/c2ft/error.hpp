#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace c2ft {

enum class ErrorCode {
    ShapeMismatch,
    DivideByZero,
    NonFinite,
    NotScalar,
    InvalidArgument,
    NonDivisibleCube,
    EmptyVolume,
    MalformedHeader,
    TruncatedRLE,
    DimMismatch,
    SizeMismatch,
    OddWidth,
    TooManyViews,
    EmptyViewList,
    WidthMismatch,
    BoxLargerThanImage,
    TooFewObjects,
    DivergedLoss,
    MissingViews,
    VersionMismatch,
    ConfigHashMismatch,
    CorruptRecord,
    Io,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// callers and tests can branch on the kind rather than the message text.
class Error : public std::runtime_error {
   public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

   private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace c2ft

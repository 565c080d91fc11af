#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sdk {

enum class ErrorKind {
    CutoffTooSmall,
    NumericOverflow,
    DimensionMismatch,
    BesselCutoffTooSmall,
    StepTooCoarse,
    InvalidComb,
    InvalidOrders,
    InvalidSchedule,
    FitDegenerate,
    NormLoss,
    InvalidArgument,
    SchemaError,
    RangeError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can emit a
// machine-parsable error line. `key` names the offending config key or
// argument when there is one.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::string key = {})
        : std::runtime_error(message), kind_(kind), key_(std::move(key))
    {
    }

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& key() const noexcept { return key_; }

private:
    ErrorKind kind_;
    std::string key_;
};

} // namespace sdk

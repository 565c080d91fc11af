#include "sdk/errors.hpp"

namespace sdk {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::CutoffTooSmall: return "CutoffTooSmall";
    case ErrorKind::NumericOverflow: return "NumericOverflow";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::BesselCutoffTooSmall: return "BesselCutoffTooSmall";
    case ErrorKind::StepTooCoarse: return "StepTooCoarse";
    case ErrorKind::InvalidComb: return "InvalidComb";
    case ErrorKind::InvalidOrders: return "InvalidOrders";
    case ErrorKind::InvalidSchedule: return "InvalidSchedule";
    case ErrorKind::FitDegenerate: return "FitDegenerate";
    case ErrorKind::NormLoss: return "NormLoss";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace sdk

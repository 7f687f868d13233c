#include "efs/error.hpp"

namespace efs {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidLevel: return "InvalidLevel";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AllColumnsDropped: return "AllColumnsDropped";
    case ErrorCode::AllRowsDropped: return "AllRowsDropped";
    case ErrorCode::NoObservedNeighborValue: return "NoObservedNeighborValue";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::CensoredBelowCutoff: return "CensoredBelowCutoff";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptySelection: return "EmptySelection";
    case ErrorCode::UnknownFeatureName: return "UnknownFeatureName";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace efs

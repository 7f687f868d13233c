#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace efs {

enum class ErrorCode {
    FileNotFound,
    SchemaMismatch,
    InvalidLevel,
    InvalidConfig,
    AllColumnsDropped,
    AllRowsDropped,
    NoObservedNeighborValue,
    UnknownLevel,
    DegenerateColumn,
    ZeroVariance,
    CensoredBelowCutoff,
    DimensionMismatch,
    EmptyTrainingSet,
    LengthMismatch,
    EmptySelection,
    UnknownFeatureName,
    InfeasibleSpec,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

// All library failures surface as efs::Error; the code lets callers (and the
// CLI exit-code mapping) distinguish input problems from runtime faults.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what)
        , code_(code)
    {
    }

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what)
{
    throw Error(code, what);
}

} // namespace efs

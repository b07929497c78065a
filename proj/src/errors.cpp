#include "projconst/errors.hpp"

namespace projconst {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ProblemTooLarge: return "ProblemTooLarge";
        case ErrorCode::NumericalFailure: return "NumericalFailure";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    }
    return "Unknown";
}

}  // namespace projconst

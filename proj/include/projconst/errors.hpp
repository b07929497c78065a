#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projconst {

enum class ErrorCode {
    InvalidArgument,
    InvalidGrid,
    InvalidConfig,
    RankDeficient,
    NotSymmetric,
    DimensionMismatch,
    ProblemTooLarge,
    NumericalFailure,
    ParseError,
    BudgetExhausted,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it to a machine-readable error object.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ParseError : public Error {
public:
    ParseError(const std::string &message, std::size_t position, std::string token)
        : Error(ErrorCode::ParseError, message), position_(position), token_(std::move(token)) {}

    [[nodiscard]] std::size_t position() const noexcept { return position_; }
    [[nodiscard]] const std::string &token() const noexcept { return token_; }

private:
    std::size_t position_;
    std::string token_;
};

}  // namespace projconst

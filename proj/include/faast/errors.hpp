#pragma once

#include <stdexcept>
#include <string>

namespace faast {

enum class ErrorCode {
    Parse,
    Granularity,
    MalformedNode,
    Shape,
    EmptyGraph,
    EmptyCorpus,
    EmptyDataset,
    DuplicateId,
    UnknownFragment,
    MissingTypeTags,
    LengthMismatch,
    SingleClass,
    DegenerateValidation,
    ZeroVector,
    NonFiniteLoss,
    ModelKindMismatch,
    Io,
    Config,
};

/// Single exception type for the whole library; `code` tells the caller
/// which contract was violated, `what()` carries the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failures additionally carry a source position (1-based).
class ParseError : public Error {
public:
    ParseError(const std::string& message, int line, int column)
        : Error(ErrorCode::Parse, message + " at line " + std::to_string(line) +
                                      ", column " + std::to_string(column)),
          line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace faast

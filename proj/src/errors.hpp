#pragma once

#include <stdexcept>
#include <string>

namespace abdgen {

// Errors named after the contract they break. All carry a human-readable
// message; parse errors additionally carry a source location.
struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_, int col_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ")"),
          line(line_),
          column(col_) {}
};

struct DepthExceeded : std::runtime_error {
    explicit DepthExceeded(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaMismatch : std::runtime_error {
    explicit SchemaMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValueOutOfRange : std::runtime_error {
    explicit ValueOutOfRange(const std::string& msg) : std::runtime_error(msg) {}
};

struct EmptyPositives : std::runtime_error {
    explicit EmptyPositives(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonFiniteGradient : std::runtime_error {
    std::string block;
    explicit NonFiniteGradient(const std::string& block_)
        : std::runtime_error("non-finite gradient in parameter block '" + block_ + "'"),
          block(block_) {}
};

struct MissingLabels : std::runtime_error {
    explicit MissingLabels(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoHypothesis : std::runtime_error {
    explicit NoHypothesis(const std::string& msg) : std::runtime_error(msg) {}
};

struct AbductionFailure : std::runtime_error {
    explicit AbductionFailure(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoModelFound : std::runtime_error {
    explicit NoModelFound(const std::string& msg) : std::runtime_error(msg) {}
};

struct LogicStuck : std::runtime_error {
    explicit LogicStuck(const std::string& msg) : std::runtime_error(msg) {}
};

struct IndivisiblePiece : std::runtime_error {
    explicit IndivisiblePiece(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace abdgen

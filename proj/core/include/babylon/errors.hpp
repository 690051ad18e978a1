#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace babylon {

/// Base class for all recoverable engine errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Blank or whitespace-only log content where a message was required.
class EmptyContentError : public Error {
public:
    EmptyContentError() : Error("log content is blank") {}
};

/// A structured CSV is missing a required column.
class SchemaError : public Error {
public:
    explicit SchemaError(std::string column)
        : Error("missing required column: " + column), column_(std::move(column)) {}
    const std::string& column() const { return column_; }

private:
    std::string column_;
};

/// A structured CSV row could not be parsed.
class RowError : public Error {
public:
    RowError(std::size_t line_number, const std::string& reason)
        : Error("row " + std::to_string(line_number) + ": " + reason), line_(line_number) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Ground truth was required but the dataset has none.
class MissingTruthError : public Error {
public:
    MissingTruthError() : Error("dataset has no ground truth") {}
};

/// A log template's literal fragments cannot be aligned to token boundaries.
class AlignmentError : public Error {
public:
    using Error::Error;
};

/// Parsed and ground-truth groupings do not cover the same line ids.
class CoverageError : public Error {
public:
    using Error::Error;
};

class EmptyStoreError : public Error {
public:
    EmptyStoreError() : Error("vector store is empty") {}
};

/// Embedding provider failed to produce a vector.
class EmbedError : public Error {
public:
    using Error::Error;
};

/// HTTP or canned-fixture transport failure.
class TransportError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace babylon

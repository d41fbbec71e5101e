#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lloom {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Another operation already holds the resource (e.g. a running induction job).
class ConflictError : public Error {
public:
    using Error::Error;
};

/// User-supplied data failed validation (empty criteria, bad predicate, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Session or script stream could not be decoded.
class DecodeError : public Error {
public:
    DecodeError(const std::string& what, std::size_t offset, std::string field)
        : Error(what + " (offset " + std::to_string(offset) + ", field '" + field + "')"),
          offset_(offset), field_(std::move(field)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t offset_;
    std::string field_;
};

class VersionError : public Error {
public:
    using Error::Error;
};

class TemplateError : public Error {
public:
    using Error::Error;
};

/// LLM output could not be parsed as JSON; the raw text is kept for the trace.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Parsed JSON lacked a required key or had the wrong type for one.
class SchemaError : public ParseError {
public:
    SchemaError(std::string key, const std::string& detail, std::string raw)
        : ParseError("schema violation at '" + key + "': " + detail, std::move(raw)),
          key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Network/transport or rate-limit failure. Retryable.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int status = 0) : Error(what), status_(status) {}
    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Provider refused or returned unusable content. Never retried.
class ContentError : public Error {
public:
    ContentError(const std::string& what, std::string raw) : Error(what), raw_(std::move(raw)) {}
    const std::string& raw() const noexcept { return raw_; }

private:
    std::string raw_;
};

/// Scripted backend has no canned response for a prompt.
class ScriptError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class PipelineError : public Error {
public:
    using Error::Error;
};

/// Input dataset unreadable or unusable (missing column, no valid rows).
class DataError : public Error {
public:
    using Error::Error;
};

} // namespace lloom

#pragma once

#include <stdexcept>
#include <string>

namespace judgeopt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input data or configuration: malformed records, duplicate ids,
/// missing files, invalid model specs. Detected before any backend call.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Corpus file could not be parsed; message names the offending line/record.
class LoadError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// A chat-completion backend failed after exhausting its retry budget,
/// or returned an empty completion.
class BackendError : public Error {
public:
    using Error::Error;
};

/// Judge output did not contain a parseable score. Carries the raw judge
/// text so the caller can decide to retry or record the sample as missing.
class ScoreParseError : public Error {
public:
    ScoreParseError(const std::string& what, std::string raw)
        : Error(what), judge_raw(std::move(raw)) {}
    std::string judge_raw;
};

/// A prompt template is missing a required placeholder.
class TemplateError : public Error {
public:
    using Error::Error;
};

/// A prompt edit produced text that could not be repaired into a valid template.
class EditError : public Error {
public:
    using Error::Error;
};

} // namespace judgeopt

// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace autoguide {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration and user-input problems (CLI exit code 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

// File-system and on-disk format problems (CLI exit code 2).
class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public IoError {
public:
    using IoError::IoError;
};

class SchemaVersionMismatch : public FormatError {
public:
    using FormatError::FormatError;
};

// Language-model transport and replay problems (CLI exit code 3).
class BackendError : public Error {
public:
    using Error::Error;
};

class HttpError : public BackendError {
public:
    HttpError(int status, std::string body)
        : BackendError("HTTP " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

class ReplayMiss : public BackendError {
public:
    using BackendError::BackendError;
};

class CassetteMismatch : public BackendError {
public:
    using BackendError::BackendError;
};

class ScriptedNoMatch : public BackendError {
public:
    using BackendError::BackendError;
};

// Trajectory-level errors.
class NoDeviation : public Error {
public:
    using Error::Error;
};

class EmptyTrajectory : public Error {
public:
    using Error::Error;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class InvalidTrajectory : public Error {
public:
    using Error::Error;
};

// Errors raised when the language model returns something unusable.
class EmptyContext : public Error {
public:
    using Error::Error;
};

class EmptyGuideline : public Error {
public:
    using Error::Error;
};

class UnparsableAction : public Error {
public:
    using Error::Error;
};

/// Raised by store construction when no pair produced a guideline.
class ExtractionFailed : public Error {
public:
    using Error::Error;
};

class StepAfterDone : public Error {
public:
    using Error::Error;
};

class TemplateError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

}  // namespace autoguide

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace octoplace {

/// Root of every error the library raises. `kind()` is a short stable tag
/// used by the CLI and the HTTP service to pick exit codes / status codes.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io", what) {}
};

struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error("format", what) {}
};

/// A caller broke a documented precondition.
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error("contract", what) {}
};

/// A model capability could not be reached or refused the request.
class BackendError : public Error {
public:
    BackendError(std::string capability, const std::string& what, std::string subject = {})
        : Error("backend", capability + ": " + what + (subject.empty() ? "" : " [" + subject + "]")),
          capability_(std::move(capability)), subject_(std::move(subject)) {}

    const std::string& capability() const noexcept { return capability_; }
    /// Request item the failure is attributed to (e.g. the noun being verified).
    const std::string& subject() const noexcept { return subject_; }

private:
    std::string capability_;
    std::string subject_;
};

/// The capability answered, but with something that violates its schema.
class ProtocolError : public BackendError {
public:
    ProtocolError(std::string capability, const std::string& what, std::string subject = {})
        : BackendError(std::move(capability), "protocol: " + what, std::move(subject)) {}
};

class FixtureMiss : public BackendError {
public:
    FixtureMiss(std::string capability, std::string digest)
        : BackendError(capability, "no fixture entry for digest " + digest), digest_(std::move(digest)) {}

    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

class SelectionMismatch : public Error {
public:
    explicit SelectionMismatch(std::string raw)
        : Error("selection", "no candidate noun in completion: \"" + raw + "\""), raw_(std::move(raw)) {}

    const std::string& raw_response() const noexcept { return raw_; }

private:
    std::string raw_;
};

struct NoDepthError : Error {
    explicit NoDepthError(const std::string& what) : Error("no_depth", what) {}
};

struct MissError : Error {
    explicit MissError(const std::string& what) : Error("miss", what) {}
};

struct DataError : Error {
    explicit DataError(const std::string& what) : Error("data", what) {}
};

struct ConflictError : Error {
    explicit ConflictError(const std::string& what) : Error("conflict", what) {}
};

struct EmptyComparisonError : Error {
    explicit EmptyComparisonError(const std::string& what) : Error("empty_comparison", what) {}
};

} // namespace octoplace

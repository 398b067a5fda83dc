#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace facruin {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not reach its requested tolerance.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, std::string diagnostic = {})
        : Error(diagnostic.empty() ? what : what + " [" + diagnostic + "]"),
          diagnostic_(std::move(diagnostic)) {}

    const std::string& diagnostic() const noexcept { return diagnostic_; }

private:
    std::string diagnostic_;
};

/// A computation would exceed its size or truncation budget.
class ResourceError : public Error {
public:
    using Error::Error;
};

struct FieldIssue {
    std::string path;
    std::string message;
};

/// One or more configuration fields are invalid.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<FieldIssue> issues)
        : Error(format(issues)), issues_(std::move(issues)) {}

    const std::vector<FieldIssue>& issues() const noexcept { return issues_; }

private:
    static std::string format(const std::vector<FieldIssue>& issues) {
        std::string out = "invalid configuration:";
        for (const auto& issue : issues) out += "\n  " + issue.path + ": " + issue.message;
        return out;
    }

    std::vector<FieldIssue> issues_;
};

}  // namespace facruin

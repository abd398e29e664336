#pragma once

#include <stdexcept>
#include <string>

namespace sheetlight {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied parameter violates its documented range.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// File could not be opened, decoded or written.
class IoError : public Error {
public:
    IoError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Text input could not be parsed; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Projection of a point that lies on or behind the camera plane.
class BehindCamera : public Error {
public:
    using Error::Error;
};

/// Internal consistency check failed. Indicates a bug, not bad input.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Wraps an error raised inside one stage of the per-frame relighting chain.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace sheetlight

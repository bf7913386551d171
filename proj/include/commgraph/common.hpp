#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace commgraph {

/// UTC epoch seconds.
using Timestamp = std::int64_t;

/// Position of a participant in Corpus::participants() (sorted by id).
using ParticipantIndex = std::uint32_t;

/// Position of a message in Corpus::messages() (sorted by timestamp, id).
using MessageIndex = std::uint32_t;

/// One byte per corpus message; nonzero means the message passes.
using MessageMask = std::vector<std::uint8_t>;

using FeatureVector = std::vector<double>;

struct TimeRange {
    Timestamp start = 0;
    Timestamp end = 0;

    bool contains(Timestamp t) const { return t >= start && t <= end; }
    friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

/// Bad invocation: flags, missing arguments (CLI exit code 1).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A referenced participant, message, node or episode does not exist.
class NotFoundError : public Error {
public:
    using Error::Error;
};

/// Text that failed to parse; position is a 0-based byte offset.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at position " + std::to_string(position)), position_(position) {}

    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

/// Invalid level parameters. Names the offending level and field.
class LevelError : public Error {
public:
    LevelError(std::string level, std::string field, const std::string& what)
        : Error("level '" + level + "', field '" + field + "': " + what),
          level_(std::move(level)), field_(std::move(field)) {}

    const std::string& level() const { return level_; }
    const std::string& field() const { return field_; }

private:
    std::string level_;
    std::string field_;
};

} // namespace commgraph

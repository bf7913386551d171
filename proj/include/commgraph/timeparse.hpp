#pragma once

#include "commgraph/common.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace commgraph {

/// Accepts integer epoch seconds (optionally with a fractional part, which
/// is truncated) or ISO-8601 "YYYY-MM-DD[( |T)HH:MM[:SS[.fff]]][Z|+HH:MM|-HH:MM]".
/// Times without an offset are UTC.
std::optional<Timestamp> parseTimestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string formatTimestamp(Timestamp t);

Timestamp makeTimestamp(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0);

} // namespace commgraph

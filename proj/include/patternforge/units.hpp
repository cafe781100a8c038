#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace patternforge {

// Canonical internal units are seconds and hertz. These helpers parse the
// suffixed forms accepted on the command line and in config files
// ("1ms", "0.5 us", "100kHz", ...); a bare number is taken as the base unit.

/// Parse a duration string into seconds. Recognized suffixes:
/// s, ms, us, µs, ns. Returns nullopt on any syntax error.
std::optional<double> parse_duration(std::string_view text);

/// Parse a frequency string into hertz. Recognized suffixes:
/// Hz, kHz, MHz, GHz (case-insensitive except the unit letter H).
std::optional<double> parse_frequency(std::string_view text);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

} // namespace patternforge

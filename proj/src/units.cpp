#include "patternforge/units.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <span>
#include <string>

namespace patternforge {

namespace {

struct unit_scale {
    std::string_view suffix;
    double scale;
};

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

// Splits "<number><ws><suffix>"; the number part is everything strtod consumes.
std::optional<double> parse_with_units(std::string_view text,
                                       std::span<const unit_scale> units) {
    text = strip(text);
    if (text.empty())
        return std::nullopt;
    std::string buf(text);
    char *end = nullptr;
    double value = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str())
        return std::nullopt;
    std::string_view rest = strip(std::string_view(end));
    if (rest.empty())
        return value;
    for (const auto &u : units) {
        if (rest == u.suffix)
            return value * u.scale;
    }
    return std::nullopt;
}

} // namespace

std::optional<double> parse_duration(std::string_view text) {
    static constexpr std::array<unit_scale, 6> units{{
        {"s", 1.0},
        {"ms", 1e-3},
        {"us", 1e-6},
        {"µs", 1e-6}, // micro sign
        {"μs", 1e-6}, // greek mu
        {"ns", 1e-9},
    }};
    return parse_with_units(text, units);
}

std::optional<double> parse_frequency(std::string_view text) {
    static constexpr std::array<unit_scale, 8> units{{
        {"Hz", 1.0},
        {"hz", 1.0},
        {"kHz", 1e3},
        {"khz", 1e3},
        {"MHz", 1e6},
        {"mhz", 1e6},
        {"GHz", 1e9},
        {"ghz", 1e9},
    }};
    return parse_with_units(text, units);
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), ptr);
}

} // namespace patternforge

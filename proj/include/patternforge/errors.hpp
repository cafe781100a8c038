#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace patternforge {

/// Machine-checkable failure reasons. Each violated constraint gets its own
/// value so callers (and the CLI exit-code mapping) can tell them apart.
enum class errc {
    invalid_config,       // a SamplingConfig invariant does not hold
    infeasible_count,     // requested point count below 1
    infeasible_spacing,   // minimum spacing exceeds maximum spacing
    infeasible_room,      // grid too small for the requested points at minimum spacing
    invalid_pattern,      // indices not strictly increasing or out of grid range
    grid_mismatch,        // pattern/accumulator built for a different grid
    empty_accumulator,    // finalize called before any pattern was accumulated
    malformed_file,       // unparseable text input
    rom_bad_magic,        // binary image does not start with the expected magic
    rom_bad_header,       // header fields inconsistent or unsupported version
    rom_truncated,        // payload shorter than width * count
    rom_non_monotonic,    // decoded indices not strictly increasing
    rom_out_of_range,     // decoded index outside [1, k_grid]
    rom_unencodable,      // index does not fit the fixed point width
    io_error,             // filesystem failure
};

std::string_view errc_name(errc c);

class error : public std::runtime_error {
  public:
    error(errc code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] errc code() const noexcept { return code_; }

  private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string &message) {
    throw error(code, message);
}

} // namespace patternforge

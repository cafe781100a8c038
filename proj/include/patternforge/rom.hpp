#pragma once

#include "patternforge/core.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace patternforge {

/// Bit-exact binary image of one pattern: 16-byte header (magic "CRSP",
/// format version, index width, grid size, point count, all big-endian)
/// followed by the points as fixed-width big-endian indices.
struct RomImage {
    std::vector<std::uint8_t> bytes;

    [[nodiscard]] std::size_t size() const noexcept { return bytes.size(); }
};

inline constexpr std::size_t rom_header_size = 16;
inline constexpr std::uint16_t rom_format_version = 1;

/// Bytes per stored index for a given grid size: ceil(log2(k_grid) / 8),
/// never less than one byte.
unsigned rom_index_width(grid_index k_grid);

/// Payload bytes needed to store k_s points on a k_grid-sized grid
/// (excludes the header).
std::uint64_t memory_footprint(std::uint64_t k_s, grid_index k_grid);

RomImage encode_rom(const Pattern &p);

/// Inverse of encode_rom. The header does not carry the grid period, so the
/// caller supplies it (defaults to one second).
Pattern decode_rom(const RomImage &img, double t_grid = 1.0);

/// Trigger timing of the reference driver: a grid counter advances once
/// every clock_div input clock cycles and fires when it reaches the current
/// pattern index.
struct TriggerTrace {
    std::uint64_t clock_div = 8;
    std::uint64_t total_clocks = 0;
    std::vector<std::uint64_t> events; // input-clock cycle of each trigger
};

TriggerTrace simulate_driver(const Pattern &p, std::uint64_t clock_div = 8);
TriggerTrace simulate_driver(const RomImage &img, std::uint64_t clock_div = 8,
                             double t_grid = 1.0);

/// Single-image file I/O (.crsp).
void write_rom_file(const std::filesystem::path &path, const RomImage &img);
RomImage read_rom_file(const std::filesystem::path &path);

/// Multi-pattern archive: each record is a 32-bit big-endian byte length
/// followed by one image.
void write_rom_archive(const std::filesystem::path &path,
                       const std::vector<RomImage> &images);
std::vector<RomImage> read_rom_archive(const std::filesystem::path &path);

/// Reads either a single image or an archive, sniffing the leading magic.
std::vector<RomImage> read_rom_any(const std::filesystem::path &path);

} // namespace patternforge

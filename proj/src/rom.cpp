#include "patternforge/rom.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>

namespace patternforge {

namespace {

constexpr std::array<std::uint8_t, 4> rom_magic = {'C', 'R', 'S', 'P'};

void put_be(std::vector<std::uint8_t> &out, std::uint64_t value,
            unsigned width) {
    for (unsigned i = 0; i < width; ++i)
        out.push_back(
            static_cast<std::uint8_t>(value >> (8 * (width - 1 - i))));
}

std::uint64_t get_be(const std::uint8_t *p, unsigned width) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < width; ++i)
        v = (v << 8) | p[i];
    return v;
}

} // namespace

unsigned rom_index_width(grid_index k_grid) {
    if (k_grid < 1)
        fail(errc::invalid_config, "grid size must be positive");
    unsigned width = 1;
    grid_index cap = 256;
    while (cap < k_grid && width < 8) {
        cap *= 256;
        ++width;
    }
    return width;
}

std::uint64_t memory_footprint(std::uint64_t k_s, grid_index k_grid) {
    return k_s * rom_index_width(k_grid);
}

RomImage encode_rom(const Pattern &p) {
    const grid_index k_grid = p.k_grid();
    if (k_grid > 0xFFFFFFFFll)
        fail(errc::rom_unencodable,
             "grid size does not fit the 32-bit header field");
    if (p.size() > 0xFFFFFFFFull)
        fail(errc::rom_unencodable,
             "point count does not fit the 32-bit header field");
    const unsigned width = rom_index_width(k_grid);
    const grid_index max_encodable =
        width >= 8 ? k_max_unbounded
                   : (grid_index{1} << (8 * width)) - 1;
    RomImage img;
    img.bytes.reserve(rom_header_size + width * p.size());
    for (const std::uint8_t c : rom_magic)
        img.bytes.push_back(c);
    put_be(img.bytes, rom_format_version, 2);
    put_be(img.bytes, width, 2);
    put_be(img.bytes, static_cast<std::uint64_t>(k_grid), 4);
    put_be(img.bytes, p.size(), 4);
    for (grid_index idx : p.indices()) {
        if (idx > max_encodable)
            fail(errc::rom_unencodable,
                 "index " + std::to_string(idx) + " does not fit in " +
                     std::to_string(width) + " byte(s)");
        put_be(img.bytes, static_cast<std::uint64_t>(idx), width);
    }
    return img;
}

Pattern decode_rom(const RomImage &img, double t_grid) {
    const auto &b = img.bytes;
    if (b.size() < rom_header_size)
        fail(errc::rom_truncated, "image shorter than the 16-byte header");
    if (!std::equal(rom_magic.begin(), rom_magic.end(), b.begin()))
        fail(errc::rom_bad_magic, "missing CRSP magic");
    const auto version = get_be(b.data() + 4, 2);
    const auto width = static_cast<unsigned>(get_be(b.data() + 6, 2));
    const auto k_grid = static_cast<grid_index>(get_be(b.data() + 8, 4));
    const auto count = get_be(b.data() + 12, 4);
    if (version != rom_format_version)
        fail(errc::rom_bad_header,
             "unsupported format version " + std::to_string(version));
    if (width < 1 || width > 8)
        fail(errc::rom_bad_header,
             "index width " + std::to_string(width) + " out of range");
    if (k_grid < 1)
        fail(errc::rom_bad_header, "grid size must be positive");
    if (width != rom_index_width(k_grid))
        fail(errc::rom_bad_header,
             "index width does not match the grid size");
    const std::uint64_t payload = count * width;
    if (b.size() < rom_header_size + payload)
        fail(errc::rom_truncated, "payload shorter than the header promises");
    if (b.size() > rom_header_size + payload)
        fail(errc::rom_bad_header, "payload longer than the header promises");

    std::vector<grid_index> indices;
    indices.reserve(count);
    grid_index prev = 0;
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto idx = static_cast<grid_index>(
            get_be(b.data() + rom_header_size + i * width, width));
        if (idx < 1 || idx > k_grid)
            fail(errc::rom_out_of_range,
                 "index " + std::to_string(idx) + " outside [1, " +
                     std::to_string(k_grid) + "]");
        if (idx <= prev)
            fail(errc::rom_non_monotonic, "non-monotonic index sequence");
        prev = idx;
        indices.push_back(idx);
    }
    return Pattern::from_indices(std::move(indices), k_grid, t_grid);
}

TriggerTrace simulate_driver(const Pattern &p, std::uint64_t clock_div) {
    if (clock_div < 1)
        fail(errc::invalid_config, "clock divider must be at least 1");
    TriggerTrace trace;
    trace.clock_div = clock_div;
    trace.events.reserve(p.size());
    const auto indices = p.indices();
    std::size_t next = 0;
    std::uint64_t clock = 0;
    for (grid_index slot = 1; slot <= p.k_grid(); ++slot) {
        clock += clock_div; // the counter advances after clock_div cycles
        if (next < indices.size() && indices[next] == slot) {
            trace.events.push_back(clock);
            ++next;
        }
    }
    trace.total_clocks = clock;
    return trace;
}

TriggerTrace simulate_driver(const RomImage &img, std::uint64_t clock_div,
                             double t_grid) {
    return simulate_driver(decode_rom(img, t_grid), clock_div);
}

void write_rom_file(const std::filesystem::path &path, const RomImage &img) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io_error, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(img.bytes.data()),
              static_cast<std::streamsize>(img.bytes.size()));
    if (!out)
        fail(errc::io_error, "short write to " + path.string());
}

namespace {

std::vector<std::uint8_t> read_all_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io_error, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes(
        (std::istreambuf_iterator<char>(in)),
        std::istreambuf_iterator<char>());
    return bytes;
}

bool has_magic(const std::vector<std::uint8_t> &bytes) {
    return bytes.size() >= 4 &&
           std::equal(rom_magic.begin(), rom_magic.end(), bytes.begin());
}

std::vector<RomImage> split_archive(std::vector<std::uint8_t> bytes) {
    std::vector<RomImage> images;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4)
            fail(errc::rom_truncated, "archive record length cut short");
        const auto len = get_be(bytes.data() + pos, 4);
        pos += 4;
        if (bytes.size() - pos < len)
            fail(errc::rom_truncated, "archive record body cut short");
        RomImage img;
        img.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() +
                             static_cast<std::ptrdiff_t>(pos + len));
        if (!has_magic(img.bytes))
            fail(errc::rom_bad_magic, "archive record is not a CRSP image");
        images.push_back(std::move(img));
        pos += len;
    }
    return images;
}

} // namespace

RomImage read_rom_file(const std::filesystem::path &path) {
    RomImage img;
    img.bytes = read_all_bytes(path);
    if (!has_magic(img.bytes))
        fail(errc::rom_bad_magic, path.string() + " is not a CRSP image");
    return img;
}

void write_rom_archive(const std::filesystem::path &path,
                       const std::vector<RomImage> &images) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        fail(errc::io_error, "cannot open " + path.string() + " for writing");
    for (const auto &img : images) {
        if (img.bytes.size() > 0xFFFFFFFFull)
            fail(errc::rom_unencodable, "archive record larger than 4 GiB");
        std::vector<std::uint8_t> prefix;
        put_be(prefix, img.bytes.size(), 4);
        out.write(reinterpret_cast<const char *>(prefix.data()), 4);
        out.write(reinterpret_cast<const char *>(img.bytes.data()),
                  static_cast<std::streamsize>(img.bytes.size()));
    }
    if (!out)
        fail(errc::io_error, "short write to " + path.string());
}

std::vector<RomImage> read_rom_archive(const std::filesystem::path &path) {
    return split_archive(read_all_bytes(path));
}

std::vector<RomImage> read_rom_any(const std::filesystem::path &path) {
    auto bytes = read_all_bytes(path);
    if (has_magic(bytes)) {
        RomImage img;
        img.bytes = std::move(bytes);
        return {std::move(img)};
    }
    return split_archive(std::move(bytes));
}

} // namespace patternforge

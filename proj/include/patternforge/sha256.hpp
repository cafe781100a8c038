#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace patternforge {

/// Streaming SHA-256 (FIPS 180-4); used for output digests in run
/// manifests, so runs can be compared without keeping the files around.
class Sha256 {
  public:
    Sha256() { reset(); }

    void reset();
    void update(std::span<const std::uint8_t> data);
    void update(std::string_view text);

    /// Finishes the digest; the object must be reset before reuse.
    std::array<std::uint8_t, 32> digest();

    /// Digest as lowercase hex.
    std::string hex_digest();

  private:
    void compress(const std::uint8_t *block);

    std::uint32_t state_[8];
    std::uint64_t length_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
};

std::string sha256_hex(std::string_view text);
std::string sha256_file_hex(const std::filesystem::path &path);

} // namespace patternforge

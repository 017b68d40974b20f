#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace pef::detail {

/// Decoded netpbm image, 8-bit samples, 1 (graymap) or 3 (pixmap) channels.
struct PnmImage {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> samples;
};

/// Accepts P2/P3/P5/P6 with max value 255. `channels` selects graymap (1) or pixmap (3).
PnmImage read_pnm(const std::filesystem::path& path, int channels);
void write_pnm(const std::filesystem::path& path, const PnmImage& image, bool ascii);

} // namespace pef::detail

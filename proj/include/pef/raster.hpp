#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pef {

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB image.
struct RgbRaster {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;

    const Rgb& at(int col, int row) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
    Rgb& at(int col, int row) { return pixels[static_cast<std::size_t>(row) * width + col]; }

    void validate() const;

    friend bool operator==(const RgbRaster&, const RgbRaster&) = default;
};

/// Label matrix of region-type ids over the map, with its metric scale.
///
/// Labels are row-major; cell (col, row) covers
/// [col * meters_per_pixel, (col + 1) * meters_per_pixel) along x and likewise along y.
struct RegionGrid {
    int width = 0;
    int height = 0;
    double meters_per_pixel = 0.0;
    int type_count = 0;
    std::vector<std::uint8_t> labels;
    std::vector<std::string> type_names;   // empty or type_count entries
    std::vector<Rgb> type_colors;          // empty or type_count entries

    int label(int col, int row) const { return labels[static_cast<std::size_t>(row) * width + col]; }
    double width_m() const { return width * meters_per_pixel; }
    double height_m() const { return height * meters_per_pixel; }

    /// Throws DataError on any broken invariant.
    void validate() const;

    friend bool operator==(const RegionGrid&, const RegionGrid&) = default;
};

inline constexpr int kMaxRegionTypes = 256;

RgbRaster load_raster(const std::filesystem::path& path);

/// Writes binary (P6) unless `ascii` is set (P3).
void save_raster(const RgbRaster& raster, const std::filesystem::path& path, bool ascii = false);

double luminance(const Rgb& c);

struct KMeansOptions {
    int max_iterations = 300;
};

/// Per-run diagnostics of the clustering.
struct KMeansTrace {
    std::vector<double> objective;  // after every assignment step
    int iterations = 0;
    bool converged = false;
};

/// k-means over RGB values with k-means++ seeding. Labels are canonicalized
/// by ascending centroid luminance.
RegionGrid classify_regions(const RgbRaster& raster, int k, std::uint64_t seed, double meters_per_pixel,
                            const KMeansOptions& options = {}, KMeansTrace* trace = nullptr);

/// Folds region type `from` into `to` for every pair, then renumbers the
/// surviving types densely in their original order.
RegionGrid merge_region_types(const RegionGrid& grid, const std::map<int, int>& merges);

/// Label graymap plus "<path>.meta" key:value sidecar.
void save_region_grid(const RegionGrid& grid, const std::filesystem::path& path, bool ascii = false);
RegionGrid load_region_grid(const std::filesystem::path& path);

std::filesystem::path sidecar_path(const std::filesystem::path& grid_path);

} // namespace pef

#pragma once

#include "pef/geometry.hpp"
#include "pef/pathtrace.hpp"
#include "pef/raster.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

namespace pef {

/// Multi-exponent model parameters: intercept C (dB), one exponent per
/// region type, shadow-fading deviation sigma (dB).
struct PefParams {
    double intercept_c = 0.0;
    std::vector<double> exponents;
    double sigma = 0.0;

    int type_count() const { return static_cast<int>(exponents.size()); }
    void validate() const;
};

/// Single-exponent log-distance model.
struct LogDistParams {
    double intercept_c = 0.0;
    double n = 2.0;
    double sigma = 0.0;
    double d0 = 1.0;

    void validate() const;
};

/// C + sum_i D_i * n_i.
double predict_mean(const CoefficientVector& coeffs, const PefParams& params);

/// Mean path loss along the traced Tx-Rx line (no shadow fading).
double predict_pef(const RegionGrid& grid, Point tx, Point rx, double d0, const PefParams& params);

/// C + 10 n log10(d / d0), defined for d >= d0.
double predict_logdist(double d, const LogDistParams& params);

/// mean + N(0, sigma^2). The engine overload draws from a caller-owned stream.
double sample_shadowed(double mean, double sigma, std::uint64_t seed);
double sample_shadowed(double mean, double sigma, std::mt19937_64& rng);

/// Row-major mean path-loss map sampled every `stride` cells.
struct Heatmap {
    int rows = 0;
    int cols = 0;
    int stride = 1;
    std::vector<double> values;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row) * cols + col]; }

    /// Map position the value at (row, col) was evaluated at.
    Point sample_point(const RegionGrid& grid, int row, int col) const;
};

/// Cells whose centre lies within d0 of tx hold the intercept C.
Heatmap heatmap(const RegionGrid& grid, Point tx, double d0, const PefParams& params, int stride = 1);

std::string heatmap_csv(const Heatmap& map);

/// Min-max normalized 8-bit graymap rendering.
void save_heatmap_pgm(const Heatmap& map, const std::filesystem::path& path);

} // namespace pef

#pragma once

#include "pef/inference.hpp"
#include "pef/propagation.hpp"
#include "pef/raster.hpp"

#include <random>
#include <string>
#include <vector>

namespace pef::fixture {

inline RegionGrid uniform_grid(int width, int height, double mpp, int types = 1, int label = 0)
{
    RegionGrid g;
    g.width = width;
    g.height = height;
    g.meters_per_pixel = mpp;
    g.type_count = types;
    g.labels.assign(static_cast<std::size_t>(width) * height, static_cast<std::uint8_t>(label));
    return g;
}

/// Patchwork map: each cell takes the type of its nearest random site.
/// Sites cycle through the types so every type is present.
inline RegionGrid voronoi_grid(int width, int height, double mpp, int types, int sites, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, width);
    std::uniform_real_distribution<double> uy(0.0, height);
    struct Site {
        double x, y;
        int type;
    };
    std::vector<Site> ss;
    for (int s = 0; s < sites; ++s) {
        ss.push_back({ux(rng), uy(rng), s % types});
    }
    RegionGrid g = uniform_grid(width, height, mpp, types);
    for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
            double best = 1e300;
            int type = 0;
            for (const auto& s : ss) {
                const double dx = c + 0.5 - s.x;
                const double dy = r + 0.5 - s.y;
                const double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    type = s.type;
                }
            }
            g.labels[static_cast<std::size_t>(r) * width + c] = static_cast<std::uint8_t>(type);
        }
    }
    return g;
}

/// Random labels, independent per cell.
inline RegionGrid noise_grid(int width, int height, double mpp, int types, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, types - 1);
    RegionGrid g = uniform_grid(width, height, mpp, types);
    for (auto& l : g.labels) {
        l = static_cast<std::uint8_t>(pick(rng));
    }
    return g;
}

/// Fitted values reported for the five-region suburban map
/// (Building, Open Space, Lane, Wooded Area, Lake).
inline PefParams reference_params() { return {74.95, {1.12, 1.74, 2.38, 4.39, 1.08}, 6.80}; }

inline std::vector<std::string> reference_names()
{
    return {"Building", "Open Space", "Lane", "Wooded Area", "Lake"};
}

/// Ground-truth palette for the five classes.
inline std::vector<Rgb> reference_palette()
{
    return {{170, 218, 255}, {255, 255, 255}, {255, 235, 59}, {76, 175, 80}, {244, 143, 177}};
}

/// ~1.5 km square five-type patchwork with the transmitter at the centre.
struct Scenario {
    RegionGrid grid;
    Point tx;
    PefParams params;
    double d0 = 1.0;
    double truncation = 140.0;
};

inline Scenario reference_scenario(std::uint64_t seed = 2024)
{
    Scenario s;
    s.grid = voronoi_grid(400, 400, 3.75, 5, 240, seed);
    s.grid.type_names = reference_names();
    s.tx = {750.3, 749.1};
    s.params = reference_params();
    return s;
}

inline RgbRaster paint(const RegionGrid& grid, const std::vector<Rgb>& palette)
{
    RgbRaster r;
    r.width = grid.width;
    r.height = grid.height;
    for (auto l : grid.labels) {
        r.pixels.push_back(palette[l]);
    }
    return r;
}

/// Log-distance observations with distances log-uniform in [10 m, 10 km]
/// (d0 = 1 m). Draws at or above `truncation` are rejected until K are kept.
inline std::vector<DistanceSample> logdist_samples(double c, double n, double sigma, std::size_t K,
                                                   double truncation, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logd(1.0, 4.0);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<DistanceSample> out;
    out.reserve(K);
    while (out.size() < K) {
        const double x = logd(rng);
        const double l = c + 10.0 * n * x + noise(rng);
        if (l < truncation) {
            out.push_back({std::pow(10.0, x), l});
        }
    }
    return out;
}

/// Design rows with random per-type coefficients summing to 10 log10(d),
/// observations drawn from the PEF mean plus noise, truncated at L.
inline DesignMatrix random_design(const PefParams& truth, std::size_t K, double truncation, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> logd(0.5, 3.2);
    std::uniform_real_distribution<double> share(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, truth.sigma);
    const auto I = static_cast<std::size_t>(truth.type_count());
    DesignMatrix design(truth.type_count(), truncation);
    std::vector<double> d(I);
    while (design.size() < K) {
        const double total = 10.0 * logd(rng);
        double norm = 0.0;
        for (auto& v : d) {
            v = share(rng);
            v = v * v * v;
            norm += v;
        }
        double mu = truth.intercept_c;
        for (std::size_t i = 0; i < I; ++i) {
            d[i] *= total / norm;
            mu += d[i] * truth.exponents[i];
        }
        const double l = mu + noise(rng);
        if (l < truncation) {
            design.add_row(d, l);
        }
    }
    return design;
}

} // namespace pef::fixture

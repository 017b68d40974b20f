#include "pef/propagation.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"
#include "pnm.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace pef {

void PefParams::validate() const
{
    if (exponents.empty()) {
        throw DataError("parameters need at least one exponent");
    }
    if (!std::isfinite(intercept_c) || !std::isfinite(sigma)) {
        throw DataError("parameters must be finite");
    }
    for (double n : exponents) {
        if (!std::isfinite(n)) {
            throw DataError("parameters must be finite");
        }
    }
    if (sigma < 0.0) {
        throw DataError("sigma must be non-negative");
    }
}

void LogDistParams::validate() const
{
    if (!std::isfinite(intercept_c) || !std::isfinite(n) || !std::isfinite(sigma) || !std::isfinite(d0)) {
        throw DataError("log-distance parameters must be finite");
    }
    if (sigma < 0.0) {
        throw DataError("sigma must be non-negative");
    }
    if (!(d0 > 0.0)) {
        throw DataError("d0 must be positive");
    }
}

double predict_mean(const CoefficientVector& coeffs, const PefParams& params)
{
    if (coeffs.coeffs.size() != params.exponents.size()) {
        throw DataError("coefficient vector has " + std::to_string(coeffs.coeffs.size()) +
                        " region types but parameters have " + std::to_string(params.exponents.size()));
    }
    double mean = params.intercept_c;
    for (std::size_t i = 0; i < coeffs.coeffs.size(); ++i) {
        mean += coeffs.coeffs[i] * params.exponents[i];
    }
    return mean;
}

double predict_pef(const RegionGrid& grid, Point tx, Point rx, double d0, const PefParams& params)
{
    if (params.type_count() != grid.type_count) {
        throw DataError("grid has " + std::to_string(grid.type_count) + " region types but parameters have " +
                        std::to_string(params.type_count()));
    }
    return predict_mean(like_term_coefficients(trace_path(grid, tx, rx, d0), grid.type_count), params);
}

double predict_logdist(double d, const LogDistParams& params)
{
    if (!(d >= params.d0)) {
        throw DataError("distance " + text::round_trip(d) + " m is below d0 = " + text::round_trip(params.d0) + " m");
    }
    return params.intercept_c + 10.0 * params.n * std::log10(d / params.d0);
}

double sample_shadowed(double mean, double sigma, std::mt19937_64& rng)
{
    if (!(sigma >= 0.0)) {
        throw DataError("sigma must be non-negative");
    }
    if (sigma == 0.0) {
        return mean;
    }
    std::normal_distribution<double> noise(0.0, sigma);
    return mean + noise(rng);
}

double sample_shadowed(double mean, double sigma, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return sample_shadowed(mean, sigma, rng);
}

Point Heatmap::sample_point(const RegionGrid& grid, int row, int col) const
{
    const double mpp = grid.meters_per_pixel;
    return {(col * stride + 0.5) * mpp, (row * stride + 0.5) * mpp};
}

Heatmap heatmap(const RegionGrid& grid, Point tx, double d0, const PefParams& params, int stride)
{
    grid.validate();
    params.validate();
    if (stride < 1) {
        throw DataError("stride must be at least 1");
    }
    if (!contains(grid, tx)) {
        throw DataError("tx lies outside the grid");
    }
    if (params.type_count() != grid.type_count) {
        throw DataError("grid and parameters disagree on the region type count");
    }
    Heatmap map;
    map.stride = stride;
    map.rows = (grid.height + stride - 1) / stride;
    map.cols = (grid.width + stride - 1) / stride;
    map.values.resize(static_cast<std::size_t>(map.rows) * map.cols);

    auto fill_rows = [&](int first, int step) {
        for (int r = first; r < map.rows; r += step) {
            for (int c = 0; c < map.cols; ++c) {
                const Point rx = map.sample_point(grid, r, c);
                auto& out = map.values[static_cast<std::size_t>(r) * map.cols + c];
                out = distance(tx, rx) <= d0 ? params.intercept_c : predict_pef(grid, tx, rx, d0, params);
            }
        }
    };
    // Rows are independent; each value is computed identically whichever thread owns it.
    const int workers = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 16u));
    if (workers == 1 || map.rows < 2) {
        fill_rows(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(fill_rows, w, workers);
        }
    }
    return map;
}

std::string heatmap_csv(const Heatmap& map)
{
    std::string out;
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            out += (c ? "," : "") + text::fixed(map.at(r, c));
        }
        out += '\n';
    }
    return out;
}

void save_heatmap_pgm(const Heatmap& map, const std::filesystem::path& path)
{
    if (map.values.empty()) {
        throw DataError("empty heatmap");
    }
    const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
    const double span = *hi - *lo;
    detail::PnmImage img{map.cols, map.rows, 1, {}};
    img.samples.reserve(map.values.size());
    for (double v : map.values) {
        const double unit = span > 0.0 ? (v - *lo) / span : 0.0;
        img.samples.push_back(static_cast<std::uint8_t>(std::lround(unit * 255.0)));
    }
    detail::write_pnm(path, img, false);
}

} // namespace pef

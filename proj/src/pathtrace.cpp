#include "pef/pathtrace.hpp"

#include "pef/error.hpp"
#include "pef/text.hpp"

#include <algorithm>
#include <cmath>

namespace pef {

bool contains(const RegionGrid& grid, Point p)
{
    return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 && p.y >= 0.0 && p.x < grid.width_m() &&
           p.y < grid.height_m();
}

namespace {

void require_inside(const RegionGrid& grid, Point p, const char* what)
{
    if (!contains(grid, p)) {
        throw DataError(std::string(what) + " (" + text::round_trip(p.x) + "," + text::round_trip(p.y) +
                        ") lies outside the grid [0," + text::round_trip(grid.width_m()) + ")x[0," +
                        text::round_trip(grid.height_m()) + ")");
    }
}

int cell_index(double coord_m, double mpp, int extent)
{
    return std::clamp(static_cast<int>(std::floor(coord_m / mpp)), 0, extent - 1);
}

// Line parameters in (0, 1) where the coordinate crosses a multiple of mpp, ascending.
std::vector<double> grid_crossings(double from, double to, double mpp)
{
    std::vector<double> ts;
    if (from == to) {
        return ts;
    }
    const double lo = std::min(from, to) / mpp;
    const double hi = std::max(from, to) / mpp;
    const auto first = static_cast<long long>(std::floor(lo)) + 1;
    const auto last = static_cast<long long>(std::ceil(hi)) - 1;
    for (long long k = first; k <= last; ++k) {
        ts.push_back((static_cast<double>(k) * mpp - from) / (to - from));
    }
    if (to < from) {
        std::reverse(ts.begin(), ts.end());
    }
    return ts;
}

} // namespace

int region_at(const RegionGrid& grid, Point p)
{
    require_inside(grid, p, "point");
    return grid.label(cell_index(p.x, grid.meters_per_pixel, grid.width),
                      cell_index(p.y, grid.meters_per_pixel, grid.height));
}

std::vector<CellCrossing> trace_cells(const RegionGrid& grid, Point a, Point b)
{
    const double length = distance(a, b);
    const double mpp = grid.meters_per_pixel;
    auto tx = grid_crossings(a.x, b.x, mpp);
    auto ty = grid_crossings(a.y, b.y, mpp);

    // Breakpoints in t; a corner crossing shows up twice and yields an empty interval.
    std::vector<double> ts;
    ts.reserve(tx.size() + ty.size() + 2);
    ts.push_back(0.0);
    std::merge(tx.begin(), tx.end(), ty.begin(), ty.end(), std::back_inserter(ts));
    ts.push_back(1.0);

    std::vector<CellCrossing> cells;
    cells.reserve(ts.size());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double t0 = ts[i];
        const double t1 = ts[i + 1];
        if (!(t1 > t0)) {
            continue;
        }
        const double tm = 0.5 * (t0 + t1);
        const int col = cell_index(a.x + tm * (b.x - a.x), mpp, grid.width);
        const int row = cell_index(a.y + tm * (b.y - a.y), mpp, grid.height);
        const double piece = (t1 - t0) * length;
        if (!cells.empty() && cells.back().col == col && cells.back().row == row) {
            cells.back().length += piece;
        } else {
            cells.push_back({col, row, piece});
        }
    }
    return cells;
}

PathMatrix trace_path(const RegionGrid& grid, Point tx, Point rx, double d0)
{
    require_inside(grid, tx, "tx");
    require_inside(grid, rx, "rx");
    if (tx == rx) {
        throw DataError("tx and rx coincide");
    }
    if (!(d0 > 0.0)) {
        throw DataError("close-in distance d0 must be positive");
    }
    const double total = distance(tx, rx);
    if (!(d0 < total)) {
        throw DataError("rx lies within the close-in distance d0 = " + text::round_trip(d0) +
                        " m of tx (distance " + text::round_trip(total) + " m); need d0 < |tx-rx|");
    }

    PathMatrix path;
    path.d0 = d0;
    path.total_distance = total;
    path.tx_type = region_at(grid, tx);

    // Walk the cells, tracking the cumulative distance from tx, and keep only
    // what lies beyond d0. Segment lengths are differences of cumulative
    // positions so they telescope back to total - d0.
    double cell_start = 0.0;
    double segment_start = d0;
    int current = -1;
    const auto cells = trace_cells(grid, tx, rx);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto& cell = cells[i];
        const double cell_end = (i + 1 == cells.size()) ? total : cell_start + cell.length;
        const double start = cell_start;
        cell_start = cell_end;
        if (cell_end <= d0) {
            continue;
        }
        const int type = grid.label(cell.col, cell.row);
        if (type == current) {
            continue;
        }
        if (current >= 0) {
            const double boundary = std::max(start, d0);
            path.segments.push_back({current, boundary - segment_start});
            segment_start = boundary;
        }
        current = type;
    }
    path.segments.push_back({current, total - segment_start});
    return path;
}

CoefficientVector like_term_coefficients(const PathMatrix& path, int type_count)
{
    if (!(path.d0 > 0.0)) {
        throw DataError("close-in distance d0 must be positive");
    }
    if (type_count < 1) {
        throw DataError("type count must be positive");
    }
    CoefficientVector out;
    out.coeffs.assign(static_cast<std::size_t>(type_count), 0.0);
    out.d0 = path.d0;
    out.total_distance = path.total_distance;
    double cumulative = path.d0;
    for (const auto& seg : path.segments) {
        if (seg.type_id < 0 || seg.type_id >= type_count) {
            throw DataError("segment type " + std::to_string(seg.type_id) + " outside 0.." +
                            std::to_string(type_count - 1));
        }
        const double next = cumulative + seg.length;
        out.coeffs[static_cast<std::size_t>(seg.type_id)] += 10.0 * std::log10(next / cumulative);
        cumulative = next;
    }
    return out;
}

} // namespace pef

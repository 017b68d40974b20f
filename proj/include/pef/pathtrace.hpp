#pragma once

#include "pef/geometry.hpp"
#include "pef/raster.hpp"

#include <vector>

namespace pef {

/// Portion of the Tx-Rx line inside one grid cell.
struct CellCrossing {
    int col = 0;
    int row = 0;
    double length = 0.0;  // meters
};

/// One maximal same-type run along the line, beyond the close-in distance.
struct PathSegment {
    int type_id = 0;
    double length = 0.0;  // meters

    friend bool operator==(const PathSegment&, const PathSegment&) = default;
};

/// Regions crossed by the Tx-Rx line, in order from the transmitter.
struct PathMatrix {
    double d0 = 0.0;
    int tx_type = 0;
    std::vector<PathSegment> segments;
    double total_distance = 0.0;
};

/// Per-type weights D_i multiplying the exponents n_i in the mean path loss.
struct CoefficientVector {
    std::vector<double> coeffs;
    double total_distance = 0.0;
    double d0 = 0.0;

    std::size_t type_count() const { return coeffs.size(); }
};

/// Every cell the segment a -> b passes through with a positive crossing
/// length, in traversal order. Lengths sum to |b - a|.
std::vector<CellCrossing> trace_cells(const RegionGrid& grid, Point a, Point b);

/// Throws DataError when tx == rx, either point is off the grid, or
/// d0 is not strictly between 0 and |tx - rx|.
PathMatrix trace_path(const RegionGrid& grid, Point tx, Point rx, double d0);

CoefficientVector like_term_coefficients(const PathMatrix& path, int type_count);

/// Label under a point; points on a cell edge belong to the higher-index cell.
int region_at(const RegionGrid& grid, Point p);

bool contains(const RegionGrid& grid, Point p);

} // namespace pef

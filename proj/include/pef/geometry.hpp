#pragma once

#include <cmath>

namespace pef {

/// Position in map meters. x grows with columns, y grows with rows.
struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

} // namespace pef

#pragma once

#include <cmath>
#include <vector>

namespace fundus {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

using PointSet = std::vector<Point>;

inline double distance(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

} // namespace fundus

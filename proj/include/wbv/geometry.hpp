#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

namespace wbv::geometry {

using Point = std::complex<double>;

inline double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Proper or touching intersection of closed segments [p1,p2] and [q1,q2].
inline bool segments_intersect(Point p1, Point p2, Point q1, Point q2) {
    const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
    const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    auto on_segment = [](Point a, Point b, Point c) {
        return std::min(a.real(), b.real()) <= c.real() && c.real() <= std::max(a.real(), b.real()) &&
               std::min(a.imag(), b.imag()) <= c.imag() && c.imag() <= std::max(a.imag(), b.imag());
    };
    if (d1 == 0 && on_segment(p1, p2, q1)) return true;
    if (d2 == 0 && on_segment(p1, p2, q2)) return true;
    if (d3 == 0 && on_segment(q1, q2, p1)) return true;
    if (d4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

// Segment-pair sweep over an open polyline; adjacent segments share a vertex and are skipped.
inline bool polyline_self_intersects(const std::vector<Point>& pts) {
    const std::size_t n = pts.size();
    if (n < 4) return false;
    struct Box {
        double x0, x1, y0, y1;
    };
    std::vector<Box> box(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
        box[i] = {std::min(pts[i].real(), pts[i + 1].real()), std::max(pts[i].real(), pts[i + 1].real()),
                  std::min(pts[i].imag(), pts[i + 1].imag()), std::max(pts[i].imag(), pts[i + 1].imag())};
    // sort by left edge, sweep in x
    std::vector<std::size_t> order(n - 1);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return box[a].x0 < box[b].x0; });
    for (std::size_t a = 0; a < order.size(); ++a) {
        const std::size_t i = order[a];
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const std::size_t j = order[b];
            if (box[j].x0 > box[i].x1) break;
            if (box[j].y0 > box[i].y1 || box[i].y0 > box[j].y1) continue;
            if ((i > j ? i - j : j - i) <= 1) continue;
            if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
        }
    }
    return false;
}

// True if any segment of a crosses any segment of b.
inline bool polylines_cross(const std::vector<Point>& a, const std::vector<Point>& b) {
    for (std::size_t i = 0; i + 1 < a.size(); ++i)
        for (std::size_t j = 0; j + 1 < b.size(); ++j)
            if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
    return false;
}

inline double point_segment_distance(Point p, Point a, Point b) {
    const Point d = b - a;
    const double L2 = std::norm(d);
    double t = L2 > 0 ? ((p - a) * std::conj(d)).real() / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

inline double point_polyline_distance(Point p, const std::vector<Point>& poly) {
    double best = std::numeric_limits<double>::infinity();
    if (poly.size() == 1) return std::abs(p - poly[0]);
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
    return best;
}

}  // namespace wbv::geometry

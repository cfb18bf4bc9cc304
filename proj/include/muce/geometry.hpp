#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "muce/errors.hpp"

namespace muce {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

// Axis-aligned cross: union of [-L,L]x[-W,W] and [-W,W]x[-L,L] around center.
struct CrossGeometry {
    double arm_half_length = 1.4;
    double arm_half_width = 0.35;
    Point2 center{0.0, 0.0};
    double bound_min = -2.0; // square sampling box, both axes
    double bound_max = 2.0;

    void validate() const {
        if (!(arm_half_width > 0.0 && arm_half_width < arm_half_length))
            fail(Errc::impossible_geometry, "cross requires 0 < W < L");
        if (center.x - arm_half_length < bound_min || center.x + arm_half_length > bound_max ||
            center.y - arm_half_length < bound_min || center.y + arm_half_length > bound_max)
            fail(Errc::impossible_geometry, "cross does not fit inside the sampling box");
    }

    bool contains(double x, double y) const {
        double dx = x - center.x, dy = y - center.y;
        const double L = arm_half_length, W = arm_half_width;
        return (std::abs(dx) <= L && std::abs(dy) <= W) || (std::abs(dx) <= W && std::abs(dy) <= L);
    }

    // The 12 corners of the cross outline, counterclockwise.
    std::vector<Point2> outline() const {
        const double L = arm_half_length, W = arm_half_width;
        std::vector<Point2> p = {{L, -W}, {L, W},   {W, W},   {W, L},   {-W, L},  {-W, W},
                                 {-L, W}, {-L, -W}, {-W, -W}, {-W, -L}, {W, -L},  {W, -W}};
        for (auto& q : p) {
            q.x += center.x;
            q.y += center.y;
        }
        return p;
    }
};

inline double point_segment_distance(double px, double py, const Point2& a, const Point2& b) {
    double vx = b.x - a.x, vy = b.y - a.y;
    double wx = px - a.x, wy = py - a.y;
    double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
    double dx = px - (a.x + t * vx), dy = py - (a.y + t * vy);
    return std::hypot(dx, dy);
}

/// Exact signed distance to the cross outline, positive inside.
inline double cross_signed_distance(const CrossGeometry& g, double x, double y) {
    auto poly = g.outline();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % poly.size()];
        best = std::min(best, point_segment_distance(x, y, a, b));
    }
    return g.contains(x, y) ? best : -best;
}

// Ellipsoid with radii (3,1,1) at the origin; the interior is the negative class
// in the synthetic 3D scenario.
struct EllipsoidGeometry {
    std::array<double, 3> radii{3.0, 1.0, 1.0};
    std::array<double, 3> bound_min{-4.0, -2.0, -2.0};
    std::array<double, 3> bound_max{4.0, 2.0, 2.0};

    void validate() const {
        for (int i = 0; i < 3; ++i) {
            if (radii[i] <= 0.0) fail(Errc::impossible_geometry, "ellipsoid radii must be positive");
            if (-radii[i] < bound_min[i] || radii[i] > bound_max[i])
                fail(Errc::impossible_geometry, "ellipsoid does not fit inside the sampling box");
        }
    }

    double quadratic_form(double x, double y, double z) const {
        double a = x / radii[0], b = y / radii[1], c = z / radii[2];
        return a * a + b * b + c * c;
    }

    bool contains(double x, double y, double z) const { return quadratic_form(x, y, z) <= 1.0; }
};

/// First-order signed distance to the ellipsoid surface, positive outside:
/// (sqrt(q) - 1) divided by the local gradient norm of sqrt(q). Only the zero
/// level set and monotonicity along rays matter to the callers.
inline double ellipsoid_signed_distance(const EllipsoidGeometry& g, double x, double y, double z) {
    double q = g.quadratic_form(x, y, z);
    double r = std::sqrt(q);
    if (r < 1e-12) return -1.0; // center: depth on the order of the smallest radius
    double gx = x / (g.radii[0] * g.radii[0]);
    double gy = y / (g.radii[1] * g.radii[1]);
    double gz = z / (g.radii[2] * g.radii[2]);
    double grad_norm = std::sqrt(gx * gx + gy * gy + gz * gz) / r;
    return (r - 1.0) / std::max(grad_norm, 1e-12);
}

} // namespace muce

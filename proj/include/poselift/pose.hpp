// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace poselift {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// x, y in image pixels; d is joint depth in the configured depth unit.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double d = 0.0;
};

struct Pose2D {
    std::vector<Vec2> pts;

    std::size_t size() const { return pts.size(); }
};

struct Pose3D {
    std::vector<Vec3> pts;

    std::size_t size() const { return pts.size(); }
};

struct DepthVector {
    std::vector<double> d;

    std::size_t size() const { return d.size(); }
};

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }
inline bool is_finite(const Vec3& v) {
    return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.d);
}

inline bool is_finite(const Pose2D& p) {
    for (const auto& v : p.pts)
        if (!is_finite(v)) return false;
    return true;
}

inline bool is_finite(const Pose3D& p) {
    for (const auto& v : p.pts)
        if (!is_finite(v)) return false;
    return true;
}

inline bool is_finite(const DepthVector& p) {
    for (double v : p.d)
        if (!std::isfinite(v)) return false;
    return true;
}

inline Pose2D xy_of(const Pose3D& pose) {
    Pose2D out;
    out.pts.reserve(pose.pts.size());
    for (const auto& p : pose.pts) out.pts.push_back({p.x, p.y});
    return out;
}

inline DepthVector depths_of(const Pose3D& pose) {
    DepthVector out;
    out.d.reserve(pose.pts.size());
    for (const auto& p : pose.pts) out.d.push_back(p.d);
    return out;
}

inline Pose3D combine(const Pose2D& xy, const DepthVector& depths) {
    Pose3D out;
    out.pts.resize(xy.pts.size());
    for (std::size_t j = 0; j < xy.pts.size(); ++j)
        out.pts[j] = {xy.pts[j].x, xy.pts[j].y, j < depths.d.size() ? depths.d[j] : 0.0};
    return out;
}

}  // namespace poselift

// SPDX-License-Identifier: Apache-2.0
#include "poselift/heatmap.hpp"

#include <cmath>

#include "poselift/errors.hpp"

namespace poselift {

bool joint_in_field(const Vec2& joint, const RenderSpec& spec) {
    const double u = joint.x / spec.stride;
    const double v = joint.y / spec.stride;
    return u >= -0.5 && u <= spec.width - 0.5 && v >= -0.5 && v <= spec.height - 0.5;
}

HeatmapStack render_heatmaps(const Pose2D& joints, const RenderSpec& spec) {
    if (!(spec.sigma > 0.0)) throw ConfigError("render sigma must be positive");
    if (!(spec.stride > 0.0)) throw ConfigError("render stride must be positive");
    if (spec.height < 1 || spec.width < 1) throw ConfigError("render resolution must be >= 1");

    HeatmapStack stack;
    stack.height = spec.height;
    stack.width = spec.width;
    stack.stride = spec.stride;
    stack.maps.resize(joints.size());
    stack.out_of_field.assign(joints.size(), 0);

    const double inv2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
    for (std::size_t j = 0; j < joints.size(); ++j) {
        auto& map = stack.maps[j];
        map.assign(static_cast<std::size_t>(spec.height) * spec.width, 0.0);
        if (!joint_in_field(joints.pts[j], spec)) {
            stack.out_of_field[j] = 1;
            continue;
        }
        const double u = joints.pts[j].x / spec.stride;
        const double v = joints.pts[j].y / spec.stride;
        for (int r = 0; r < spec.height; ++r) {
            const double dv = r - v;
            for (int c = 0; c < spec.width; ++c) {
                const double du = c - u;
                map[static_cast<std::size_t>(r) * spec.width + c] =
                    std::exp(-(du * du + dv * dv) * inv2s2);
            }
        }
    }
    return stack;
}

namespace {

void check_same_shape(const HeatmapStack& a, const HeatmapStack& b) {
    if (a.joints() != b.joints() || a.height != b.height || a.width != b.width)
        throw DimensionError("heatmap stacks differ in shape: " + std::to_string(a.joints()) +
                             "x" + std::to_string(a.height) + "x" + std::to_string(a.width) +
                             " vs " + std::to_string(b.joints()) + "x" + std::to_string(b.height) +
                             "x" + std::to_string(b.width));
}

}  // namespace

HeatmapLossResult heatmap_loss(const HeatmapStack& pred, const HeatmapStack& gt) {
    check_same_shape(pred, gt);
    HeatmapLossResult out;
    out.grad.height = pred.height;
    out.grad.width = pred.width;
    out.grad.stride = pred.stride;
    out.grad.maps.resize(pred.joints());
    for (std::size_t j = 0; j < pred.joints(); ++j) {
        out.grad.maps[j].resize(pred.maps[j].size());
        for (std::size_t i = 0; i < pred.maps[j].size(); ++i) {
            const double diff = pred.maps[j][i] - gt.maps[j][i];
            out.value += diff * diff;
            out.grad.maps[j][i] = 2.0 * diff;
        }
    }
    return out;
}

double heatmap_loss_value(const HeatmapStack& pred, const HeatmapStack& gt) {
    check_same_shape(pred, gt);
    double value = 0.0;
    for (std::size_t j = 0; j < pred.joints(); ++j)
        for (std::size_t i = 0; i < pred.maps[j].size(); ++i) {
            const double diff = pred.maps[j][i] - gt.maps[j][i];
            value += diff * diff;
        }
    return value;
}

DecodedPose decode_heatmaps(const HeatmapStack& maps) {
    if (maps.joints() == 0 || maps.height < 1 || maps.width < 1)
        throw DimensionError("cannot decode an empty heatmap stack");
    DecodedPose out;
    out.pose.pts.resize(maps.joints());
    out.low_confidence.assign(maps.joints(), 0);
    for (std::size_t j = 0; j < maps.joints(); ++j) {
        int best_r = 0, best_c = 0;
        double best = maps.maps[j][0];
        bool any_nonzero = best != 0.0;
        for (int r = 0; r < maps.height; ++r)
            for (int c = 0; c < maps.width; ++c) {
                const double v = maps.at(j, r, c);
                if (v != 0.0) any_nonzero = true;
                if (v > best) {  // strict: first max in row-major order wins
                    best = v;
                    best_r = r;
                    best_c = c;
                }
            }
        if (!any_nonzero) {
            out.pose.pts[j] = {0.0, 0.0};
            out.low_confidence[j] = 1;
        } else {
            out.pose.pts[j] = {best_c * maps.stride, best_r * maps.stride};
        }
    }
    return out;
}

HeatmapStack stack_from_flat(const std::vector<double>& flat, int joints, int res,
                             double stride) {
    if (joints < 1 || res < 1 ||
        flat.size() != static_cast<std::size_t>(joints) * res * res)
        throw DimensionError("flat buffer of " + std::to_string(flat.size()) +
                             " values does not hold " + std::to_string(joints) + " maps of " +
                             std::to_string(res) + "x" + std::to_string(res));
    HeatmapStack stack;
    stack.height = res;
    stack.width = res;
    stack.stride = stride;
    stack.maps.resize(joints);
    stack.out_of_field.assign(joints, 0);
    for (int j = 0; j < joints; ++j)
        stack.maps[j].assign(flat.begin() + static_cast<std::ptrdiff_t>(j) * res * res,
                             flat.begin() + static_cast<std::ptrdiff_t>(j + 1) * res * res);
    return stack;
}

std::vector<double> pool_heatmap_features(const HeatmapStack& maps, int out_res) {
    if (out_res < 1) throw ConfigError("pooled resolution must be >= 1");
    std::vector<double> feats;
    feats.reserve(maps.joints() * out_res * out_res);
    for (std::size_t j = 0; j < maps.joints(); ++j) {
        for (int orow = 0; orow < out_res; ++orow) {
            const int r0 = orow * maps.height / out_res;
            const int r1 = (orow + 1) * maps.height / out_res;
            for (int ocol = 0; ocol < out_res; ++ocol) {
                const int c0 = ocol * maps.width / out_res;
                const int c1 = (ocol + 1) * maps.width / out_res;
                double sum = 0.0;
                int n = 0;
                for (int r = r0; r < std::max(r1, r0 + 1); ++r)
                    for (int c = c0; c < std::max(c1, c0 + 1); ++c) {
                        if (r >= maps.height || c >= maps.width) continue;
                        sum += maps.at(j, r, c);
                        ++n;
                    }
                feats.push_back(n > 0 ? sum / n : 0.0);
            }
        }
    }
    return feats;
}

}  // namespace poselift

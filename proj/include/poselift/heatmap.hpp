// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "poselift/pose.hpp"

namespace poselift {

struct RenderSpec {
    int height = 64;
    int width = 64;
    double stride = 4.0;  // input pixels per heatmap cell
    double sigma = 1.0;   // Gaussian std in cells
};

// J per-joint grids. Cell (r, c) of a map samples input pixel
// (c * stride, r * stride); a joint is in-field when its nearest sample cell
// lies inside the grid.
struct HeatmapStack {
    int height = 0;
    int width = 0;
    double stride = 1.0;
    std::vector<std::vector<double>> maps;   // row-major H*W per joint
    std::vector<std::uint8_t> out_of_field;  // render metadata, one flag per joint

    std::size_t joints() const { return maps.size(); }
    double at(std::size_t j, int r, int c) const { return maps[j][r * width + c]; }
    double& at(std::size_t j, int r, int c) { return maps[j][r * width + c]; }
};

// Unnormalized peak-1 Gaussian bump per joint. Out-of-field joints produce an
// all-zero map with the out_of_field flag set instead of an error.
HeatmapStack render_heatmaps(const Pose2D& joints, const RenderSpec& spec);

bool joint_in_field(const Vec2& joint, const RenderSpec& spec);

struct HeatmapLossResult {
    double value = 0.0;
    HeatmapStack grad;  // 2 * (pred - gt), same shape
};

// Summed squared difference across all maps (no mean reduction).
HeatmapLossResult heatmap_loss(const HeatmapStack& pred, const HeatmapStack& gt);

double heatmap_loss_value(const HeatmapStack& pred, const HeatmapStack& gt);

struct DecodedPose {
    Pose2D pose;
    std::vector<std::uint8_t> low_confidence;  // set for all-zero maps
};

// Argmax per map, scaled back to input pixels; ties break to the lowest
// (row, col) in row-major order. All-zero maps decode to the origin with the
// low-confidence flag set.
DecodedPose decode_heatmaps(const HeatmapStack& maps);

// Area-averaged downsample to out_res x out_res per joint, flattened in joint
// order; the desk-scale stand-in for fusing heatmaps into regressor input.
std::vector<double> pool_heatmap_features(const HeatmapStack& maps, int out_res);

// Reinterprets a flat joint-major buffer as a square heatmap stack.
HeatmapStack stack_from_flat(const std::vector<double>& flat, int joints, int res,
                             double stride);

}  // namespace poselift

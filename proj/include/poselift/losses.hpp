// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <vector>

#include "poselift/dataset.hpp"
#include "poselift/heatmap.hpp"
#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

struct LossWeights {
    double lambda_reg = 0.1;
    double lambda_geo = 0.01;
    bool apply_geo_to_3d = false;  // also add the ratio term on depth-labeled samples
};

struct GroupStats {
    double mean_ratio = 0.0;    // mean of l_e / canonical_l_e over the group
    double contribution = 0.0;  // this group's share of the loss value
};

struct GeoLossResult {
    double value = 0.0;
    std::vector<double> grad_depth;  // d(value)/d(depth_j); empty when not requested
    std::map<std::string, GroupStats> per_group;
};

// Bone-length ratio consistency loss: per group, the variance of
// {l_e / canonical_l_e} around the group mean, summed over groups. Zero iff
// ratios are uniform within every group. The gradient flows only into the
// depths; 2D coordinates are treated as constants.
//
// l_e    = sqrt(dx^2 + dy^2 + (depth_scale * dd)^2)
// dL/dr_e = (2/|R|) (r_e - mean_r)         with r_e = l_e / canonical_l_e
// dl_e/dd_a = depth_scale^2 (d_a - d_b) / l_e  (negated at the other endpoint)
//
// A zero-length group bone contributes ratio 0 to the value; if its gradient
// coefficient is nonzero the result is undefined and SingularBoneError is
// raised instead of returning NaN.
GeoLossResult geo_loss(const DepthVector& depths, const Pose2D& joints2d,
                       const Skeleton& skeleton, double depth_scale = 1.0,
                       bool with_grad = true);

struct DepthLossResult {
    double value = 0.0;
    std::vector<double> grad_depth;
    double reg_component = 0.0;  // unweighted squared depth error (3d branch)
    double geo_component = 0.0;  // unweighted ratio loss (2d branch)
};

// Supervision dispatch: lambda_reg * ||gt_depth - pred_depth||^2 on full3d
// samples, lambda_geo * geo_loss on weak2d samples. With apply_geo_to_3d the
// 3d branch adds the weighted ratio term as well.
DepthLossResult depth_supervision_loss(const DepthVector& pred_depths, const PoseSample& sample,
                                       const Skeleton& skeleton, const LossWeights& weights,
                                       double depth_scale = 1.0, bool with_grad = true);

struct TotalLossResult {
    double total = 0.0;
    double l2d = 0.0;
    double ldep = 0.0;
    double reg_component = 0.0;
    double geo_component = 0.0;
};

// total = heatmap loss against ground-truth-rendered maps + depth loss.
TotalLossResult total_loss(const HeatmapStack& pred_maps, const DepthVector& pred_depths,
                           const PoseSample& sample, const Skeleton& skeleton,
                           const LossWeights& weights, const RenderSpec& render_spec,
                           double depth_scale = 1.0);

}  // namespace poselift

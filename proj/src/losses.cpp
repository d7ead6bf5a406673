// SPDX-License-Identifier: Apache-2.0
#include "poselift/losses.hpp"

#include <cmath>

#include "poselift/errors.hpp"

namespace poselift {

GeoLossResult geo_loss(const DepthVector& depths, const Pose2D& joints2d,
                       const Skeleton& skeleton, double depth_scale, bool with_grad) {
    const int J = skeleton.joint_count();
    if (static_cast<int>(depths.size()) != J || static_cast<int>(joints2d.size()) != J)
        throw DimensionError("geo_loss inputs must have " + std::to_string(J) + " joints");
    if (skeleton.groups.empty()) throw SchemaError("skeleton defines no bone groups");

    GeoLossResult out;
    if (with_grad) out.grad_depth.assign(J, 0.0);

    std::vector<double> length(skeleton.bone_count(), 0.0);
    std::vector<double> ratio(skeleton.bone_count(), 0.0);
    for (const BoneGroup& group : skeleton.groups) {
        for (int b : group.bones) {
            const Bone& bone = skeleton.bones[b];
            const double dx = joints2d.pts[bone.parent].x - joints2d.pts[bone.child].x;
            const double dy = joints2d.pts[bone.parent].y - joints2d.pts[bone.child].y;
            const double dd = depth_scale * (depths.d[bone.parent] - depths.d[bone.child]);
            length[b] = std::sqrt(dx * dx + dy * dy + dd * dd);
            ratio[b] = length[b] / skeleton.canonical_lengths[b];
        }
    }

    for (const BoneGroup& group : skeleton.groups) {
        const double n = static_cast<double>(group.bones.size());
        double mean = 0.0;
        for (int b : group.bones) mean += ratio[b];
        mean /= n;

        double contribution = 0.0;
        for (int b : group.bones) {
            const double dev = ratio[b] - mean;
            contribution += dev * dev;
        }
        contribution /= n;
        out.value += contribution;
        out.per_group[group.name] = {mean, contribution};

        if (!with_grad) continue;
        for (int b : group.bones) {
            // dL/dl_e, with the mean's own dependence cancelling because the
            // deviations sum to zero within the group.
            const double coef =
                (2.0 / n) * (ratio[b] - mean) / skeleton.canonical_lengths[b];
            if (coef == 0.0) continue;
            const Bone& bone = skeleton.bones[b];
            if (length[b] == 0.0) throw SingularBoneError(b, bone.name);
            const double dd = depths.d[bone.parent] - depths.d[bone.child];
            const double g = coef * depth_scale * depth_scale * dd / length[b];
            out.grad_depth[bone.parent] += g;
            out.grad_depth[bone.child] -= g;
        }
    }
    return out;
}

DepthLossResult depth_supervision_loss(const DepthVector& pred_depths, const PoseSample& sample,
                                       const Skeleton& skeleton, const LossWeights& weights,
                                       double depth_scale, bool with_grad) {
    const int J = skeleton.joint_count();
    if (static_cast<int>(pred_depths.size()) != J)
        throw DimensionError("predicted depths must have " + std::to_string(J) + " entries");
    if (static_cast<int>(sample.joints2d.size()) != J)
        throw MalformedSampleError("sample '" + sample.id + "' has wrong joint count");

    DepthLossResult out;
    if (with_grad) out.grad_depth.assign(J, 0.0);

    const bool want_geo =
        weights.lambda_geo > 0.0 &&
        (sample.supervision == Supervision::weak2d || weights.apply_geo_to_3d);

    if (sample.supervision == Supervision::full3d) {
        if (!sample.depths)
            throw MalformedSampleError("full3d sample '" + sample.id + "' carries no depths");
        for (int j = 0; j < J; ++j) {
            const double diff = pred_depths.d[j] - sample.depths->d[j];
            out.reg_component += diff * diff;
            if (with_grad) out.grad_depth[j] += weights.lambda_reg * 2.0 * diff;
        }
        out.value += weights.lambda_reg * out.reg_component;
    }

    if (want_geo) {
        GeoLossResult geo =
            geo_loss(pred_depths, sample.joints2d, skeleton, depth_scale, with_grad);
        out.geo_component = geo.value;
        out.value += weights.lambda_geo * geo.value;
        if (with_grad)
            for (int j = 0; j < J; ++j)
                out.grad_depth[j] += weights.lambda_geo * geo.grad_depth[j];
    }
    return out;
}

TotalLossResult total_loss(const HeatmapStack& pred_maps, const DepthVector& pred_depths,
                           const PoseSample& sample, const Skeleton& skeleton,
                           const LossWeights& weights, const RenderSpec& render_spec,
                           double depth_scale) {
    TotalLossResult out;
    const HeatmapStack gt_maps = render_heatmaps(sample.joints2d, render_spec);
    out.l2d = heatmap_loss_value(pred_maps, gt_maps);
    const DepthLossResult dep =
        depth_supervision_loss(pred_depths, sample, skeleton, weights, depth_scale, false);
    out.ldep = dep.value;
    out.reg_component = dep.reg_component;
    out.geo_component = dep.geo_component;
    out.total = out.l2d + out.ldep;
    return out;
}

}  // namespace poselift

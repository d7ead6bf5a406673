// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <string>
#include <vector>

#include "poselift/pose.hpp"

namespace poselift {

struct Bone {
    std::string name;
    int parent = -1;
    int child = -1;
};

struct BoneGroup {
    std::string name;
    std::vector<int> bones;
};

// left/right bone indices whose lengths are compared by the symmetry metric
// and whose endpoints define the left-right joint swap for mirroring.
struct SymmetricPair {
    std::string name;
    int left_bone = -1;
    int right_bone = -1;
};

/// Joint/bone schema shared by every module: bone topology, canonical lengths
/// (the reference skeleton the ratio loss measures against), the bone groups
/// whose length ratios are constrained, and the joint annotations needed by
/// the evaluation protocol.
struct Skeleton {
    std::vector<std::string> joint_names;
    std::vector<Bone> bones;
    std::vector<double> canonical_lengths;
    std::vector<BoneGroup> groups;
    std::vector<SymmetricPair> symmetric_pairs;
    int root_joint = -1;  // pelvis
    int neck_joint = -1;
    std::array<int, 2> hip_joints{-1, -1};  // left, right
    int head_bone = -1;
    double avg_sum_len = 0.0;  // canonical total skeleton length used to fix scale

    int joint_count() const { return static_cast<int>(joint_names.size()); }
    int bone_count() const { return static_cast<int>(bones.size()); }

    // Throws SchemaError when any structural invariant is violated.
    void validate() const;

    // Joint permutation induced by the symmetric bone pairs (identity for
    // center joints). Throws SchemaError when the pairs are inconsistent.
    std::vector<int> mirror_permutation() const;

    Skeleton with_scaled_lengths(double factor) const;
};

// 16-joint schema with pelvis root, four constrained groups (arms, legs,
// shoulders, hips) and torso/head bones left unconstrained.
Skeleton default_skeleton();

std::string skeleton_to_json(const Skeleton& s);
Skeleton skeleton_from_json(const std::string& text);
void save_skeleton(const Skeleton& s, const std::string& path);
Skeleton load_skeleton(const std::string& path);

// FNV-1a of the canonical JSON form; embedded in dataset headers so a dataset
// can refuse to load against the wrong schema.
std::string skeleton_hash(const Skeleton& s);

// ---- geometric operations (pure) ----

// Euclidean bone length in (x, y, depth_scale * d) space.
double bone_length(const Pose3D& pose, int bone, const Skeleton& skeleton,
                   double depth_scale = 1.0);

double sum_bone_lengths(const Pose3D& pose, const Skeleton& skeleton,
                        double depth_scale = 1.0);

// out = (pred - pred_root) * avg_sum_len / sum_len(pred) + gt_root.
// Root of the result equals gt_root exactly; the sum of bone lengths equals
// avg_sum_len up to rounding. Throws DegeneratePoseError when sum_len(pred)
// is zero.
Pose3D align_and_rescale(const Pose3D& pred, const Vec3& gt_root, double avg_sum_len,
                         const Skeleton& skeleton, double depth_scale = 1.0);

// Moves pelvis and both hips toward the neck joint by the given fraction of
// the connecting segment; every other joint is untouched.
Pose3D shift_pelvis_toward_neck(const Pose3D& pose, double ratio, const Skeleton& skeleton);

// Reflects x about axis_x and swaps left/right joint roles; y and d unchanged.
Pose3D mirror_pose(const Pose3D& pose, double axis_x, const Skeleton& skeleton);

}  // namespace poselift

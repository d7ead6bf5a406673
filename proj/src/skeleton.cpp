// SPDX-License-Identifier: Apache-2.0
#include "poselift/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

using nlohmann::json;

void Skeleton::validate() const {
    const int J = joint_count();
    if (J < 2) throw SchemaError("skeleton needs at least 2 joints, got " + std::to_string(J));
    if (bones.empty()) throw SchemaError("skeleton has no bones");
    if (canonical_lengths.size() != bones.size())
        throw SchemaError("canonical_lengths count " + std::to_string(canonical_lengths.size()) +
                          " does not match bone count " + std::to_string(bones.size()));

    for (std::size_t b = 0; b < bones.size(); ++b) {
        const Bone& bone = bones[b];
        if (bone.parent < 0 || bone.parent >= J || bone.child < 0 || bone.child >= J)
            throw SchemaError("bone " + std::to_string(b) + " (" + bone.name +
                              ") references a joint outside [0, " + std::to_string(J) + ")");
        if (bone.parent == bone.child)
            throw SchemaError("bone " + std::to_string(b) + " (" + bone.name + ") is a self-loop");
        if (!(canonical_lengths[b] > 0.0))
            throw SchemaError("bone " + std::to_string(b) + " (" + bone.name +
                              ") has non-positive canonical length");
    }

    std::set<int> seen;
    for (const BoneGroup& g : groups) {
        if (g.bones.empty()) throw SchemaError("group '" + g.name + "' is empty");
        for (int b : g.bones) {
            if (b < 0 || b >= bone_count())
                throw SchemaError("group '" + g.name + "' references invalid bone " +
                                  std::to_string(b));
            if (!seen.insert(b).second)
                throw SchemaError("bone " + std::to_string(b) +
                                  " appears in more than one group");
        }
    }

    for (const SymmetricPair& p : symmetric_pairs) {
        if (p.left_bone < 0 || p.left_bone >= bone_count() || p.right_bone < 0 ||
            p.right_bone >= bone_count())
            throw SchemaError("symmetric pair '" + p.name + "' references an invalid bone");
        if (p.left_bone == p.right_bone)
            throw SchemaError("symmetric pair '" + p.name + "' pairs a bone with itself");
    }

    auto check_joint = [&](int j, const char* what) {
        if (j < 0 || j >= J)
            throw SchemaError(std::string(what) + " joint index " + std::to_string(j) +
                              " out of range");
    };
    check_joint(root_joint, "root");
    check_joint(neck_joint, "neck");
    check_joint(hip_joints[0], "left hip");
    check_joint(hip_joints[1], "right hip");
    if (head_bone < 0 || head_bone >= bone_count())
        throw SchemaError("head bone index " + std::to_string(head_bone) + " out of range");
    if (!(avg_sum_len > 0.0)) throw SchemaError("avg_sum_len must be positive");
}

std::vector<int> Skeleton::mirror_permutation() const {
    const int J = joint_count();
    std::vector<int> perm(J);
    for (int j = 0; j < J; ++j) perm[j] = j;

    auto assign = [&](int a, int b, const std::string& pair_name) {
        if (perm[a] != a && perm[a] != b)
            throw SchemaError("symmetric pair '" + pair_name + "' conflicts on joint " +
                              std::to_string(a));
        if (perm[b] != b && perm[b] != a)
            throw SchemaError("symmetric pair '" + pair_name + "' conflicts on joint " +
                              std::to_string(b));
        perm[a] = b;
        perm[b] = a;
    };

    for (const SymmetricPair& p : symmetric_pairs) {
        const Bone& l = bones[p.left_bone];
        const Bone& r = bones[p.right_bone];
        if (l.parent != r.parent) assign(l.parent, r.parent, p.name);
        if (l.child != r.child) assign(l.child, r.child, p.name);
    }
    return perm;
}

Skeleton Skeleton::with_scaled_lengths(double factor) const {
    if (!(factor > 0.0)) throw SchemaError("length scale factor must be positive");
    Skeleton out = *this;
    for (double& l : out.canonical_lengths) l *= factor;
    out.avg_sum_len *= factor;
    return out;
}

Skeleton default_skeleton() {
    Skeleton s;
    s.joint_names = {"r_ankle", "r_knee",  "r_hip",      "l_hip",       "l_knee",   "l_ankle",
                     "pelvis",  "thorax",  "neck",       "head_top",    "r_wrist",  "r_elbow",
                     "r_shoulder", "l_shoulder", "l_elbow", "l_wrist"};
    s.bones = {
        {"r_lower_leg", 1, 0},   {"r_upper_leg", 2, 1},   {"r_hip_bone", 6, 2},
        {"l_hip_bone", 6, 3},    {"l_upper_leg", 3, 4},   {"l_lower_leg", 4, 5},
        {"lower_torso", 6, 7},   {"upper_torso", 7, 8},   {"head", 8, 9},
        {"r_shoulder_bone", 8, 12}, {"r_upper_arm", 12, 11}, {"r_lower_arm", 11, 10},
        {"l_shoulder_bone", 8, 13}, {"l_upper_arm", 13, 14}, {"l_lower_arm", 14, 15},
    };
    // canonical units; the dataset generator rescales these through its
    // projection factor when it writes a schema file.
    s.canonical_lengths = {0.44, 0.45, 0.13, 0.13, 0.45, 0.44, 0.28, 0.22,
                           0.21, 0.19, 0.30, 0.26, 0.19, 0.30, 0.26};
    s.groups = {
        {"arms", {10, 11, 13, 14}},
        {"legs", {0, 1, 4, 5}},
        {"shoulders", {9, 12}},
        {"hips", {2, 3}},
    };
    s.symmetric_pairs = {
        {"upper_arm", 13, 10}, {"lower_arm", 14, 11}, {"upper_leg", 4, 1},
        {"lower_leg", 5, 0},   {"shoulder", 12, 9},   {"hip", 3, 2},
    };
    s.root_joint = 6;
    s.neck_joint = 8;
    s.hip_joints = {3, 2};
    s.head_bone = 8;
    double sum = 0.0;
    for (double l : s.canonical_lengths) sum += l;
    s.avg_sum_len = sum;
    s.validate();
    return s;
}

std::string skeleton_to_json(const Skeleton& s) {
    json j;
    j["format"] = "poselift-skeleton";
    j["version"] = 1;
    j["joint_names"] = s.joint_names;
    j["bones"] = json::array();
    for (const Bone& b : s.bones)
        j["bones"].push_back({{"name", b.name}, {"parent", b.parent}, {"child", b.child}});
    j["canonical_lengths"] = s.canonical_lengths;
    j["groups"] = json::object();
    for (const BoneGroup& g : s.groups) j["groups"][g.name] = g.bones;
    j["symmetric_pairs"] = json::array();
    for (const SymmetricPair& p : s.symmetric_pairs)
        j["symmetric_pairs"].push_back(
            {{"name", p.name}, {"left", p.left_bone}, {"right", p.right_bone}});
    j["root_joint"] = s.root_joint;
    j["neck_joint"] = s.neck_joint;
    j["hip_joints"] = {s.hip_joints[0], s.hip_joints[1]};
    j["head_bone"] = s.head_bone;
    j["avg_sum_len"] = s.avg_sum_len;
    return j.dump(2);
}

namespace {

long line_of_byte_offset(const std::string& text, std::size_t byte) {
    long line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

}  // namespace

Skeleton skeleton_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SchemaError("invalid JSON at line " +
                          std::to_string(line_of_byte_offset(text, e.byte)) + ": " + e.what());
    }
    try {
        if (j.value("format", "") != "poselift-skeleton")
            throw SchemaError("not a poselift-skeleton file");
        Skeleton s;
        s.joint_names = j.at("joint_names").get<std::vector<std::string>>();
        for (const auto& jb : j.at("bones")) {
            Bone b;
            b.name = jb.at("name").get<std::string>();
            b.parent = jb.at("parent").get<int>();
            b.child = jb.at("child").get<int>();
            s.bones.push_back(b);
        }
        s.canonical_lengths = j.at("canonical_lengths").get<std::vector<double>>();
        for (auto it = j.at("groups").begin(); it != j.at("groups").end(); ++it)
            s.groups.push_back({it.key(), it.value().get<std::vector<int>>()});
        for (const auto& jp : j.at("symmetric_pairs"))
            s.symmetric_pairs.push_back({jp.at("name").get<std::string>(),
                                         jp.at("left").get<int>(), jp.at("right").get<int>()});
        s.root_joint = j.at("root_joint").get<int>();
        s.neck_joint = j.at("neck_joint").get<int>();
        auto hips = j.at("hip_joints").get<std::vector<int>>();
        if (hips.size() != 2) throw SchemaError("hip_joints must hold exactly two indices");
        s.hip_joints = {hips[0], hips[1]};
        s.head_bone = j.at("head_bone").get<int>();
        s.avg_sum_len = j.at("avg_sum_len").get<double>();
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("bad skeleton schema: ") + e.what());
    }
}

void save_skeleton(const Skeleton& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << skeleton_to_json(s) << "\n";
}

Skeleton load_skeleton(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open skeleton file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return skeleton_from_json(ss.str());
}

std::string skeleton_hash(const Skeleton& s) {
    const std::string text = skeleton_to_json(s);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

double bone_length(const Pose3D& pose, int bone, const Skeleton& skeleton, double depth_scale) {
    if (bone < 0 || bone >= skeleton.bone_count())
        throw SchemaError("bone index " + std::to_string(bone) + " out of range");
    const Bone& b = skeleton.bones[bone];
    if (static_cast<int>(pose.size()) != skeleton.joint_count())
        throw DimensionError("pose has " + std::to_string(pose.size()) + " joints, skeleton has " +
                             std::to_string(skeleton.joint_count()));
    const Vec3& pa = pose.pts[b.parent];
    const Vec3& pb = pose.pts[b.child];
    const double dx = pa.x - pb.x;
    const double dy = pa.y - pb.y;
    const double dd = depth_scale * (pa.d - pb.d);
    return std::sqrt(dx * dx + dy * dy + dd * dd);
}

double sum_bone_lengths(const Pose3D& pose, const Skeleton& skeleton, double depth_scale) {
    double sum = 0.0;
    for (int b = 0; b < skeleton.bone_count(); ++b)
        sum += bone_length(pose, b, skeleton, depth_scale);
    return sum;
}

Pose3D align_and_rescale(const Pose3D& pred, const Vec3& gt_root, double avg_sum_len,
                         const Skeleton& skeleton, double depth_scale) {
    if (!(avg_sum_len > 0.0)) throw ConfigError("avg_sum_len must be positive");
    const double sum_len = sum_bone_lengths(pred, skeleton, depth_scale);
    if (!(sum_len > 0.0))
        throw DegeneratePoseError("sum of bone lengths is zero, cannot rescale");
    const double k = avg_sum_len / sum_len;
    const Vec3 root = pred.pts[skeleton.root_joint];
    Pose3D out;
    out.pts.resize(pred.size());
    for (std::size_t j = 0; j < pred.size(); ++j) {
        out.pts[j] = {gt_root.x + (pred.pts[j].x - root.x) * k,
                      gt_root.y + (pred.pts[j].y - root.y) * k,
                      gt_root.d + (pred.pts[j].d - root.d) * k};
    }
    out.pts[skeleton.root_joint] = gt_root;  // exact, not just within rounding
    return out;
}

Pose3D shift_pelvis_toward_neck(const Pose3D& pose, double ratio, const Skeleton& skeleton) {
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw ConfigError("pelvis shift ratio must be in [0, 1]");
    if (static_cast<int>(pose.size()) != skeleton.joint_count())
        throw DimensionError("pose joint count does not match skeleton");
    Pose3D out = pose;
    const Vec3& neck = pose.pts[skeleton.neck_joint];
    for (int j : {skeleton.root_joint, skeleton.hip_joints[0], skeleton.hip_joints[1]}) {
        Vec3& p = out.pts[j];
        p.x += ratio * (neck.x - p.x);
        p.y += ratio * (neck.y - p.y);
        p.d += ratio * (neck.d - p.d);
    }
    return out;
}

Pose3D mirror_pose(const Pose3D& pose, double axis_x, const Skeleton& skeleton) {
    if (static_cast<int>(pose.size()) != skeleton.joint_count())
        throw DimensionError("pose joint count does not match skeleton");
    const std::vector<int> perm = skeleton.mirror_permutation();
    Pose3D out;
    out.pts.resize(pose.size());
    for (std::size_t j = 0; j < pose.size(); ++j) {
        const Vec3& src = pose.pts[perm[j]];
        out.pts[j] = {2.0 * axis_x - src.x, src.y, src.d};
    }
    return out;
}

}  // namespace poselift

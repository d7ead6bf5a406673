// SPDX-License-Identifier: Apache-2.0
#include "poselift/datagen.hpp"

#include <cmath>
#include <cstdio>

#include "poselift/errors.hpp"
#include "poselift/rng.hpp"

namespace poselift {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec3 direction(double phi, double theta) {
    // y axis points down in image coordinates; phi=0 is straight down,
    // phi=pi straight up, theta sweeps from +x toward +depth.
    return {std::sin(phi) * std::cos(theta), std::cos(phi), std::sin(phi) * std::sin(theta)};
}

std::string format_id(const std::string& domain, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%05d", domain.c_str(), index);
    return std::string(buf);
}

}  // namespace

std::vector<Articulation> default_articulations() {
    const double H = kPi / 2.0;
    return {
        {0.35, kPi - 1.20, 0.30, 0.70},  // r_lower_leg
        {0.35, kPi - 1.25, 0.25, 0.70},  // r_upper_leg
        {H, kPi - 0.35, 0.12, 0.25},     // r_hip_bone
        {H, 0.35, 0.12, 0.25},           // l_hip_bone
        {0.35, 1.25, 0.25, 0.70},        // l_upper_leg
        {0.35, 1.20, 0.30, 0.70},        // l_lower_leg
        {kPi - 0.14, 1.30, 0.10, 0.40},  // lower_torso
        {kPi - 0.12, 1.30, 0.08, 0.40},  // upper_torso
        {kPi - 0.16, 1.30, 0.12, 0.50},  // head
        {1.75, kPi - 0.30, 0.12, 0.30},  // r_shoulder_bone
        {0.55, kPi - 1.00, 0.50, 0.80},  // r_upper_arm
        {0.60, kPi - 1.10, 0.50, 0.90},  // r_lower_arm
        {1.75, 0.30, 0.12, 0.30},        // l_shoulder_bone
        {0.55, 1.00, 0.50, 0.80},        // l_upper_arm
        {0.60, 1.10, 0.50, 0.90},        // l_lower_arm
    };
}

void GeneratorConfig::validate(const Skeleton& skeleton) const {
    if (!(projection_scale > 0.0)) throw ConfigError("projection_scale must be positive");
    if (!(field_size > 0.0)) throw ConfigError("field_size must be positive");
    if (!(mm_per_px > 0.0)) throw ConfigError("mm_per_px must be positive");
    if (depth_noise_std < 0.0) throw ConfigError("depth_noise_std must be >= 0");
    if (samples3d < 0 || samples2d < 0 || samples3d_eval < 0)
        throw ConfigError("sample counts must be >= 0");

    const auto arts = articulations.empty() ? default_articulations() : articulations;
    if (static_cast<int>(arts.size()) != skeleton.bone_count())
        throw ConfigError("articulation table has " + std::to_string(arts.size()) +
                          " entries, skeleton has " + std::to_string(skeleton.bone_count()) +
                          " bones");
    for (const DomainSpec& dom : {lab, wild}) {
        if (!(dom.angle_scale > 0.0))
            throw ConfigError("domain '" + dom.tag + "': angle_scale must be positive");
        if (!(dom.scale_range[0] > 0.0) || dom.scale_range[1] < dom.scale_range[0])
            throw ConfigError("domain '" + dom.tag + "': bad subject scale range");
        if (dom.subjects < 1)
            throw ConfigError("domain '" + dom.tag + "': needs at least one subject");
        for (std::size_t b = 0; b < arts.size(); ++b) {
            const Articulation& a = arts[b];
            if (a.dphi < 0.0 || a.dtheta < 0.0)
                throw ConfigError("bone " + std::to_string(b) + ": negative angle range");
            const double dphi = a.dphi * dom.angle_scale;
            const double dtheta = a.dtheta * dom.angle_scale;
            // Cones that reach a pole or sweep past a half turn fold the limb
            // back through the body; reject the configuration.
            if (dphi > kPi / 2.0 || dtheta > kPi / 2.0 || a.phi0 - dphi < 0.0 ||
                a.phi0 + dphi > kPi)
                throw ConfigError("domain '" + dom.tag + "', bone " + std::to_string(b) +
                                  " (" + skeleton.bones[b].name +
                                  "): infeasible articulation range");
        }
    }
}

namespace {

struct PoseDraw {
    Pose3D world;
    Pose2D px2d;
    DepthVector pxdepth;
};

// Bones in parent-joint-available order starting from the root.
std::vector<int> placement_order(const Skeleton& s) {
    std::vector<int> order;
    std::vector<bool> joint_known(s.joint_count(), false);
    std::vector<bool> placed(s.bone_count(), false);
    joint_known[s.root_joint] = true;
    bool progress = true;
    while (order.size() < s.bones.size() && progress) {
        progress = false;
        for (int b = 0; b < s.bone_count(); ++b) {
            if (placed[b] || !joint_known[s.bones[b].parent]) continue;
            placed[b] = true;
            joint_known[s.bones[b].child] = true;
            order.push_back(b);
            progress = true;
        }
    }
    if (order.size() != s.bones.size())
        throw SchemaError("bone graph is not a tree reachable from the root");
    return order;
}

PoseDraw draw_pose(const Skeleton& skeleton, const std::vector<Articulation>& arts,
                   const std::vector<int>& order, double subject_scale, double angle_scale,
                   const GeneratorConfig& cfg, Rng& rng) {
    const double F = cfg.field_size;
    const double proj = cfg.projection_scale;

    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> phi(skeleton.bone_count()), theta(skeleton.bone_count());
        for (int b = 0; b < skeleton.bone_count(); ++b) {
            phi[b] = arts[b].phi0 + rng.uniform(-arts[b].dphi, arts[b].dphi) * angle_scale;
            theta[b] = arts[b].theta0 + rng.uniform(-arts[b].dtheta, arts[b].dtheta) * angle_scale;
        }
        Vec3 root{rng.uniform(0.38, 0.62) * F / proj, rng.uniform(0.36, 0.52) * F / proj,
                  rng.uniform(2.0, 3.0) * F / proj};

        PoseDraw draw;
        draw.world.pts.assign(skeleton.joint_count(), Vec3{});
        draw.world.pts[skeleton.root_joint] = root;
        for (int b : order) {
            const Bone& bone = skeleton.bones[b];
            const Vec3 dir = direction(phi[b], theta[b]);
            const double len = subject_scale * skeleton.canonical_lengths[b] / proj;
            const Vec3& p = draw.world.pts[bone.parent];
            draw.world.pts[bone.child] = {p.x + len * dir.x, p.y + len * dir.y,
                                          p.d + len * dir.d};
        }

        bool in_field = true;
        draw.px2d.pts.resize(skeleton.joint_count());
        draw.pxdepth.d.resize(skeleton.joint_count());
        for (int j = 0; j < skeleton.joint_count(); ++j) {
            const double x = proj * draw.world.pts[j].x;
            const double y = proj * draw.world.pts[j].y;
            if (x < 4.0 || x > F - 4.0 || y < 4.0 || y > F - 4.0) in_field = false;
            draw.px2d.pts[j] = {x, y};
            draw.pxdepth.d[j] = proj * draw.world.pts[j].d;
        }
        if (in_field) return draw;
    }
    throw ConfigError("could not place a pose inside the field after 200 attempts; "
                      "projection_scale or angle ranges are infeasible");
}

}  // namespace

GeneratedData generate(const GeneratorConfig& config) {
    GeneratedData out;
    Skeleton base = default_skeleton();

    const auto arts = config.articulations.empty() ? default_articulations()
                                                   : config.articulations;
    config.validate(base);

    // Canonical schema in pixel units; this is the reference the ratio loss
    // and the rescaling formula use downstream.
    out.skeleton = base.with_scaled_lengths(config.projection_scale);

    Rng rng(config.seed);

    std::vector<double> lab_scales(config.lab.subjects);
    for (double& s : lab_scales)
        s = rng.uniform(config.lab.scale_range[0], config.lab.scale_range[1]);
    std::vector<double> wild_scales(config.wild.subjects);
    for (double& s : wild_scales)
        s = rng.uniform(config.wild.scale_range[0], config.wild.scale_range[1]);
    std::vector<double> eval_scales(config.lab.subjects);
    for (double& s : eval_scales)
        s = rng.uniform(config.lab.scale_range[0], config.lab.scale_range[1]);

    double scale_sum = 0.0;
    for (double s : lab_scales) scale_sum += s;
    out.skeleton.avg_sum_len *= scale_sum / static_cast<double>(lab_scales.size());

    const std::vector<int> order = placement_order(out.skeleton);
    const std::string hash = skeleton_hash(out.skeleton);

    auto make_header = [&](const std::string& domain) {
        DatasetHeader h;
        h.skeleton_hash = hash;
        h.units = {"px", "px", config.mm_per_px};
        h.field_size = config.field_size;
        h.projection_scale = config.projection_scale;
        h.domain = domain;
        return h;
    };
    out.data3d.header = make_header("lab");
    out.data2d.header = make_header("wild");
    out.archive.header = make_header("wild");
    out.eval3d.header = make_header("lab");

    for (int i = 0; i < config.samples3d; ++i) {
        const double scale = lab_scales[rng.below(lab_scales.size())];
        PoseDraw draw =
            draw_pose(out.skeleton, arts, order, scale, config.lab.angle_scale, config, rng);
        PoseSample s;
        s.id = format_id("lab", i);
        s.supervision = Supervision::full3d;
        s.joints2d = draw.px2d;
        if (config.depth_noise_std > 0.0)
            for (double& d : draw.pxdepth.d) d += rng.normal(0.0, config.depth_noise_std);
        s.depths = draw.pxdepth;
        s.source = "lab";
        s.world = draw.world;
        out.data3d.samples.push_back(std::move(s));
    }

    for (int i = 0; i < config.samples2d; ++i) {
        const double scale = wild_scales[rng.below(wild_scales.size())];
        PoseDraw draw =
            draw_pose(out.skeleton, arts, order, scale, config.wild.angle_scale, config, rng);
        PoseSample weak;
        weak.id = format_id("wild", i);
        weak.supervision = Supervision::weak2d;
        weak.joints2d = draw.px2d;
        weak.source = "wild";

        PoseSample full = weak;
        full.supervision = Supervision::full3d;
        full.depths = draw.pxdepth;
        full.world = draw.world;

        out.data2d.samples.push_back(std::move(weak));
        out.archive.samples.push_back(std::move(full));
    }

    for (int i = 0; i < config.samples3d_eval; ++i) {
        const double scale = eval_scales[rng.below(eval_scales.size())];
        PoseDraw draw =
            draw_pose(out.skeleton, arts, order, scale, config.lab.angle_scale, config, rng);
        PoseSample s;
        s.id = format_id("lab-eval", i);
        s.supervision = Supervision::full3d;
        s.joints2d = draw.px2d;
        s.depths = draw.pxdepth;  // evaluation labels stay noise-free
        s.source = "lab-eval";
        s.world = draw.world;
        out.eval3d.samples.push_back(std::move(s));
    }

    out.data3d.header.count = static_cast<long>(out.data3d.samples.size());
    out.data2d.header.count = static_cast<long>(out.data2d.samples.size());
    out.archive.header.count = static_cast<long>(out.archive.samples.size());
    out.eval3d.header.count = static_cast<long>(out.eval3d.samples.size());
    return out;
}

Pose3D world_from_record(const PoseSample& sample, const DatasetHeader& header) {
    if (!sample.depths)
        throw MalformedSampleError("sample '" + sample.id + "' has no depths to lift");
    Pose3D world;
    world.pts.resize(sample.joints2d.size());
    const double inv = 1.0 / header.projection_scale;
    for (std::size_t j = 0; j < sample.joints2d.size(); ++j)
        world.pts[j] = {sample.joints2d.pts[j].x * inv, sample.joints2d.pts[j].y * inv,
                        sample.depths->d[j] * inv};
    return world;
}

}  // namespace poselift

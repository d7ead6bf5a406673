// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poselift/dataset.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

// Sampling cone for one bone: rest spherical angles plus half-widths.
// phi is the polar angle from image-down, theta the azimuth in the x-depth
// plane; a domain's angle_scale multiplies both half-widths.
struct Articulation {
    double phi0 = 0.0;
    double theta0 = 0.0;
    double dphi = 0.0;
    double dtheta = 0.0;
};

struct DomainSpec {
    std::string tag;
    double angle_scale = 1.0;
    std::array<double, 2> scale_range{0.9, 1.1};  // per-subject skeleton scale
    int subjects = 8;
};

struct GeneratorConfig {
    std::uint64_t seed = 7;
    int samples3d = 512;
    int samples2d = 512;
    int samples3d_eval = 200;  // held-out lab split with fresh subjects
    double projection_scale = 90.0;  // px per world unit, weak perspective
    double field_size = 256.0;
    double mm_per_px = 12.0;        // unit declaration carried into headers
    double depth_noise_std = 0.0;   // label noise on stored 3d-domain depths
    DomainSpec lab{"lab", 0.45, {0.9, 1.1}, 8};
    DomainSpec wild{"wild", 1.0, {0.8, 1.25}, 8};
    std::vector<Articulation> articulations;  // empty -> default table

    void validate(const Skeleton& skeleton) const;
};

// Per-bone rest pose and ranges matching default_skeleton()'s bone order.
std::vector<Articulation> default_articulations();

struct GeneratedData {
    Skeleton skeleton;  // canonical lengths in px, avg_sum_len over lab subjects
    Dataset data3d;     // lab domain, full3d records
    Dataset data2d;     // wild domain, weak2d records (depths withheld)
    Dataset archive;    // the same wild samples with their true depths
    Dataset eval3d;     // held-out lab-domain split (unseen subjects)
};

// Deterministic per seed. Subjects scale every bone uniformly, so bone-length
// ratios are exactly constant within each group and the ratio loss of any
// ground-truth pose is exactly zero (when depth_noise_std is 0).
GeneratedData generate(const GeneratorConfig& config);

// World pose of a sample rebuilt from its pixel record (weak perspective).
Pose3D world_from_record(const PoseSample& sample, const DatasetHeader& header);

}  // namespace poselift

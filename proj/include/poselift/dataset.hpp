// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

enum class Supervision { full3d, weak2d };

std::string to_string(Supervision s);
Supervision supervision_from_string(const std::string& s);

// One training/eval record. full3d records must carry depths; weak2d records
// carry 2D only (any depths present are ignored by training).
struct PoseSample {
    std::string id;
    Supervision supervision = Supervision::weak2d;
    Pose2D joints2d;                 // pixels
    std::optional<DepthVector> depths;  // depth units declared by the dataset header
    std::string source;              // domain tag, e.g. "lab" / "wild"
    std::optional<Pose3D> world;     // generator world coordinates, archives only
};

struct DatasetUnits {
    std::string xy = "px";
    std::string depth = "px";
    double mm_per_px = 1.0;  // conversion used by mm-space evaluation
};

struct DatasetHeader {
    int version = 1;
    std::string skeleton_hash;
    DatasetUnits units;
    double field_size = 256.0;
    double projection_scale = 90.0;  // px per world unit (weak perspective)
    std::string domain;
    long count = 0;
};

struct Dataset {
    DatasetHeader header;
    std::vector<PoseSample> samples;
};

struct LoadReport {
    long records = 0;
    std::string path;
};

// JSON-lines with a header object on line 1. Writing is deterministic:
// identical datasets serialize to identical bytes.
void save_dataset(const Dataset& ds, const std::string& path);

// All-or-nothing load; every diagnostic carries its 1-based line number.
// Throws DataValidationError on schema-hash mismatch, malformed lines,
// non-finite values, joint-count mismatch, or a full3d record without depths.
Dataset load_dataset(const std::string& path, const Skeleton& skeleton,
                     LoadReport* report = nullptr);

// Ground-truth pose of a full3d record (pixel xy + depth).
Pose3D sample_gt_pose(const PoseSample& sample);

}  // namespace poselift

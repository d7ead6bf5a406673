// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "poselift/dataset.hpp"
#include "poselift/pose.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

// Compensated (Kahan) accumulator; keeps dataset aggregates order-independent
// to well below the 1e-9 reporting tolerance.
class KahanSum {
public:
    void add(double v) {
        const double y = v - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

struct PerJointMetric {
    double mean = 0.0;
    std::vector<double> per_joint;
};

// Mean per-joint 3D distance after subtracting each pose's root depth from
// its own depths (depth-only alignment).
PerJointMetric mpjpe(const Pose3D& pred, const Pose3D& gt, int root_joint);

// Fraction (percent) of joints with 3D error strictly below the threshold
// after full root-joint alignment of the prediction to the ground truth.
double pck(const Pose3D& pred, const Pose3D& gt, double threshold, int root_joint);

struct AucResult {
    double auc = 0.0;
    std::vector<double> grid;   // thresholds, 0..max inclusive
    std::vector<double> curve;  // PCK percentage per threshold
};

// Mean of the PCK curve over an evenly spaced threshold grid. Positive
// thresholds use the strict comparison; the degenerate 0 endpoint takes the
// right-continuous limit (error == 0 counts) so perfect predictions score 1.
AucResult auc(const std::vector<Pose3D>& preds, const std::vector<Pose3D>& gts, int root_joint,
              double max_threshold = 150.0, int grid_points = 31);

// 2D joint accuracy: correct when the 2D error is strictly below
// ratio * ground-truth head-bone length. Throws DegenerateSampleError when
// the head bone has zero length.
double pckh(const Pose2D& pred2d, const Pose2D& gt2d, const Skeleton& skeleton,
            double ratio = 0.5);

// |len(left bone) - len(right bone)| per symmetric pair after scaling all
// three coordinates by `scale` (1 for mm-space, field ratio for the
// normalized-pixel convention).
std::vector<std::pair<std::string, double>> symmetry_metric(const Pose3D& pose,
                                                            const Skeleton& skeleton,
                                                            double scale = 1.0);

struct ProtocolConfig {
    std::string name = "h36m";  // h36m | 3dhp | sym
    bool rescale = true;        // fix global scale via avg_sum_len
    bool pelvis_shift = false;
    double pelvis_shift_ratio = 0.2;
    double pck_threshold_mm = 150.0;
    double auc_max_mm = 150.0;
    int auc_points = 31;
    double mm_per_px = 1.0;  // from the dataset header
    bool sym_in_mm = true;   // mm-space pairs vs normalized pixels
    double sym_field = 256.0;
    double dataset_field = 256.0;
};

// h36m: rescaled mm-space depth evaluation; 3dhp: known scale with the 0.2
// pelvis shift; sym: normalized-pixel symmetry for 2D-label sets.
ProtocolConfig make_protocol(const std::string& name, const DatasetHeader& header,
                             double sym_field = 256.0);

struct MetricsReport {
    std::string protocol;
    double mpjpe_mm = 0.0;
    std::vector<double> mpjpe_per_joint;
    double pck = 0.0;
    double pck_threshold_mm = 150.0;
    double auc = 0.0;
    std::vector<double> auc_grid;
    std::vector<double> auc_curve;
    double pckh05 = 0.0;
    std::vector<std::pair<std::string, double>> symmetry;
    std::string sym_unit = "mm";
    long sample_count = 0;
    long error_count = 0;
    double avg_sum_len_mm = 0.0;
    std::string skeleton_hash;
};

// Raw prediction and ground truth in pixel units, one row per evaluated
// sample; the protocol post-processing can be replayed from these.
struct PerSampleRow {
    std::string id;
    Pose3D pred_px;
    Pose3D gt_px;
};

using Predictor = std::function<Pose3D(const PoseSample&)>;

// Runs the full protocol over every record with ground-truth depths.
// Per-sample failures are counted and excluded, never silently dropped.
MetricsReport evaluate(const Dataset& dataset, const Predictor& predictor,
                       const Skeleton& skeleton, const ProtocolConfig& protocol,
                       std::vector<PerSampleRow>* rows = nullptr,
                       std::vector<std::string>* sample_errors = nullptr);

std::string metrics_report_to_json(const MetricsReport& report, const ProtocolConfig& protocol);
MetricsReport metrics_report_from_json(const std::string& text);

// Aligned plain-text table, derived from the same data as the JSON.
std::string metrics_report_table(const MetricsReport& report);

void write_per_sample_csv(const std::vector<PerSampleRow>& rows, int joint_count,
                          const std::string& path);

}  // namespace poselift

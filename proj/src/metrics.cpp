// SPDX-License-Identifier: Apache-2.0
#include "poselift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

using nlohmann::json;

namespace {

void check_same_size(const Pose3D& a, const Pose3D& b) {
    if (a.size() != b.size() || a.size() == 0)
        throw DimensionError("poses differ in joint count: " + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()));
}

Pose3D align_root_depth(const Pose3D& pose, int root_joint) {
    Pose3D out = pose;
    const double rd = pose.pts[root_joint].d;
    for (auto& p : out.pts) p.d -= rd;
    return out;
}

Pose3D align_root_full(const Pose3D& pose, const Vec3& target_root, int root_joint) {
    Pose3D out = pose;
    const Vec3 r = pose.pts[root_joint];
    for (auto& p : out.pts) {
        p.x += target_root.x - r.x;
        p.y += target_root.y - r.y;
        p.d += target_root.d - r.d;
    }
    return out;
}

double dist3(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dd = a.d - b.d;
    return std::sqrt(dx * dx + dy * dy + dd * dd);
}

std::vector<double> root_aligned_errors(const Pose3D& pred, const Pose3D& gt, int root_joint) {
    const Pose3D p = align_root_full(pred, gt.pts[root_joint], root_joint);
    std::vector<double> errs(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) errs[j] = dist3(p.pts[j], gt.pts[j]);
    return errs;
}

double pck_from_errors(const std::vector<double>& errs, double threshold, bool at_zero) {
    long ok = 0;
    for (double e : errs)
        if (at_zero ? e <= threshold : e < threshold) ++ok;
    return 100.0 * static_cast<double>(ok) / static_cast<double>(errs.size());
}

}  // namespace

PerJointMetric mpjpe(const Pose3D& pred, const Pose3D& gt, int root_joint) {
    check_same_size(pred, gt);
    const Pose3D p = align_root_depth(pred, root_joint);
    const Pose3D g = align_root_depth(gt, root_joint);
    PerJointMetric out;
    out.per_joint.resize(p.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        out.per_joint[j] = dist3(p.pts[j], g.pts[j]);
        sum += out.per_joint[j];
    }
    out.mean = sum / static_cast<double>(p.size());
    return out;
}

double pck(const Pose3D& pred, const Pose3D& gt, double threshold, int root_joint) {
    check_same_size(pred, gt);
    if (!(threshold > 0.0)) throw ConfigError("pck threshold must be positive");
    return pck_from_errors(root_aligned_errors(pred, gt, root_joint), threshold, false);
}

AucResult auc(const std::vector<Pose3D>& preds, const std::vector<Pose3D>& gts, int root_joint,
              double max_threshold, int grid_points) {
    if (preds.empty() || preds.size() != gts.size())
        throw DimensionError("auc needs equally sized, non-empty pose sets");
    if (grid_points < 2) throw ConfigError("auc grid needs at least 2 points");

    std::vector<double> errs;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        auto e = root_aligned_errors(preds[i], gts[i], root_joint);
        errs.insert(errs.end(), e.begin(), e.end());
    }

    AucResult out;
    out.grid.resize(grid_points);
    out.curve.resize(grid_points);
    KahanSum mean;
    for (int i = 0; i < grid_points; ++i) {
        out.grid[i] = max_threshold * static_cast<double>(i) / (grid_points - 1);
        out.curve[i] = pck_from_errors(errs, out.grid[i], i == 0);
        mean.add(out.curve[i]);
    }
    for (int i = 1; i < grid_points; ++i)
        if (out.curve[i] + 1e-12 < out.curve[i - 1])
            throw Error("PCK curve is not monotone, refusing to integrate", 1);
    out.auc = mean.value() / (100.0 * grid_points);
    return out;
}

double pckh(const Pose2D& pred2d, const Pose2D& gt2d, const Skeleton& skeleton, double ratio) {
    if (pred2d.size() != gt2d.size() || static_cast<int>(gt2d.size()) != skeleton.joint_count())
        throw DimensionError("pckh poses must match the skeleton joint count");
    const Bone& head = skeleton.bones[skeleton.head_bone];
    const double hx = gt2d.pts[head.parent].x - gt2d.pts[head.child].x;
    const double hy = gt2d.pts[head.parent].y - gt2d.pts[head.child].y;
    const double head_len = std::sqrt(hx * hx + hy * hy);
    if (!(head_len > 0.0))
        throw DegenerateSampleError("ground-truth head bone has zero length");
    const double threshold = ratio * head_len;
    long ok = 0;
    for (std::size_t j = 0; j < gt2d.size(); ++j) {
        const double dx = pred2d.pts[j].x - gt2d.pts[j].x;
        const double dy = pred2d.pts[j].y - gt2d.pts[j].y;
        if (std::sqrt(dx * dx + dy * dy) < threshold) ++ok;
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(gt2d.size());
}

std::vector<std::pair<std::string, double>> symmetry_metric(const Pose3D& pose,
                                                            const Skeleton& skeleton,
                                                            double scale) {
    if (static_cast<int>(pose.size()) != skeleton.joint_count())
        throw DimensionError("pose joint count does not match skeleton");
    Pose3D scaled = pose;
    for (auto& p : scaled.pts) {
        p.x *= scale;
        p.y *= scale;
        p.d *= scale;
    }
    std::vector<std::pair<std::string, double>> out;
    out.reserve(skeleton.symmetric_pairs.size());
    for (const SymmetricPair& pair : skeleton.symmetric_pairs) {
        const double l = bone_length(scaled, pair.left_bone, skeleton);
        const double r = bone_length(scaled, pair.right_bone, skeleton);
        out.emplace_back(pair.name, std::fabs(l - r));
    }
    return out;
}

ProtocolConfig make_protocol(const std::string& name, const DatasetHeader& header,
                             double sym_field) {
    ProtocolConfig p;
    p.name = name;
    p.mm_per_px = header.units.mm_per_px;
    p.dataset_field = header.field_size;
    p.sym_field = sym_field;
    if (name == "h36m") {
        p.rescale = true;
        p.pelvis_shift = false;
        p.sym_in_mm = true;
    } else if (name == "3dhp") {
        p.rescale = false;  // global scale assumed known
        p.pelvis_shift = true;
        p.sym_in_mm = true;
    } else if (name == "sym") {
        p.rescale = false;
        p.pelvis_shift = false;
        p.sym_in_mm = false;
    } else {
        throw ConfigError("unknown protocol '" + name + "' (expected h36m, 3dhp or sym)");
    }
    return p;
}

MetricsReport evaluate(const Dataset& dataset, const Predictor& predictor,
                       const Skeleton& skeleton, const ProtocolConfig& protocol,
                       std::vector<PerSampleRow>* rows, std::vector<std::string>* sample_errors) {
    const int J = skeleton.joint_count();
    MetricsReport report;
    report.protocol = protocol.name;
    report.pck_threshold_mm = protocol.pck_threshold_mm;
    report.sym_unit = protocol.sym_in_mm ? "mm" : "px";
    report.avg_sum_len_mm = skeleton.avg_sum_len * protocol.mm_per_px;
    report.skeleton_hash = skeleton_hash(skeleton);

    std::vector<KahanSum> joint_err(J);
    KahanSum pck_sum, pckh_sum;
    std::vector<KahanSum> sym_sums(skeleton.symmetric_pairs.size());
    std::vector<Pose3D> preds_mm, gts_mm;
    long used = 0;

    for (const PoseSample& sample : dataset.samples) {
        try {
            const Pose3D gt_px = sample_gt_pose(sample);
            const Pose3D pred_px = predictor(sample);
            if (static_cast<int>(pred_px.size()) != J)
                throw DimensionError("predictor returned wrong joint count");
            if (!is_finite(pred_px)) throw DegeneratePoseError("non-finite prediction");
            if (rows) rows->push_back({sample.id, pred_px, gt_px});

            auto to_mm = [&](const Pose3D& p) {
                Pose3D out = p;
                for (auto& v : out.pts) {
                    v.x *= protocol.mm_per_px;
                    v.y *= protocol.mm_per_px;
                    v.d *= protocol.mm_per_px;
                }
                return out;
            };
            const Pose3D gt_mm = to_mm(gt_px);
            Pose3D pred_mm = to_mm(pred_px);
            if (protocol.rescale)
                pred_mm = align_and_rescale(pred_mm, gt_mm.pts[skeleton.root_joint],
                                            report.avg_sum_len_mm, skeleton);
            if (protocol.pelvis_shift)
                pred_mm =
                    shift_pelvis_toward_neck(pred_mm, protocol.pelvis_shift_ratio, skeleton);

            const PerJointMetric m = mpjpe(pred_mm, gt_mm, skeleton.root_joint);
            for (int j = 0; j < J; ++j) joint_err[j].add(m.per_joint[j]);
            pck_sum.add(pck(pred_mm, gt_mm, protocol.pck_threshold_mm, skeleton.root_joint));
            pckh_sum.add(pckh(xy_of(pred_px), xy_of(gt_px), skeleton));

            const Pose3D& sym_pose = protocol.sym_in_mm ? pred_mm : pred_px;
            const double sym_scale =
                protocol.sym_in_mm ? 1.0 : protocol.sym_field / protocol.dataset_field;
            const auto sym = symmetry_metric(sym_pose, skeleton, sym_scale);
            for (std::size_t i = 0; i < sym.size(); ++i) sym_sums[i].add(sym[i].second);

            preds_mm.push_back(std::move(pred_mm));
            gts_mm.push_back(gt_mm);
            ++used;
        } catch (const Error& e) {
            ++report.error_count;
            if (sample_errors)
                sample_errors->push_back("sample '" + sample.id + "': " + e.what());
        }
    }

    if (used == 0) throw DataValidationError("no evaluable samples in dataset");
    report.sample_count = used;
    report.mpjpe_per_joint.resize(J);
    KahanSum total;
    for (int j = 0; j < J; ++j) {
        report.mpjpe_per_joint[j] = joint_err[j].value() / used;
        total.add(report.mpjpe_per_joint[j]);
    }
    report.mpjpe_mm = total.value() / J;
    report.pck = pck_sum.value() / used;
    report.pckh05 = pckh_sum.value() / used;
    for (std::size_t i = 0; i < sym_sums.size(); ++i)
        report.symmetry.emplace_back(skeleton.symmetric_pairs[i].name,
                                     sym_sums[i].value() / used);

    const AucResult a = auc(preds_mm, gts_mm, skeleton.root_joint, protocol.auc_max_mm,
                            protocol.auc_points);
    report.auc = a.auc;
    report.auc_grid = a.grid;
    report.auc_curve = a.curve;
    return report;
}

std::string metrics_report_to_json(const MetricsReport& report, const ProtocolConfig& protocol) {
    json j;
    j["format"] = "poselift-metrics";
    j["version"] = 1;
    j["protocol"] = {{"name", protocol.name},
                     {"rescale", protocol.rescale},
                     {"pelvis_shift", protocol.pelvis_shift},
                     {"pelvis_shift_ratio", protocol.pelvis_shift_ratio},
                     {"pck_threshold_mm", protocol.pck_threshold_mm},
                     {"auc_max_mm", protocol.auc_max_mm},
                     {"auc_points", protocol.auc_points},
                     {"mm_per_px", protocol.mm_per_px},
                     {"sym_in_mm", protocol.sym_in_mm},
                     {"sym_field", protocol.sym_field},
                     {"dataset_field", protocol.dataset_field}};
    j["mpjpe_mm"] = report.mpjpe_mm;
    j["mpjpe_per_joint"] = report.mpjpe_per_joint;
    j["pck"] = report.pck;
    j["pck_threshold_mm"] = report.pck_threshold_mm;
    j["auc"] = report.auc;
    j["auc_grid"] = report.auc_grid;
    j["auc_curve"] = report.auc_curve;
    j["pckh05"] = report.pckh05;
    json sym = json::object();
    for (const auto& [name, value] : report.symmetry) sym[name] = value;
    j["symmetry"] = sym;
    j["sym_unit"] = report.sym_unit;
    j["sample_count"] = report.sample_count;
    j["error_count"] = report.error_count;
    j["avg_sum_len_mm"] = report.avg_sum_len_mm;
    j["skeleton_hash"] = report.skeleton_hash;
    return j.dump(2);
}

MetricsReport metrics_report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataValidationError(std::string("metrics report is not valid JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "poselift-metrics")
            throw DataValidationError("not a poselift-metrics file");
        MetricsReport r;
        r.protocol = j.at("protocol").at("name").get<std::string>();
        r.mpjpe_mm = j.at("mpjpe_mm").get<double>();
        r.mpjpe_per_joint = j.at("mpjpe_per_joint").get<std::vector<double>>();
        r.pck = j.at("pck").get<double>();
        r.pck_threshold_mm = j.at("pck_threshold_mm").get<double>();
        r.auc = j.at("auc").get<double>();
        r.auc_grid = j.at("auc_grid").get<std::vector<double>>();
        r.auc_curve = j.at("auc_curve").get<std::vector<double>>();
        r.pckh05 = j.at("pckh05").get<double>();
        for (auto it = j.at("symmetry").begin(); it != j.at("symmetry").end(); ++it)
            r.symmetry.emplace_back(it.key(), it.value().get<double>());
        r.sym_unit = j.at("sym_unit").get<std::string>();
        r.sample_count = j.at("sample_count").get<long>();
        r.error_count = j.at("error_count").get<long>();
        r.avg_sum_len_mm = j.at("avg_sum_len_mm").get<double>();
        r.skeleton_hash = j.at("skeleton_hash").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw DataValidationError(std::string("bad metrics report: ") + e.what());
    }
}

std::string metrics_report_table(const MetricsReport& report) {
    std::ostringstream os;
    char line[128];
    os << "protocol: " << report.protocol << "  (samples: " << report.sample_count
       << ", errors: " << report.error_count << ")\n";
    std::snprintf(line, sizeof(line), "%-18s %12.4f\n", "MPJPE [mm]", report.mpjpe_mm);
    os << line;
    std::snprintf(line, sizeof(line), "%-18s %12.4f  (thr %.0f mm)\n", "PCK [%]", report.pck,
                  report.pck_threshold_mm);
    os << line;
    std::snprintf(line, sizeof(line), "%-18s %12.4f\n", "AUC", report.auc);
    os << line;
    std::snprintf(line, sizeof(line), "%-18s %12.4f\n", "PCKh@0.5 [%]", report.pckh05);
    os << line;
    for (const auto& [name, value] : report.symmetry) {
        std::snprintf(line, sizeof(line), "sym %-14s %12.4f  [%s]\n", name.c_str(), value,
                      report.sym_unit.c_str());
        os << line;
    }
    return os.str();
}

void write_per_sample_csv(const std::vector<PerSampleRow>& rows, int joint_count,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "id";
    for (int j = 0; j < joint_count; ++j)
        out << ",pred_x" << j << ",pred_y" << j << ",pred_d" << j;
    for (int j = 0; j < joint_count; ++j)
        out << ",gt_x" << j << ",gt_y" << j << ",gt_d" << j;
    out << "\n";
    out.precision(17);
    for (const PerSampleRow& row : rows) {
        out << row.id;
        for (const auto& p : row.pred_px.pts) out << "," << p.x << "," << p.y << "," << p.d;
        for (const auto& p : row.gt_px.pts) out << "," << p.x << "," << p.y << "," << p.d;
        out << "\n";
    }
}

}  // namespace poselift

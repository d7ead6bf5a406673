// SPDX-License-Identifier: Apache-2.0
#include "poselift/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

using nlohmann::json;

std::string to_string(Supervision s) { return s == Supervision::full3d ? "3d" : "2d"; }

Supervision supervision_from_string(const std::string& s) {
    if (s == "3d") return Supervision::full3d;
    if (s == "2d") return Supervision::weak2d;
    throw DataValidationError("unknown supervision kind '" + s + "'");
}

namespace {

json pose2d_to_json(const Pose2D& p) {
    json arr = json::array();
    for (const auto& v : p.pts) arr.push_back({v.x, v.y});
    return arr;
}

json pose3d_to_json(const Pose3D& p) {
    json arr = json::array();
    for (const auto& v : p.pts) arr.push_back({v.x, v.y, v.d});
    return arr;
}

json sample_to_json(const PoseSample& s) {
    json j;
    j["id"] = s.id;
    j["sup"] = to_string(s.supervision);
    j["j2d"] = pose2d_to_json(s.joints2d);
    if (s.depths) j["dep"] = s.depths->d;
    if (!s.source.empty()) j["src"] = s.source;
    if (s.world) j["world"] = pose3d_to_json(*s.world);
    return j;
}

json header_to_json(const DatasetHeader& h) {
    json j;
    j["format"] = "poselift-dataset";
    j["version"] = h.version;
    j["skeleton_hash"] = h.skeleton_hash;
    j["units"] = {{"xy", h.units.xy}, {"depth", h.units.depth}, {"mm_per_px", h.units.mm_per_px}};
    j["field_size"] = h.field_size;
    j["projection_scale"] = h.projection_scale;
    j["domain"] = h.domain;
    j["count"] = h.count;
    return j;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    DatasetHeader header = ds.header;
    header.count = static_cast<long>(ds.samples.size());
    out << header_to_json(header).dump() << "\n";
    for (const PoseSample& s : ds.samples) out << sample_to_json(s).dump() << "\n";
    if (!out) throw ConfigError("failed writing dataset to '" + path + "'");
}

namespace {

Pose2D parse_pose2d(const json& arr, long line, int expect_j) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expect_j)
        throw DataValidationError("record has " + std::to_string(arr.size()) +
                                      " joints, skeleton expects " + std::to_string(expect_j),
                                  line);
    Pose2D p;
    p.pts.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 2)
            throw DataValidationError("2D joint is not an [x, y] pair", line);
        p.pts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (!is_finite(p)) throw DataValidationError("non-finite 2D coordinate", line);
    return p;
}

Pose3D parse_pose3d(const json& arr, long line, int expect_j) {
    if (!arr.is_array() || static_cast<int>(arr.size()) != expect_j)
        throw DataValidationError("world pose has " + std::to_string(arr.size()) +
                                      " joints, skeleton expects " + std::to_string(expect_j),
                                  line);
    Pose3D p;
    p.pts.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_array() || v.size() != 3)
            throw DataValidationError("world joint is not an [x, y, z] triple", line);
        p.pts.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
    }
    if (!is_finite(p)) throw DataValidationError("non-finite world coordinate", line);
    return p;
}

}  // namespace

Dataset load_dataset(const std::string& path, const Skeleton& skeleton, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw DataValidationError("cannot open dataset file '" + path + "'");

    Dataset ds;
    std::string text;
    long line = 0;
    const int J = skeleton.joint_count();
    bool have_header = false;

    while (std::getline(in, text)) {
        ++line;
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw DataValidationError(std::string("malformed JSON: ") + e.what(), line);
        }
        try {
            if (!have_header) {
                if (j.value("format", "") != "poselift-dataset")
                    throw DataValidationError("missing poselift-dataset header", line);
                DatasetHeader h;
                h.version = j.at("version").get<int>();
                h.skeleton_hash = j.at("skeleton_hash").get<std::string>();
                const auto& units = j.at("units");
                h.units.xy = units.at("xy").get<std::string>();
                h.units.depth = units.at("depth").get<std::string>();
                h.units.mm_per_px = units.at("mm_per_px").get<double>();
                h.field_size = j.at("field_size").get<double>();
                h.projection_scale = j.at("projection_scale").get<double>();
                h.domain = j.value("domain", "");
                h.count = j.at("count").get<long>();
                if (h.skeleton_hash != skeleton_hash(skeleton))
                    throw DataValidationError("skeleton hash mismatch: dataset built for " +
                                                  h.skeleton_hash + ", loaded skeleton is " +
                                                  skeleton_hash(skeleton),
                                              line);
                ds.header = h;
                have_header = true;
                continue;
            }

            PoseSample s;
            s.id = j.at("id").get<std::string>();
            s.supervision = supervision_from_string(j.at("sup").get<std::string>());
            s.joints2d = parse_pose2d(j.at("j2d"), line, J);
            if (j.contains("dep")) {
                DepthVector dep;
                dep.d = j["dep"].get<std::vector<double>>();
                if (static_cast<int>(dep.size()) != J)
                    throw DataValidationError("depth vector has " + std::to_string(dep.size()) +
                                                  " entries, expected " + std::to_string(J),
                                              line);
                if (!is_finite(dep)) throw DataValidationError("non-finite depth value", line);
                s.depths = std::move(dep);
            }
            if (s.supervision == Supervision::full3d && !s.depths)
                throw DataValidationError("full3d record '" + s.id + "' is missing depths", line);
            s.source = j.value("src", "");
            if (j.contains("world")) s.world = parse_pose3d(j["world"], line, J);
            ds.samples.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw DataValidationError(std::string("bad record: ") + e.what(), line);
        }
    }

    if (!have_header) throw DataValidationError("dataset file '" + path + "' is empty");
    if (ds.header.count != static_cast<long>(ds.samples.size()))
        throw DataValidationError("header count " + std::to_string(ds.header.count) +
                                  " does not match " + std::to_string(ds.samples.size()) +
                                  " records");
    if (report) {
        report->records = static_cast<long>(ds.samples.size());
        report->path = path;
    }
    return ds;
}

Pose3D sample_gt_pose(const PoseSample& sample) {
    if (!sample.depths)
        throw MalformedSampleError("sample '" + sample.id + "' has no ground-truth depths");
    return combine(sample.joints2d, *sample.depths);
}

}  // namespace poselift

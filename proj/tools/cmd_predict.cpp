// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "commands.hpp"
#include "poselift/errors.hpp"
#include "poselift/manifest.hpp"
#include "poselift/pipeline.hpp"

namespace poselift::cli {

int run_predict(const PredictOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Skeleton skeleton = load_skeleton(opt.skeleton);
    const Dataset dataset = load_dataset(opt.input, skeleton);

    const PredictorSpec spec = load_predictor_spec(opt.predictor);
    std::string ckpt = spec.checkpoint;
    if (!std::filesystem::path(ckpt).is_absolute() && !std::filesystem::exists(ckpt))
        ckpt = (std::filesystem::path(opt.predictor).parent_path() /
                std::filesystem::path(ckpt).filename())
                   .string();
    const RegressorState state = load_checkpoint(ckpt);
    const Predictor predictor = make_predictor(spec, state, skeleton);

    const std::string out_path = resolve_out(opt.out);
    if (const auto parent = std::filesystem::path(out_path).parent_path(); !parent.empty())
        std::filesystem::create_directories(parent);
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open '" + out_path + "' for writing");

    for (const PoseSample& sample : dataset.samples) {
        Pose3D pose = predictor(sample);
        if (opt.rescale)
            // No ground truth at prediction time: rescale about the predicted
            // root so the total skeleton length matches the canonical value.
            pose = align_and_rescale(pose, pose.pts[skeleton.root_joint], skeleton.avg_sum_len,
                                     skeleton);
        nlohmann::json j;
        j["id"] = sample.id;
        nlohmann::json arr = nlohmann::json::array();
        for (const Vec3& p : pose.pts) arr.push_back({p.x, p.y, p.d});
        j["pose"] = arr;
        out << j.dump() << "\n";
    }

    nlohmann::json snapshot;
    snapshot["predictor"] = opt.predictor;
    snapshot["input"] = opt.input;
    snapshot["rescale"] = opt.rescale;

    RunManifest manifest;
    manifest.command = "predict";
    manifest.config_json = snapshot.dump();
    manifest.inputs = {opt.predictor, opt.input, opt.skeleton};
    manifest.outputs = {out_path};
    manifest.version = tool_version();
    manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, out_path + ".manifest.json");

    std::cout << "predict: wrote " << dataset.samples.size() << " poses to " << out_path << "\n";
    return 0;
}

}  // namespace poselift::cli

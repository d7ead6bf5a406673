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

namespace {

nlohmann::json plan_snapshot(const TrainOptions& opt, const TrainPlan& plan) {
    nlohmann::json j;
    j["ablation"] = opt.ablation;
    j["seed"] = plan.seed;
    j["stage_iters"] = {plan.stages[0].iterations, plan.stages[1].iterations,
                        plan.stages[2].iterations};
    j["batch_size"] = plan.batch_size;
    j["use_2d_pool"] = plan.use_2d_pool;
    j["learning_rate"] = plan.learning_rate;
    j["momentum"] = plan.momentum;
    j["lambda_reg"] = plan.weights.lambda_reg;
    j["lambda_geo"] = plan.weights.lambda_geo;
    j["apply_geo_to_3d"] = plan.weights.apply_geo_to_3d;
    j["aux_res"] = plan.aux_res;
    j["heatmap_features"] = plan.heatmap_features;
    j["hidden_dims"] = plan.hidden_dims;
    j["activation"] = plan.activation;
    j["log_interval"] = plan.log_interval;
    j["resume"] = opt.resume;
    return j;
}

}  // namespace

int run_train(const TrainOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    if (opt.stage_iters.size() != 3)
        throw ConfigError("--stage-iters needs exactly three values");

    const Skeleton skeleton = load_skeleton(opt.skeleton);
    const Dataset data3d = load_dataset(opt.data3d, skeleton);

    TrainPlan base;
    base.stages[0].iterations = opt.stage_iters[0];
    base.stages[1].iterations = opt.stage_iters[1];
    base.stages[2].iterations = opt.stage_iters[2];
    base.batch_size = opt.batch;
    base.learning_rate = opt.lr;
    base.momentum = opt.momentum;
    base.weights.lambda_reg = opt.lambda_reg;
    base.weights.lambda_geo = opt.lambda_geo;
    base.seed = opt.seed;
    base.log_interval = opt.log_interval;
    base.aux_res = opt.aux_res;
    base.heatmap_features = opt.heatmap_features;
    base.hidden_dims = opt.hidden;
    base.activation = opt.activation;
    const TrainPlan plan = make_ablation_plan(ablation_from_string(opt.ablation), base);

    Dataset data2d;
    if (plan.use_2d_pool) {
        if (opt.data2d.empty())
            throw ConfigError("ablation '" + opt.ablation + "' needs --data2d");
        data2d = load_dataset(opt.data2d, skeleton);
    }

    std::optional<RegressorState> resume_state;
    if (!opt.resume.empty()) resume_state = load_checkpoint(opt.resume);

    const std::string out_dir = resolve_out(opt.out);
    std::filesystem::create_directories(out_dir);

    const TrainRunReport report = train(plan, data3d, plan.use_2d_pool ? &data2d : nullptr,
                                        skeleton, out_dir, nullptr, resume_state);

    PredictorSpec spec = predictor_spec_from_plan(plan, skeleton, report.final_checkpoint,
                                                  data3d.header.field_size);
    const std::string spec_path = out_dir + "/predictor.json";
    save_predictor_spec(spec, spec_path);

    nlohmann::json jr;
    jr["format"] = "poselift-train-report";
    jr["version"] = 1;
    jr["wall_ms"] = report.wall_ms;
    jr["final_checkpoint"] = report.final_checkpoint;
    jr["log"] = report.log_path;
    jr["stages"] = nlohmann::json::array();
    for (const StageSummary& s : report.stages)
        jr["stages"].push_back({{"name", s.name},
                                {"iterations", s.iterations},
                                {"first_total", s.first_total},
                                {"last_total", s.last_total},
                                {"last_geo", s.last_geo},
                                {"wall_ms", s.wall_ms},
                                {"checkpoint", s.checkpoint_path}});
    std::ofstream rep(out_dir + "/train_report.json");
    rep << jr.dump(2) << "\n";

    RunManifest manifest;
    manifest.command = "train";
    manifest.config_json = plan_snapshot(opt, plan).dump();
    manifest.seeds = {plan.seed};
    manifest.inputs = {opt.data3d, opt.skeleton};
    if (plan.use_2d_pool) manifest.inputs.push_back(opt.data2d);
    manifest.outputs = {report.final_checkpoint, spec_path, report.log_path};
    manifest.version = tool_version();
    manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, out_dir + "/manifest_train.json");

    std::cout << "train[" << opt.ablation << "]: " << report.stages.back().iterations
              << " stage-3 iterations, final checkpoint " << report.final_checkpoint << "\n";
    return 0;
}

}  // namespace poselift::cli

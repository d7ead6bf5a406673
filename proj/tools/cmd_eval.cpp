// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "commands.hpp"
#include "poselift/errors.hpp"
#include "poselift/manifest.hpp"
#include "poselift/metrics.hpp"
#include "poselift/pipeline.hpp"

namespace poselift::cli {

int run_eval(const EvalOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Skeleton skeleton = load_skeleton(opt.skeleton);
    const Dataset dataset = load_dataset(opt.dataset, skeleton);
    ProtocolConfig protocol = make_protocol(opt.protocol, dataset.header, opt.sym_field);
    if (opt.known_scale) protocol.rescale = false;

    Predictor predictor;
    if (opt.oracle) {
        predictor = [](const PoseSample& s) { return sample_gt_pose(s); };
    } else {
        if (opt.predictor.empty())
            throw ConfigError("--predictor is required unless --oracle is set");
        const PredictorSpec spec = load_predictor_spec(opt.predictor);
        std::string ckpt = spec.checkpoint;
        if (!std::filesystem::path(ckpt).is_absolute() && !std::filesystem::exists(ckpt))
            ckpt = (std::filesystem::path(opt.predictor).parent_path() /
                    std::filesystem::path(ckpt).filename())
                       .string();
        const RegressorState state = load_checkpoint(ckpt);
        predictor = make_predictor(spec, state, skeleton);
    }

    const std::string out_dir = resolve_out(opt.out);
    std::filesystem::create_directories(out_dir);

    std::vector<PerSampleRow> rows;
    std::vector<std::string> sample_errors;
    const MetricsReport report =
        evaluate(dataset, predictor, skeleton, protocol, &rows, &sample_errors);

    const std::string json_path = out_dir + "/metrics.json";
    const std::string txt_path = out_dir + "/metrics.txt";
    const std::string csv_path = out_dir + "/per_sample.csv";
    {
        std::ofstream out(json_path);
        out << metrics_report_to_json(report, protocol) << "\n";
    }
    {
        std::ofstream out(txt_path);
        out << metrics_report_table(report);
    }
    write_per_sample_csv(rows, skeleton.joint_count(), csv_path);
    if (!sample_errors.empty()) {
        std::ofstream out(out_dir + "/sample_errors.log");
        for (const std::string& e : sample_errors) out << e << "\n";
    }

    nlohmann::json snapshot;
    snapshot["protocol"] = opt.protocol;
    snapshot["known_scale"] = opt.known_scale;
    snapshot["oracle"] = opt.oracle;
    snapshot["predictor"] = opt.predictor;
    snapshot["dataset"] = opt.dataset;
    snapshot["sym_field"] = opt.sym_field;

    RunManifest manifest;
    manifest.command = "eval";
    manifest.config_json = snapshot.dump();
    manifest.inputs = {opt.dataset, opt.skeleton};
    if (!opt.predictor.empty()) manifest.inputs.push_back(opt.predictor);
    manifest.outputs = {json_path, txt_path, csv_path};
    manifest.version = tool_version();
    manifest.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, out_dir + "/manifest_eval.json");

    std::cout << metrics_report_table(report);
    return 0;
}

}  // namespace poselift::cli

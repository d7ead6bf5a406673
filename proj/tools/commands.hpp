// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace poselift::cli {

struct SynthOptions {
    std::uint64_t seed = 7;
    std::string out;
    int samples3d = 512;
    int samples2d = 512;
    int samples3d_eval = 200;
    int subjects = 8;
    double proj = 90.0;
    double field = 256.0;
    double mm_per_px = 12.0;
    double depth_noise = 0.0;
    double lab_angle = 0.45;
    double wild_angle = 1.0;
    std::vector<double> lab_scale{0.9, 1.1};
    std::vector<double> wild_scale{0.8, 1.25};
};

struct TrainOptions {
    std::string data3d;
    std::string data2d;
    std::string skeleton;
    std::string out;
    std::string ablation = "mixed-geo";
    std::uint64_t seed = 1;
    std::vector<long> stage_iters{0, 20000, 5000};
    int batch = 6;
    double lr = 2.5e-3;
    double momentum = 0.9;
    double lambda_reg = 0.1;
    double lambda_geo = 0.01;
    int aux_res = 8;
    bool heatmap_features = false;
    long log_interval = 100;
    std::vector<int> hidden{128, 128};
    std::string activation = "relu";
    std::string resume;
};

struct EvalOptions {
    std::string predictor;
    std::string dataset;
    std::string skeleton;
    std::string out;
    std::string protocol = "h36m";
    bool oracle = false;
    bool known_scale = false;  // skip the AvgSumLen rescaling
    double sym_field = 256.0;
};

struct GradcheckOptions {
    int trials = 120;
    std::uint64_t seed = 1;
    std::string inject;
};

struct PredictOptions {
    std::string predictor;
    std::string input;
    std::string skeleton;
    std::string out;
    bool rescale = false;
};

struct ReportOptions {
    std::vector<std::string> metrics_files;
    std::string out_txt;
    std::string out_csv;
};

int run_synth(const SynthOptions& opt);
int run_train(const TrainOptions& opt);
int run_eval(const EvalOptions& opt);
int run_gradcheck(const GradcheckOptions& opt);
int run_predict(const PredictOptions& opt);
int run_report(const ReportOptions& opt);

// POSELIFT_OUT_ROOT prefixes relative output paths; the only environment
// override the tool honors.
std::string resolve_out(const std::string& path);

std::string tool_version();

}  // namespace poselift::cli

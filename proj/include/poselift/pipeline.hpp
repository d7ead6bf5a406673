// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "poselift/dataset.hpp"
#include "poselift/heatmap.hpp"
#include "poselift/losses.hpp"
#include "poselift/metrics.hpp"
#include "poselift/regressor.hpp"
#include "poselift/rng.hpp"

namespace poselift {

struct StageConfig {
    std::string name;
    long iterations = 0;
    bool train_2d_head = false;
    bool lambda_geo_active = false;
    bool train_depth = true;  // stage 1 warms the 2D pathway only
};

// Canonical schedule: stage 1 optionally warms the 2D head, stage 2 trains
// with the ratio term off, stage 3 activates it. "Without geo" ablations keep
// the stage flags and zero the weight instead, so the ratio loss is never
// evaluated when its weight is zero.
struct TrainPlan {
    std::array<StageConfig, 3> stages{{{"stage1", 0, true, false, false},
                                       {"stage2", 20000, true, false, true},
                                       {"stage3", 5000, true, true, true}}};
    int batch_size = 6;
    bool use_2d_pool = true;
    LossWeights weights;
    std::vector<int> hidden_dims{128, 128};
    std::string activation = "relu";
    double learning_rate = 2.5e-3;
    double momentum = 0.9;
    std::uint64_t seed = 1;
    long log_interval = 100;
    int aux_res = 8;        // aux heatmap head resolution; 0 disables the head
    double aux_sigma = 1.0;
    bool heatmap_features = false;  // fuse pooled heatmaps into the input
    int pooled_res = 8;
    int render_res = 64;    // full-resolution heatmap pathway
    double render_sigma = 1.0;
    double depth_scale = 1.0;
    bool stage1_identity_check = false;  // render/decode round-trip check

    void validate() const;
};

enum class Ablation { only3d, only3d_geo, mixed, mixed_geo };

Ablation ablation_from_string(const std::string& s);
std::string to_string(Ablation a);

// The four baseline configurations expressed purely through plan flags.
TrainPlan make_ablation_plan(Ablation a, TrainPlan base = {});

// Loss terms a stage can produce under a plan; lets tests diff configurations.
std::vector<std::string> effective_loss_terms(const TrainPlan& plan, int stage_index);

struct TrainingSample {
    std::string id;
    Supervision supervision = Supervision::weak2d;
    std::vector<double> features;
    PoseSample norm;          // root-centered, field-normalized units
    HeatmapStack aux_target;  // empty when the aux head is disabled
};

struct TrainingData {
    Skeleton skeleton_norm;  // canonical lengths divided by the field size
    std::vector<TrainingSample> pool3d;
    std::vector<TrainingSample> pool2d;
    RenderSpec aux_spec;
    double field = 256.0;
    int feature_dim = 0;
};

// Normalizes both pools once: 2D root-centered and divided by the field,
// depths root-relative and divided by the field. Precomputes features and
// aux-head targets.
TrainingData prepare_training_data(const Dataset& data3d, const Dataset* data2d,
                                   const Skeleton& skeleton, const TrainPlan& plan);

std::vector<double> featurize(const PoseSample& sample, const Skeleton& skeleton,
                              const TrainPlan& plan, double field);

// Half 3d / half 2d with replacement; an absent 2d pool yields all-3d batches.
std::vector<const TrainingSample*> sample_batch(const std::vector<TrainingSample>* pool3d,
                                                const std::vector<TrainingSample>* pool2d,
                                                int batch_size, Rng& rng);

struct LogEntry {
    std::string stage;
    long iteration = 0;
    double total = 0.0;
    double l2d = 0.0;
    double reg = 0.0;
    double geo = 0.0;
};

struct StageSummary {
    std::string name;
    long iterations = 0;
    double first_total = 0.0;
    double last_total = 0.0;
    double last_geo = 0.0;
    double wall_ms = 0.0;
    std::string checkpoint_path;
};

struct TrainRunReport {
    std::vector<StageSummary> stages;
    double wall_ms = 0.0;
    std::string final_checkpoint;
    std::string log_path;
};

// Runs one stage: sample -> forward -> loss -> backward -> step, logging mean
// loss components every log_interval iterations. On divergence the last good
// snapshot is written and DivergenceError carries its path.
void run_stage(const StageConfig& stage, RegressorState& state, const TrainingData& data,
               const TrainPlan& plan, Rng& rng, std::vector<LogEntry>& log,
               const std::string& checkpoint_dir);

// Executes the three stages in order with per-stage derived seeds (a resumed
// stage sees the same sample stream as an uninterrupted run), checkpointing
// at stage boundaries.
TrainRunReport train(const TrainPlan& plan, const Dataset& data3d, const Dataset* data2d,
                     const Skeleton& skeleton, const std::string& out_dir,
                     std::vector<LogEntry>* log_out = nullptr,
                     const std::optional<RegressorState>& resume_state = std::nullopt);

void write_log_jsonl(const std::vector<LogEntry>& log, const std::string& path);
void write_log_csv(const std::vector<LogEntry>& log, const std::string& path);

// Featurization contract persisted next to a checkpoint so eval/predict can
// rebuild the exact training-time frontend.
struct PredictorSpec {
    std::string checkpoint;
    double field = 256.0;
    bool heatmap_features = false;
    int pooled_res = 8;
    int render_res = 64;
    double render_sigma = 1.0;
    std::string skeleton_hash;
    std::vector<int> hidden_dims{128, 128};
    int aux_res = 8;
};

void save_predictor_spec(const PredictorSpec& spec, const std::string& path);
PredictorSpec load_predictor_spec(const std::string& path);
PredictorSpec predictor_spec_from_plan(const TrainPlan& plan, const Skeleton& skeleton,
                                       const std::string& checkpoint, double field);

// Pose prediction: ground-truth 2D joints combined with regressed depths,
// denormalized back to pixel units (root-relative depth).
Predictor make_predictor(const PredictorSpec& spec, const RegressorState& state,
                         const Skeleton& skeleton);

}  // namespace poselift

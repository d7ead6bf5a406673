// SPDX-License-Identifier: Apache-2.0
#include "poselift/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/errors.hpp"

namespace poselift {

using nlohmann::json;

void TrainPlan::validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (use_2d_pool && batch_size % 2 != 0)
        throw ConfigError("mixed batches need an even batch_size, got " +
                          std::to_string(batch_size));
    if (stages[1].lambda_geo_active)
        throw ConfigError("stage 2 must keep the geometric term inactive");
    if (!stages[2].lambda_geo_active)
        throw ConfigError("stage 3 must have the geometric term active "
                          "(disable it by zeroing lambda_geo)");
    for (const StageConfig& s : stages) {
        if (s.iterations < 0) throw ConfigError("stage iterations must be >= 0");
        if (s.iterations > 0 && !s.train_depth && !s.train_2d_head)
            throw ConfigError("stage '" + s.name + "' trains nothing");
    }
    if (weights.lambda_reg < 0.0 || weights.lambda_geo < 0.0)
        throw ConfigError("loss weights must be >= 0");
    if (aux_res < 0 || pooled_res < 1 || render_res < 1)
        throw ConfigError("bad heatmap resolution");
    if (log_interval < 1) throw ConfigError("log_interval must be >= 1");
}

Ablation ablation_from_string(const std::string& s) {
    if (s == "3d") return Ablation::only3d;
    if (s == "3d-geo") return Ablation::only3d_geo;
    if (s == "mixed") return Ablation::mixed;
    if (s == "mixed-geo") return Ablation::mixed_geo;
    throw ConfigError("unknown ablation '" + s + "' (expected 3d, 3d-geo, mixed, mixed-geo)");
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::only3d: return "3d";
        case Ablation::only3d_geo: return "3d-geo";
        case Ablation::mixed: return "mixed";
        case Ablation::mixed_geo: return "mixed-geo";
    }
    return "?";
}

TrainPlan make_ablation_plan(Ablation a, TrainPlan base) {
    switch (a) {
        case Ablation::only3d:
            base.use_2d_pool = false;
            base.weights.lambda_geo = 0.0;
            base.weights.apply_geo_to_3d = false;
            break;
        case Ablation::only3d_geo:
            // With no weakly-labeled pool the ratio term lands on the
            // depth-labeled samples instead.
            base.use_2d_pool = false;
            base.weights.apply_geo_to_3d = true;
            break;
        case Ablation::mixed:
            base.use_2d_pool = true;
            base.weights.lambda_geo = 0.0;
            base.weights.apply_geo_to_3d = false;
            break;
        case Ablation::mixed_geo:
            base.use_2d_pool = true;
            base.weights.apply_geo_to_3d = false;
            break;
    }
    return base;
}

std::vector<std::string> effective_loss_terms(const TrainPlan& plan, int stage_index) {
    const StageConfig& stage = plan.stages.at(stage_index);
    std::vector<std::string> terms;
    if (stage.iterations == 0) return terms;
    if (stage.train_2d_head && plan.aux_res > 0) terms.push_back("l2d");
    if (stage.train_depth) {
        terms.push_back("reg3d");
        const bool geo_on = stage.lambda_geo_active && plan.weights.lambda_geo > 0.0;
        if (geo_on && plan.use_2d_pool) terms.push_back("geo2d");
        if (geo_on && plan.weights.apply_geo_to_3d) terms.push_back("geo3d");
    }
    return terms;
}

std::vector<double> featurize(const PoseSample& sample, const Skeleton& skeleton,
                              const TrainPlan& plan, double field) {
    const int J = skeleton.joint_count();
    if (static_cast<int>(sample.joints2d.size()) != J)
        throw MalformedSampleError("sample '" + sample.id + "' has wrong joint count");
    const Vec2 root = sample.joints2d.pts[skeleton.root_joint];
    std::vector<double> feats;
    feats.reserve(2 * J);
    for (const Vec2& p : sample.joints2d.pts) {
        feats.push_back((p.x - root.x) / field);
        feats.push_back((p.y - root.y) / field);
    }
    if (plan.heatmap_features) {
        RenderSpec spec;
        spec.height = plan.render_res;
        spec.width = plan.render_res;
        spec.stride = field / plan.render_res;
        spec.sigma = plan.render_sigma;
        const HeatmapStack maps = render_heatmaps(sample.joints2d, spec);
        const auto pooled = pool_heatmap_features(maps, plan.pooled_res);
        feats.insert(feats.end(), pooled.begin(), pooled.end());
    }
    return feats;
}

TrainingData prepare_training_data(const Dataset& data3d, const Dataset* data2d,
                                   const Skeleton& skeleton, const TrainPlan& plan) {
    plan.validate();
    TrainingData data;
    data.field = data3d.header.field_size;
    data.skeleton_norm = skeleton.with_scaled_lengths(1.0 / data.field);
    data.aux_spec = RenderSpec{plan.aux_res > 0 ? plan.aux_res : 1,
                               plan.aux_res > 0 ? plan.aux_res : 1,
                               2.0 * data.field / (plan.aux_res > 0 ? plan.aux_res : 1),
                               plan.aux_sigma};

    const int J = skeleton.joint_count();
    auto convert = [&](const PoseSample& src) {
        if (static_cast<int>(src.joints2d.size()) != J)
            throw MalformedSampleError("sample '" + src.id + "' has wrong joint count");
        TrainingSample ts;
        ts.id = src.id;
        ts.supervision = src.supervision;
        ts.features = featurize(src, skeleton, plan, data.field);

        ts.norm.id = src.id;
        ts.norm.supervision = src.supervision;
        ts.norm.source = src.source;
        const Vec2 root = src.joints2d.pts[skeleton.root_joint];
        ts.norm.joints2d.pts.resize(J);
        for (int j = 0; j < J; ++j)
            ts.norm.joints2d.pts[j] = {(src.joints2d.pts[j].x - root.x) / data.field,
                                       (src.joints2d.pts[j].y - root.y) / data.field};
        if (src.supervision == Supervision::full3d) {
            if (!src.depths)
                throw MalformedSampleError("full3d sample '" + src.id + "' has no depths");
            DepthVector nd;
            nd.d.resize(J);
            const double root_d = src.depths->d[skeleton.root_joint];
            for (int j = 0; j < J; ++j) nd.d[j] = (src.depths->d[j] - root_d) / data.field;
            ts.norm.depths = std::move(nd);
        }

        if (plan.aux_res > 0) {
            // Root-centered render over a 2F field keeps every joint in view.
            Pose2D centered;
            centered.pts.resize(J);
            for (int j = 0; j < J; ++j)
                centered.pts[j] = {src.joints2d.pts[j].x - root.x + data.field,
                                   src.joints2d.pts[j].y - root.y + data.field};
            ts.aux_target = render_heatmaps(centered, data.aux_spec);
        }
        return ts;
    };

    for (const PoseSample& s : data3d.samples) data.pool3d.push_back(convert(s));
    if (data2d)
        for (const PoseSample& s : data2d->samples) data.pool2d.push_back(convert(s));
    if (data.pool3d.empty()) throw ConfigError("3d training pool is empty");
    data.feature_dim = static_cast<int>(data.pool3d.front().features.size());
    return data;
}

std::vector<const TrainingSample*> sample_batch(const std::vector<TrainingSample>* pool3d,
                                                const std::vector<TrainingSample>* pool2d,
                                                int batch_size, Rng& rng) {
    const bool has3d = pool3d && !pool3d->empty();
    const bool has2d = pool2d && !pool2d->empty();
    if (pool3d && pool3d->empty()) throw ConfigError("3d pool is enabled but empty");
    if (pool2d && pool2d->empty()) throw ConfigError("2d pool is enabled but empty");
    if (!has3d && !has2d) throw ConfigError("no sample pools enabled");

    std::vector<const TrainingSample*> batch;
    batch.reserve(batch_size);
    if (has3d && has2d) {
        if (batch_size % 2 != 0)
            throw ConfigError("mixed batches need an even batch size");
        for (int i = 0; i < batch_size / 2; ++i)
            batch.push_back(&(*pool3d)[rng.below(pool3d->size())]);
        for (int i = 0; i < batch_size / 2; ++i)
            batch.push_back(&(*pool2d)[rng.below(pool2d->size())]);
    } else {
        const auto* pool = has3d ? pool3d : pool2d;
        for (int i = 0; i < batch_size; ++i)
            batch.push_back(&(*pool)[rng.below(pool->size())]);
    }
    return batch;
}

namespace {

struct StepStats {
    double total = 0.0;
    double l2d = 0.0;
    double reg = 0.0;
    double geo = 0.0;
};

StepStats training_step(RegressorState& state, const std::vector<const TrainingSample*>& batch,
                        const TrainingData& data, const TrainPlan& plan,
                        const StageConfig& stage) {
    LossWeights weights = plan.weights;
    if (!stage.lambda_geo_active) weights.lambda_geo = 0.0;
    const bool aux_active = stage.train_2d_head && plan.aux_res > 0;
    const int J = data.skeleton_norm.joint_count();

    Gradients grads = zero_gradients(state);
    StepStats stats;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    for (const TrainingSample* ts : batch) {
        ForwardResult fwd = forward(state, ts->features);
        std::vector<double> grad_depths(J, 0.0);
        std::vector<double> grad_aux;
        double sample_loss = 0.0;

        if (stage.train_depth) {
            DepthLossResult dep = depth_supervision_loss(
                fwd.depths, ts->norm, data.skeleton_norm, weights, plan.depth_scale, true);
            sample_loss += dep.value;
            stats.reg += weights.lambda_reg * dep.reg_component * inv_b;
            stats.geo += weights.lambda_geo * dep.geo_component * inv_b;
            grad_depths = std::move(dep.grad_depth);
        }
        if (aux_active) {
            const HeatmapStack aux_maps =
                stack_from_flat(fwd.aux, J, plan.aux_res, data.aux_spec.stride);
            HeatmapLossResult hm = heatmap_loss(aux_maps, ts->aux_target);
            sample_loss += hm.value;
            stats.l2d += hm.value * inv_b;
            grad_aux.reserve(fwd.aux.size());
            for (const auto& m : hm.grad.maps) grad_aux.insert(grad_aux.end(), m.begin(), m.end());
        }
        stats.total += sample_loss * inv_b;
        Gradients g = backward(state, fwd.cache, grad_depths, grad_aux);
        accumulate(grads, g, inv_b);
    }
    sgd_step(state, grads);
    return stats;
}

}  // namespace

void run_stage(const StageConfig& stage, RegressorState& state, const TrainingData& data,
               const TrainPlan& plan, Rng& rng, std::vector<LogEntry>& log,
               const std::string& checkpoint_dir) {
    if (stage.iterations == 0) return;

    const std::vector<TrainingSample>* pool3d = &data.pool3d;
    const std::vector<TrainingSample>* pool2d =
        plan.use_2d_pool && !data.pool2d.empty() ? &data.pool2d : nullptr;
    if (!stage.train_depth) {
        // 2D-only warm-up stage draws from the weakly-labeled pool when present.
        if (pool2d) {
            pool3d = pool2d;
        }
        pool2d = nullptr;
    }

    RegressorState last_good = state;
    long last_good_step = state.step;
    StepStats acc;
    long since_log = 0;

    for (long it = 1; it <= stage.iterations; ++it) {
        const auto batch = sample_batch(pool3d, pool2d, plan.batch_size, rng);
        StepStats stats;
        try {
            stats = training_step(state, batch, data, plan, stage);
        } catch (const DivergenceError& e) {
            std::string path;
            if (!checkpoint_dir.empty()) {
                path = checkpoint_dir + "/checkpoint_last_good.json";
                save_checkpoint(last_good, path);
            }
            throw DivergenceError(std::string("stage '") + stage.name + "': " + e.what(),
                                  last_good_step + since_log + 1, path);
        }
        if (!std::isfinite(stats.total)) {
            std::string path;
            if (!checkpoint_dir.empty()) {
                path = checkpoint_dir + "/checkpoint_last_good.json";
                save_checkpoint(last_good, path);
            }
            throw DivergenceError("non-finite loss in stage '" + stage.name + "'", state.step,
                                  path);
        }

        acc.total += stats.total;
        acc.l2d += stats.l2d;
        acc.reg += stats.reg;
        acc.geo += stats.geo;
        ++since_log;
        if (it % plan.log_interval == 0 || it == stage.iterations) {
            const double n = static_cast<double>(since_log);
            log.push_back({stage.name, it, acc.total / n, acc.l2d / n, acc.reg / n, acc.geo / n});
            acc = StepStats{};
            since_log = 0;
            last_good = state;
            last_good_step = state.step;
        }
    }
}

TrainRunReport train(const TrainPlan& plan, const Dataset& data3d, const Dataset* data2d,
                     const Skeleton& skeleton, const std::string& out_dir,
                     std::vector<LogEntry>* log_out,
                     const std::optional<RegressorState>& resume_state) {
    plan.validate();
    if (plan.use_2d_pool && (!data2d || data2d->samples.empty()))
        throw ConfigError("plan uses the 2d pool but no 2d dataset was provided");

    const auto t0 = std::chrono::steady_clock::now();
    TrainingData data =
        prepare_training_data(data3d, plan.use_2d_pool ? data2d : nullptr, skeleton, plan);

    RegressorConfig reg_config;
    reg_config.input_dim = data.feature_dim;
    reg_config.hidden_dims = plan.hidden_dims;
    reg_config.activation = plan.activation;
    reg_config.output_dim = skeleton.joint_count();
    reg_config.aux_dim =
        plan.aux_res > 0 ? skeleton.joint_count() * plan.aux_res * plan.aux_res : 0;
    reg_config.seed = derive_seed(plan.seed, 100);
    reg_config.learning_rate = plan.learning_rate;
    reg_config.momentum = plan.momentum;

    RegressorState state;
    if (resume_state) {
        if (config_hash(resume_state->config) != config_hash(reg_config))
            throw ConfigError("resume checkpoint was built with a different configuration");
        state = *resume_state;
    } else {
        state = init_regressor(reg_config);
    }

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    TrainRunReport report;
    std::vector<LogEntry> local_log;
    std::vector<LogEntry>& log = log_out ? *log_out : local_log;

    if (plan.stage1_identity_check && !data.pool3d.empty()) {
        // render/decode sanity at full resolution before any training
        RenderSpec spec{plan.render_res, plan.render_res, data.field / plan.render_res,
                        plan.render_sigma};
        const auto& probe = data.pool3d.front();
        Pose2D px;
        px.pts.resize(probe.norm.joints2d.size());
        for (std::size_t j = 0; j < px.pts.size(); ++j)
            px.pts[j] = {probe.norm.joints2d.pts[j].x * data.field + data.field / 2,
                         probe.norm.joints2d.pts[j].y * data.field + data.field / 2};
        const auto decoded = decode_heatmaps(render_heatmaps(px, spec));
        for (std::size_t j = 0; j < px.pts.size(); ++j) {
            if (std::fabs(decoded.pose.pts[j].x - px.pts[j].x) > spec.stride / 2 + 1e-9 ||
                std::fabs(decoded.pose.pts[j].y - px.pts[j].y) > spec.stride / 2 + 1e-9)
                throw Error("render/decode identity check failed", 1);
        }
    }

    for (std::size_t s = 0; s < plan.stages.size(); ++s) {
        const StageConfig& stage = plan.stages[s];
        const auto stage_t0 = std::chrono::steady_clock::now();
        const std::size_t log_begin = log.size();

        Rng rng(derive_seed(plan.seed, s));
        run_stage(stage, state, data, plan, rng, log, out_dir);

        StageSummary summary;
        summary.name = stage.name;
        summary.iterations = stage.iterations;
        if (log.size() > log_begin) {
            summary.first_total = log[log_begin].total;
            summary.last_total = log.back().total;
            summary.last_geo = log.back().geo;
        }
        summary.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - stage_t0)
                              .count();
        if (!out_dir.empty()) {
            summary.checkpoint_path =
                out_dir + "/checkpoint_" + stage.name + ".json";
            save_checkpoint(state, summary.checkpoint_path);
        }
        report.stages.push_back(std::move(summary));
    }

    if (!out_dir.empty()) {
        report.final_checkpoint = out_dir + "/checkpoint_final.json";
        save_checkpoint(state, report.final_checkpoint);
        report.log_path = out_dir + "/train_log.jsonl";
        write_log_jsonl(log, report.log_path);
        write_log_csv(log, out_dir + "/train_log.csv");
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

void write_log_jsonl(const std::vector<LogEntry>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (const LogEntry& e : log) {
        json j;
        j["stage"] = e.stage;
        j["iter"] = e.iteration;
        j["total"] = e.total;
        j["l2d"] = e.l2d;
        j["reg"] = e.reg;
        j["geo"] = e.geo;
        out << j.dump() << "\n";
    }
}

void write_log_csv(const std::vector<LogEntry>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "stage,iter,total,l2d,reg,geo\n";
    out.precision(17);
    for (const LogEntry& e : log)
        out << e.stage << "," << e.iteration << "," << e.total << "," << e.l2d << "," << e.reg
            << "," << e.geo << "\n";
}

void save_predictor_spec(const PredictorSpec& spec, const std::string& path) {
    json j;
    j["format"] = "poselift-predictor";
    j["version"] = 1;
    j["checkpoint"] = spec.checkpoint;
    j["field"] = spec.field;
    j["heatmap_features"] = spec.heatmap_features;
    j["pooled_res"] = spec.pooled_res;
    j["render_res"] = spec.render_res;
    j["render_sigma"] = spec.render_sigma;
    j["skeleton_hash"] = spec.skeleton_hash;
    j["hidden_dims"] = spec.hidden_dims;
    j["aux_res"] = spec.aux_res;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

PredictorSpec load_predictor_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open predictor spec '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw DataValidationError("predictor spec is not valid JSON: " + std::string(e.what()));
    }
    try {
        if (j.value("format", "") != "poselift-predictor")
            throw DataValidationError("'" + path + "' is not a predictor spec");
        PredictorSpec spec;
        spec.checkpoint = j.at("checkpoint").get<std::string>();
        spec.field = j.at("field").get<double>();
        spec.heatmap_features = j.at("heatmap_features").get<bool>();
        spec.pooled_res = j.at("pooled_res").get<int>();
        spec.render_res = j.at("render_res").get<int>();
        spec.render_sigma = j.at("render_sigma").get<double>();
        spec.skeleton_hash = j.at("skeleton_hash").get<std::string>();
        spec.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
        spec.aux_res = j.at("aux_res").get<int>();
        return spec;
    } catch (const json::exception& e) {
        throw DataValidationError(std::string("bad predictor spec: ") + e.what());
    }
}

PredictorSpec predictor_spec_from_plan(const TrainPlan& plan, const Skeleton& skeleton,
                                       const std::string& checkpoint, double field) {
    PredictorSpec spec;
    spec.checkpoint = checkpoint;
    spec.field = field;
    spec.heatmap_features = plan.heatmap_features;
    spec.pooled_res = plan.pooled_res;
    spec.render_res = plan.render_res;
    spec.render_sigma = plan.render_sigma;
    spec.skeleton_hash = skeleton_hash(skeleton);
    spec.hidden_dims = plan.hidden_dims;
    spec.aux_res = plan.aux_res;
    return spec;
}

Predictor make_predictor(const PredictorSpec& spec, const RegressorState& state,
                         const Skeleton& skeleton) {
    if (spec.skeleton_hash != skeleton_hash(skeleton))
        throw ConfigError("predictor was trained against skeleton " + spec.skeleton_hash +
                          ", loaded skeleton is " + skeleton_hash(skeleton));
    TrainPlan feat_plan;
    feat_plan.heatmap_features = spec.heatmap_features;
    feat_plan.pooled_res = spec.pooled_res;
    feat_plan.render_res = spec.render_res;
    feat_plan.render_sigma = spec.render_sigma;
    const double field = spec.field;
    RegressorState net = state;  // shared immutable copy inside the closure
    return [net, skeleton, feat_plan, field](const PoseSample& sample) {
        const auto feats = featurize(sample, skeleton, feat_plan, field);
        const ForwardResult fwd = forward(net, feats);
        DepthVector px;
        px.d.resize(fwd.depths.size());
        for (std::size_t j = 0; j < px.d.size(); ++j) px.d[j] = fwd.depths.d[j] * field;
        return combine(sample.joints2d, px);
    };
}

}  // namespace poselift

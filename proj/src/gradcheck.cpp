// SPDX-License-Identifier: Apache-2.0
#include "poselift/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "poselift/dataset.hpp"
#include "poselift/heatmap.hpp"
#include "poselift/losses.hpp"
#include "poselift/regressor.hpp"
#include "poselift/rng.hpp"
#include "poselift/skeleton.hpp"

namespace poselift {

namespace {

double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
    return std::fabs(analytic - numeric) / denom;
}

// Four-joint chain with a two-bone group; small enough for exhaustive
// parameter sweeps.
Skeleton tiny_skeleton() {
    Skeleton s;
    s.joint_names = {"root", "a", "b", "c"};
    s.bones = {{"root_a", 0, 1}, {"a_b", 1, 2}, {"b_c", 2, 3}};
    s.canonical_lengths = {1.0, 0.8, 0.6};
    s.groups = {{"chain", {1, 2}}};
    s.root_joint = 0;
    s.neck_joint = 1;
    s.hip_joints = {2, 3};
    s.head_bone = 0;
    s.avg_sum_len = 2.4;
    return s;
}

struct GeoInstance {
    Pose2D joints2d;
    DepthVector depths;
};

GeoInstance random_geo_instance(const Skeleton& skeleton, Rng& rng) {
    const int J = skeleton.joint_count();
    for (;;) {
        GeoInstance inst;
        inst.joints2d.pts.resize(J);
        inst.depths.d.resize(J);
        for (int j = 0; j < J; ++j) {
            inst.joints2d.pts[j] = {rng.uniform(0.0, 256.0), rng.uniform(0.0, 256.0)};
            inst.depths.d[j] = rng.uniform(-40.0, 40.0);
        }
        bool degenerate = false;
        const Pose3D pose = combine(inst.joints2d, inst.depths);
        for (const BoneGroup& g : skeleton.groups)
            for (int b : g.bones)
                if (bone_length(pose, b, skeleton) < 0.5) degenerate = true;
        if (!degenerate) return inst;
    }
}

double check_geo(const Skeleton& skeleton, const GradCheckConfig& cfg, double flip, Rng& rng) {
    double worst = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
        GeoInstance inst = random_geo_instance(skeleton, rng);
        const GeoLossResult res = geo_loss(inst.depths, inst.joints2d, skeleton, 1.0, true);
        for (int j = 0; j < skeleton.joint_count(); ++j) {
            DepthVector d = inst.depths;
            d.d[j] += cfg.fd_step;
            const double lp = geo_loss(d, inst.joints2d, skeleton, 1.0, false).value;
            d.d[j] -= 2.0 * cfg.fd_step;
            const double lm = geo_loss(d, inst.joints2d, skeleton, 1.0, false).value;
            const double numeric = (lp - lm) / (2.0 * cfg.fd_step);
            worst = std::max(worst, rel_err(flip * res.grad_depth[j], numeric));
        }
    }
    return worst;
}

double check_heatmap(const GradCheckConfig& cfg, double flip, Rng& rng) {
    double worst = 0.0;
    const int res = 8, J = 3;
    for (int t = 0; t < std::max(1, cfg.trials / 4); ++t) {
        HeatmapStack pred, gt;
        for (HeatmapStack* s : {&pred, &gt}) {
            s->height = res;
            s->width = res;
            s->stride = 4.0;
            s->maps.assign(J, std::vector<double>(res * res));
            for (auto& m : s->maps)
                for (double& v : m) v = rng.uniform(-1.0, 1.0);
        }
        const HeatmapLossResult r = heatmap_loss(pred, gt);
        for (int j = 0; j < J; ++j)
            for (int i = 0; i < res * res; ++i) {
                HeatmapStack p = pred;
                p.maps[j][i] += cfg.fd_step;
                const double lp = heatmap_loss_value(p, gt);
                p.maps[j][i] -= 2.0 * cfg.fd_step;
                const double lm = heatmap_loss_value(p, gt);
                const double numeric = (lp - lm) / (2.0 * cfg.fd_step);
                worst = std::max(worst, rel_err(flip * r.grad.maps[j][i], numeric));
            }
    }
    return worst;
}

enum class NetBranch { reg3d, geo2d, aux };

// End-to-end parameter-gradient check on a tiny network; ReLU instances whose
// pre-activations sit within the finite-difference step of the kink are
// redrawn.
double check_net(const GradCheckConfig& cfg, NetBranch branch, double flip, Rng& rng) {
    const Skeleton skeleton = tiny_skeleton();
    const int J = skeleton.joint_count();
    const int aux_res = 2;

    double worst = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
        RegressorConfig rc;
        rc.input_dim = 2 * J;
        rc.hidden_dims = {8};
        rc.output_dim = J;
        rc.aux_dim = branch == NetBranch::aux ? J * aux_res * aux_res : 0;
        rc.seed = rng.next_u64();

        PoseSample sample;
        sample.id = "gc";
        HeatmapStack aux_target;
        std::vector<double> features;
        RegressorState state;

        for (int attempt = 0;; ++attempt) {
            state = init_regressor(rc);
            GeoInstance inst = random_geo_instance(skeleton, rng);
            // normalized-scale inputs, same regime as training
            sample.joints2d.pts.resize(J);
            features.clear();
            for (int j = 0; j < J; ++j) {
                sample.joints2d.pts[j] = {inst.joints2d.pts[j].x / 256.0,
                                          inst.joints2d.pts[j].y / 256.0};
                features.push_back(sample.joints2d.pts[j].x);
                features.push_back(sample.joints2d.pts[j].y);
            }
            if (branch == NetBranch::reg3d) {
                sample.supervision = Supervision::full3d;
                DepthVector gt;
                for (int j = 0; j < J; ++j) gt.d.push_back(rng.uniform(-0.3, 0.3));
                sample.depths = gt;
            } else {
                sample.supervision = Supervision::weak2d;
                sample.depths.reset();
            }
            if (branch == NetBranch::aux) {
                aux_target.height = aux_res;
                aux_target.width = aux_res;
                aux_target.stride = 1.0;
                aux_target.maps.assign(J, std::vector<double>(aux_res * aux_res));
                for (auto& m : aux_target.maps)
                    for (double& v : m) v = rng.uniform(0.0, 1.0);
            }
            const ForwardResult probe = forward(state, features);
            double min_abs_pre = 1.0;
            for (const auto& layer_pre : probe.cache.pre)
                for (double z : layer_pre) min_abs_pre = std::min(min_abs_pre, std::fabs(z));
            if (min_abs_pre > 1e-3 || attempt > 50) break;
        }

        LossWeights weights;  // defaults: lambda_reg 0.1, lambda_geo 0.01
        auto loss_of = [&](const RegressorState& s) {
            const ForwardResult fwd = forward(s, features);
            double loss = 0.0;
            if (branch == NetBranch::aux) {
                const HeatmapStack maps = stack_from_flat(fwd.aux, J, aux_res, 1.0);
                loss += heatmap_loss_value(maps, aux_target);
            } else {
                loss += depth_supervision_loss(fwd.depths, sample, skeleton, weights, 1.0, false)
                            .value;
            }
            return loss;
        };

        // analytic
        const ForwardResult fwd = forward(state, features);
        std::vector<double> grad_depths(J, 0.0);
        std::vector<double> grad_aux;
        if (branch == NetBranch::aux) {
            const HeatmapStack maps = stack_from_flat(fwd.aux, J, aux_res, 1.0);
            const HeatmapLossResult hm = heatmap_loss(maps, aux_target);
            for (const auto& m : hm.grad.maps) grad_aux.insert(grad_aux.end(), m.begin(), m.end());
        } else {
            grad_depths =
                depth_supervision_loss(fwd.depths, sample, skeleton, weights, 1.0, true)
                    .grad_depth;
        }
        const Gradients grads = backward(state, fwd.cache, grad_depths, grad_aux);

        for (std::size_t li = 0; li < state.layers.size(); ++li) {
            auto sweep = [&](std::vector<double>& params, const std::vector<double>& analytic) {
                for (std::size_t k = 0; k < params.size(); ++k) {
                    const double saved = params[k];
                    params[k] = saved + cfg.fd_step;
                    const double lp = loss_of(state);
                    params[k] = saved - cfg.fd_step;
                    const double lm = loss_of(state);
                    params[k] = saved;
                    const double numeric = (lp - lm) / (2.0 * cfg.fd_step);
                    worst = std::max(worst, rel_err(flip * analytic[k], numeric));
                }
            };
            sweep(state.layers[li].w.a, grads.layers[li].w.a);
            sweep(state.layers[li].b, grads.layers[li].b);
        }
    }
    return worst;
}

}  // namespace

GradCheckReport run_gradcheck(const GradCheckConfig& config) {
    GradCheckReport report;
    const Skeleton skeleton = default_skeleton().with_scaled_lengths(90.0);

    auto add = [&](const std::string& name, double worst, int trials) {
        report.components.push_back({name, worst, trials, worst < config.tolerance});
    };
    auto flip_of = [&](const std::string& name) {
        return config.inject_sign_flip == name ? -1.0 : 1.0;
    };

    {
        Rng rng(derive_seed(config.seed, 1));
        add("geo_loss", check_geo(skeleton, config, flip_of("geo_loss"), rng), config.trials);
    }
    {
        Rng rng(derive_seed(config.seed, 2));
        add("heatmap_loss", check_heatmap(config, flip_of("heatmap_loss"), rng),
            std::max(1, config.trials / 4));
    }
    {
        Rng rng(derive_seed(config.seed, 3));
        add("regressor_reg3d", check_net(config, NetBranch::reg3d, flip_of("regressor_reg3d"), rng),
            config.trials);
    }
    {
        Rng rng(derive_seed(config.seed, 4));
        add("regressor_geo2d", check_net(config, NetBranch::geo2d, flip_of("regressor_geo2d"), rng),
            config.trials);
    }
    {
        Rng rng(derive_seed(config.seed, 5));
        add("regressor_aux", check_net(config, NetBranch::aux, flip_of("regressor_aux"), rng),
            config.trials);
    }

    report.all_passed = true;
    for (const ComponentResult& c : report.components)
        if (!c.passed) report.all_passed = false;
    return report;
}

}  // namespace poselift

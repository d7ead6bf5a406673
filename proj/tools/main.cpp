// SPDX-License-Identifier: Apache-2.0
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "poselift/errors.hpp"

#ifndef POSELIFT_VERSION
#define POSELIFT_VERSION "v0.0.0"
#endif

namespace poselift::cli {

std::string tool_version() { return POSELIFT_VERSION; }

}  // namespace poselift::cli

int main(int argc, char** argv) {
    using namespace poselift::cli;

    CLI::App app{"poselift: weakly-supervised 3d pose training and evaluation toolkit"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);

    SynthOptions synth;
    auto* s = app.add_subcommand("synth", "generate the synthetic two-domain benchmark");
    s->set_config("--config");
    s->add_option("--seed", synth.seed, "generator seed");
    s->add_option("--out", synth.out, "output directory")->required();
    s->add_option("--samples3d", synth.samples3d, "lab-domain (3d) sample count");
    s->add_option("--samples2d", synth.samples2d, "wild-domain (2d) sample count");
    s->add_option("--samples3d-eval", synth.samples3d_eval, "held-out lab eval sample count");
    s->add_option("--subjects", synth.subjects, "subjects per domain");
    s->add_option("--proj", synth.proj, "projection scale, px per world unit");
    s->add_option("--field", synth.field, "image field size in px");
    s->add_option("--mm-per-px", synth.mm_per_px, "declared mm per px for evaluation");
    s->add_option("--depth-noise", synth.depth_noise, "std of label noise on 3d depths");
    s->add_option("--lab-angle-scale", synth.lab_angle, "lab articulation range multiplier");
    s->add_option("--wild-angle-scale", synth.wild_angle, "wild articulation range multiplier");
    s->add_option("--lab-scale", synth.lab_scale, "lab subject scale range (min max)")
        ->expected(2);
    s->add_option("--wild-scale", synth.wild_scale, "wild subject scale range (min max)")
        ->expected(2);

    TrainOptions train;
    auto* t = app.add_subcommand("train", "run the three-stage training schedule");
    t->set_config("--config");
    t->add_option("--data3d", train.data3d, "3d dataset file")->required();
    t->add_option("--data2d", train.data2d, "2d dataset file");
    t->add_option("--skeleton", train.skeleton, "skeleton schema file")->required();
    t->add_option("--out", train.out, "output directory")->required();
    t->add_option("--ablation", train.ablation, "3d | 3d-geo | mixed | mixed-geo");
    t->add_option("--seed", train.seed, "training seed");
    t->add_option("--stage-iters", train.stage_iters, "iterations for stages 1 2 3")
        ->expected(3);
    t->add_option("--batch", train.batch, "batch size");
    t->add_option("--lr", train.lr, "learning rate");
    t->add_option("--momentum", train.momentum, "SGD momentum");
    t->add_option("--lambda-reg", train.lambda_reg, "depth regression weight");
    t->add_option("--lambda-geo", train.lambda_geo, "geometric loss weight");
    t->add_option("--aux-res", train.aux_res, "aux heatmap head resolution (0 disables)");
    t->add_flag("--heatmap-features", train.heatmap_features,
                "fuse pooled heatmaps into the regressor input");
    t->add_option("--log-interval", train.log_interval, "iterations per log record");
    t->add_option("--hidden", train.hidden, "hidden layer sizes");
    t->add_option("--activation", train.activation, "relu | tanh");
    t->add_option("--resume", train.resume, "checkpoint to resume from");

    EvalOptions eval;
    auto* e = app.add_subcommand("eval", "evaluate a predictor against a labeled dataset");
    e->set_config("--config");
    e->add_option("--predictor", eval.predictor, "predictor spec (predictor.json)");
    e->add_option("--dataset", eval.dataset, "dataset with ground-truth depths")->required();
    e->add_option("--skeleton", eval.skeleton, "skeleton schema file")->required();
    e->add_option("--out", eval.out, "output directory")->required();
    e->add_option("--protocol", eval.protocol, "h36m | 3dhp | sym");
    e->add_flag("--oracle", eval.oracle, "use ground truth as the predictor");
    e->add_flag("--known-scale", eval.known_scale,
                "assume the global scale is known (skip AvgSumLen rescaling)");
    e->add_option("--sym-field", eval.sym_field, "normalization field for the symmetry metric");

    GradcheckOptions grad;
    auto* g = app.add_subcommand("gradcheck", "finite-difference gradient certification");
    g->add_option("--trials", grad.trials, "random instances per component");
    g->add_option("--seed", grad.seed, "rng seed");
    g->add_option("--inject-sign-flip", grad.inject,
                  "test hook: corrupt the named component's gradient");

    PredictOptions predict;
    auto* p = app.add_subcommand("predict", "write 3d predictions for a dataset");
    p->add_option("--predictor", predict.predictor, "predictor spec")->required();
    p->add_option("--input", predict.input, "input dataset (2d records suffice)")->required();
    p->add_option("--skeleton", predict.skeleton, "skeleton schema file")->required();
    p->add_option("--out", predict.out, "output JSON-lines file")->required();
    p->add_flag("--rescale", predict.rescale,
                "rescale output so the total bone length matches the canonical skeleton");

    ReportOptions report;
    auto* r = app.add_subcommand("report", "render metric reports as text tables");
    r->add_option("files", report.metrics_files, "metrics.json files")->required();
    r->add_option("--out", report.out_txt, "write the table to a file");
    r->add_option("--csv", report.out_csv, "write one summary row per report");

    try {
        app.parse(argc, argv);
        if (s->parsed()) return run_synth(synth);
        if (t->parsed()) return run_train(train);
        if (e->parsed()) return run_eval(eval);
        if (g->parsed()) return run_gradcheck(grad);
        if (p->parsed()) return run_predict(predict);
        if (r->parsed()) return run_report(report);
        return 2;
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    } catch (const poselift::Error& err) {
        std::cerr << "poselift: " << err.what() << "\n";
        return err.exit_code();
    } catch (const std::exception& err) {
        std::cerr << "poselift: unexpected error: " << err.what() << "\n";
        return 1;
    }
}

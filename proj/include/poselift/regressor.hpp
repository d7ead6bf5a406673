// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poselift/pose.hpp"

namespace poselift {

struct RegressorConfig {
    int input_dim = 32;  // 2J normalized coordinates by default
    std::vector<int> hidden_dims{128, 128};
    int output_dim = 16;  // J depths
    int aux_dim = 0;      // flattened low-res heatmap head; 0 disables it
    std::string activation = "relu";
    std::uint64_t seed = 1;
    double learning_rate = 2.5e-3;
    double momentum = 0.9;
    // Per-layer learning-rate multipliers: trunk layers first, then the depth
    // head, then the aux head. Empty means all ones; 0 freezes a layer.
    std::vector<double> lr_scale;

    int layer_count() const {
        return static_cast<int>(hidden_dims.size()) + 1 + (aux_dim > 0 ? 1 : 0);
    }
};

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // row-major

    double& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

struct Layer {
    Matrix w;
    std::vector<double> b;
};

struct RegressorState {
    RegressorConfig config;
    std::vector<Layer> layers;      // trunk..., depth head, [aux head]
    std::vector<Layer> velocity;    // same shapes
    long step = 0;

    int trunk_layers() const { return static_cast<int>(config.hidden_dims.size()); }
    int depth_head_index() const { return trunk_layers(); }
    int aux_head_index() const { return config.aux_dim > 0 ? trunk_layers() + 1 : -1; }
};

struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // trunk pre-activations
    std::vector<std::vector<double>> post;  // trunk activations
    long step = -1;                         // state step at forward time
};

struct ForwardResult {
    DepthVector depths;
    std::vector<double> aux;  // empty when the aux head is disabled
    ForwardCache cache;
};

struct Gradients {
    std::vector<Layer> layers;  // same shapes as RegressorState::layers
};

// Deterministic given config.seed: uniform +-sqrt(6/(fan_in+fan_out)) weights,
// zero biases, zero velocities.
RegressorState init_regressor(const RegressorConfig& config);

ForwardResult forward(const RegressorState& state, const std::vector<double>& features);

// Exact reverse-mode gradients of any scalar loss whose gradients w.r.t. the
// depth (and aux) outputs are supplied. Throws UsageError when the cache was
// taken at a different step than the current state.
Gradients backward(const RegressorState& state, const ForwardCache& cache,
                   const std::vector<double>& grad_depths,
                   const std::vector<double>& grad_aux = {});

Gradients zero_gradients(const RegressorState& state);
void accumulate(Gradients& into, const Gradients& g, double scale = 1.0);

// v <- momentum*v - lr*lr_scale*g;  w <- w + v. Throws DivergenceError on a
// non-finite gradient or parameter, reporting the step index.
void sgd_step(RegressorState& state, const Gradients& grads);

std::string config_hash(const RegressorConfig& config);

// Versioned JSON checkpoint carrying config, parameters, velocities and step.
// Loading verifies the stored config hash; load_checkpoint with an expected
// config refuses on hash mismatch.
void save_checkpoint(const RegressorState& state, const std::string& path);
RegressorState load_checkpoint(const std::string& path,
                               const std::optional<RegressorConfig>& expected = std::nullopt);

}  // namespace poselift

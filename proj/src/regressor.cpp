// SPDX-License-Identifier: Apache-2.0
#include "poselift/regressor.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "poselift/errors.hpp"
#include "poselift/rng.hpp"

namespace poselift {

using nlohmann::json;

namespace {

void validate_config(const RegressorConfig& c) {
    if (c.input_dim < 1) throw ConfigError("input_dim must be >= 1");
    if (c.output_dim < 1) throw ConfigError("output_dim must be >= 1");
    if (c.aux_dim < 0) throw ConfigError("aux_dim must be >= 0");
    for (int h : c.hidden_dims)
        if (h < 1) throw ConfigError("hidden layer dims must be >= 1");
    if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(c.momentum >= 0.0 && c.momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
    if (c.activation != "relu" && c.activation != "tanh")
        throw ConfigError("unknown activation '" + c.activation + "'");
    if (!c.lr_scale.empty() && static_cast<int>(c.lr_scale.size()) != c.layer_count())
        throw ConfigError("lr_scale must have one entry per layer (" +
                          std::to_string(c.layer_count()) + ")");
}

std::vector<std::pair<int, int>> layer_shapes(const RegressorConfig& c) {
    std::vector<std::pair<int, int>> shapes;  // (out, in)
    int in = c.input_dim;
    for (int h : c.hidden_dims) {
        shapes.emplace_back(h, in);
        in = h;
    }
    shapes.emplace_back(c.output_dim, in);
    if (c.aux_dim > 0) shapes.emplace_back(c.aux_dim, in);
    return shapes;
}

double act(double z, const std::string& name) {
    if (name == "relu") return z > 0.0 ? z : 0.0;
    return std::tanh(z);
}

double act_grad(double z, const std::string& name) {
    if (name == "relu") return z > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(z);
    return 1.0 - t * t;
}

std::vector<double> affine(const Layer& layer, const std::vector<double>& x) {
    std::vector<double> out(layer.w.rows);
    for (int r = 0; r < layer.w.rows; ++r) {
        double acc = layer.b[r];
        const double* row = layer.w.a.data() + static_cast<std::size_t>(r) * layer.w.cols;
        for (int c = 0; c < layer.w.cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
    return out;
}

bool all_finite(const Layer& l) {
    for (double v : l.w.a)
        if (!std::isfinite(v)) return false;
    for (double v : l.b)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

RegressorState init_regressor(const RegressorConfig& config) {
    validate_config(config);
    RegressorState state;
    state.config = config;
    Rng rng(config.seed);
    for (const auto& [out_dim, in_dim] : layer_shapes(config)) {
        Layer layer;
        layer.w.rows = out_dim;
        layer.w.cols = in_dim;
        layer.w.a.resize(static_cast<std::size_t>(out_dim) * in_dim);
        const double bound = std::sqrt(6.0 / (in_dim + out_dim));
        for (double& v : layer.w.a) v = rng.uniform(-bound, bound);
        layer.b.assign(out_dim, 0.0);
        state.layers.push_back(layer);

        Layer vel;
        vel.w.rows = out_dim;
        vel.w.cols = in_dim;
        vel.w.a.assign(layer.w.a.size(), 0.0);
        vel.b.assign(out_dim, 0.0);
        state.velocity.push_back(std::move(vel));
    }
    return state;
}

ForwardResult forward(const RegressorState& state, const std::vector<double>& features) {
    if (static_cast<int>(features.size()) != state.config.input_dim)
        throw DimensionError("feature vector has " + std::to_string(features.size()) +
                             " entries, regressor expects " +
                             std::to_string(state.config.input_dim));

    ForwardResult res;
    res.cache.input = features;
    res.cache.step = state.step;

    const std::vector<double>* x = &res.cache.input;
    for (int i = 0; i < state.trunk_layers(); ++i) {
        res.cache.pre.push_back(affine(state.layers[i], *x));
        std::vector<double> a(res.cache.pre.back().size());
        for (std::size_t k = 0; k < a.size(); ++k)
            a[k] = act(res.cache.pre.back()[k], state.config.activation);
        res.cache.post.push_back(std::move(a));
        x = &res.cache.post.back();
    }

    res.depths.d = affine(state.layers[state.depth_head_index()], *x);
    if (state.aux_head_index() >= 0) res.aux = affine(state.layers[state.aux_head_index()], *x);
    return res;
}

Gradients zero_gradients(const RegressorState& state) {
    Gradients g;
    for (const Layer& l : state.layers) {
        Layer z;
        z.w.rows = l.w.rows;
        z.w.cols = l.w.cols;
        z.w.a.assign(l.w.a.size(), 0.0);
        z.b.assign(l.b.size(), 0.0);
        g.layers.push_back(std::move(z));
    }
    return g;
}

void accumulate(Gradients& into, const Gradients& g, double scale) {
    if (into.layers.size() != g.layers.size())
        throw DimensionError("gradient accumulators differ in layer count");
    for (std::size_t i = 0; i < g.layers.size(); ++i) {
        for (std::size_t k = 0; k < g.layers[i].w.a.size(); ++k)
            into.layers[i].w.a[k] += scale * g.layers[i].w.a[k];
        for (std::size_t k = 0; k < g.layers[i].b.size(); ++k)
            into.layers[i].b[k] += scale * g.layers[i].b[k];
    }
}

Gradients backward(const RegressorState& state, const ForwardCache& cache,
                   const std::vector<double>& grad_depths, const std::vector<double>& grad_aux) {
    if (cache.step != state.step)
        throw UsageError("stale forward cache: taken at step " + std::to_string(cache.step) +
                         ", state is at step " + std::to_string(state.step));
    if (static_cast<int>(grad_depths.size()) != state.config.output_dim)
        throw DimensionError("grad_depths size mismatch");
    const bool has_aux = state.aux_head_index() >= 0;
    if (!grad_aux.empty() && !has_aux)
        throw UsageError("aux gradient supplied but the aux head is disabled");
    if (has_aux && !grad_aux.empty() &&
        static_cast<int>(grad_aux.size()) != state.config.aux_dim)
        throw DimensionError("grad_aux size mismatch");

    Gradients grads = zero_gradients(state);
    const int T = state.trunk_layers();
    const std::vector<double>& last =
        T > 0 ? cache.post.back() : cache.input;

    // heads
    std::vector<double> g_last(last.size(), 0.0);
    auto head_backward = [&](int layer_idx, const std::vector<double>& g_out) {
        const Layer& head = state.layers[layer_idx];
        Layer& hg = grads.layers[layer_idx];
        for (int r = 0; r < head.w.rows; ++r) {
            const double go = g_out[r];
            hg.b[r] += go;
            if (go == 0.0) continue;
            const double* wrow = head.w.a.data() + static_cast<std::size_t>(r) * head.w.cols;
            double* grow = hg.w.a.data() + static_cast<std::size_t>(r) * head.w.cols;
            for (int c = 0; c < head.w.cols; ++c) {
                grow[c] += go * last[c];
                g_last[c] += go * wrow[c];
            }
        }
    };
    head_backward(state.depth_head_index(), grad_depths);
    if (has_aux && !grad_aux.empty()) head_backward(state.aux_head_index(), grad_aux);

    // trunk
    std::vector<double> g_post = std::move(g_last);
    for (int i = T - 1; i >= 0; --i) {
        const Layer& layer = state.layers[i];
        Layer& lg = grads.layers[i];
        const std::vector<double>& in = i > 0 ? cache.post[i - 1] : cache.input;
        std::vector<double> g_in(in.size(), 0.0);
        for (int r = 0; r < layer.w.rows; ++r) {
            const double gz = g_post[r] * act_grad(cache.pre[i][r], state.config.activation);
            lg.b[r] += gz;
            if (gz == 0.0) continue;
            const double* wrow = layer.w.a.data() + static_cast<std::size_t>(r) * layer.w.cols;
            double* grow = lg.w.a.data() + static_cast<std::size_t>(r) * layer.w.cols;
            for (int c = 0; c < layer.w.cols; ++c) {
                grow[c] += gz * in[c];
                g_in[c] += gz * wrow[c];
            }
        }
        g_post = std::move(g_in);
    }
    return grads;
}

void sgd_step(RegressorState& state, const Gradients& grads) {
    if (grads.layers.size() != state.layers.size())
        throw DimensionError("gradient layer count mismatch");
    for (std::size_t i = 0; i < state.layers.size(); ++i)
        if (!all_finite(grads.layers[i]))
            throw DivergenceError("non-finite gradient in layer " + std::to_string(i),
                                  state.step);

    const double lr = state.config.learning_rate;
    const double mom = state.config.momentum;
    for (std::size_t i = 0; i < state.layers.size(); ++i) {
        const double scale =
            state.config.lr_scale.empty() ? 1.0 : state.config.lr_scale[i];
        Layer& w = state.layers[i];
        Layer& v = state.velocity[i];
        const Layer& g = grads.layers[i];
        for (std::size_t k = 0; k < w.w.a.size(); ++k) {
            v.w.a[k] = mom * v.w.a[k] - lr * scale * g.w.a[k];
            w.w.a[k] += v.w.a[k];
        }
        for (std::size_t k = 0; k < w.b.size(); ++k) {
            v.b[k] = mom * v.b[k] - lr * scale * g.b[k];
            w.b[k] += v.b[k];
        }
    }
    ++state.step;
    for (std::size_t i = 0; i < state.layers.size(); ++i)
        if (!all_finite(state.layers[i]))
            throw DivergenceError("non-finite parameter in layer " + std::to_string(i),
                                  state.step);
}

namespace {

json config_to_json(const RegressorConfig& c) {
    json j;
    j["input_dim"] = c.input_dim;
    j["hidden_dims"] = c.hidden_dims;
    j["output_dim"] = c.output_dim;
    j["aux_dim"] = c.aux_dim;
    j["activation"] = c.activation;
    j["seed"] = c.seed;
    j["learning_rate"] = c.learning_rate;
    j["momentum"] = c.momentum;
    j["lr_scale"] = c.lr_scale;
    return j;
}

RegressorConfig config_from_json(const json& j) {
    RegressorConfig c;
    c.input_dim = j.at("input_dim").get<int>();
    c.hidden_dims = j.at("hidden_dims").get<std::vector<int>>();
    c.output_dim = j.at("output_dim").get<int>();
    c.aux_dim = j.at("aux_dim").get<int>();
    c.activation = j.at("activation").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.momentum = j.at("momentum").get<double>();
    c.lr_scale = j.at("lr_scale").get<std::vector<double>>();
    return c;
}

json layer_to_json(const Layer& l) {
    return json{{"rows", l.w.rows}, {"cols", l.w.cols}, {"w", l.w.a}, {"b", l.b}};
}

Layer layer_from_json(const json& j) {
    Layer l;
    l.w.rows = j.at("rows").get<int>();
    l.w.cols = j.at("cols").get<int>();
    l.w.a = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    if (static_cast<int>(l.w.a.size()) != l.w.rows * l.w.cols ||
        static_cast<int>(l.b.size()) != l.w.rows)
        throw DataValidationError("checkpoint layer shape mismatch");
    return l;
}

}  // namespace

std::string config_hash(const RegressorConfig& config) {
    const std::string text = config_to_json(config).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void save_checkpoint(const RegressorState& state, const std::string& path) {
    json j;
    j["format"] = "poselift-checkpoint";
    j["version"] = 1;
    j["config"] = config_to_json(state.config);
    j["config_hash"] = config_hash(state.config);
    j["step"] = state.step;
    j["layers"] = json::array();
    for (const Layer& l : state.layers) j["layers"].push_back(layer_to_json(l));
    j["velocity"] = json::array();
    for (const Layer& l : state.velocity) j["velocity"].push_back(layer_to_json(l));
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open checkpoint '" + path + "' for writing");
    out << j.dump() << "\n";
}

RegressorState load_checkpoint(const std::string& path,
                               const std::optional<RegressorConfig>& expected) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw DataValidationError("checkpoint '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.value("format", "") != "poselift-checkpoint")
            throw DataValidationError("'" + path + "' is not a poselift checkpoint");
        RegressorState state;
        state.config = config_from_json(j.at("config"));
        const std::string stored_hash = j.at("config_hash").get<std::string>();
        if (stored_hash != config_hash(state.config))
            throw DataValidationError("checkpoint config hash does not match its config body");
        if (expected && config_hash(*expected) != stored_hash)
            throw ConfigError("checkpoint config hash " + stored_hash +
                              " does not match the requested config " + config_hash(*expected));
        state.step = j.at("step").get<long>();
        for (const auto& lj : j.at("layers")) state.layers.push_back(layer_from_json(lj));
        for (const auto& lj : j.at("velocity")) state.velocity.push_back(layer_from_json(lj));
        if (state.layers.size() != state.velocity.size() ||
            static_cast<int>(state.layers.size()) != state.config.layer_count())
            throw DataValidationError("checkpoint layer count mismatch");
        return state;
    } catch (const json::exception& e) {
        throw DataValidationError(std::string("bad checkpoint: ") + e.what());
    }
}

}  // namespace poselift

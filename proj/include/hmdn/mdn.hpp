// Mixture density network: a feed-forward net whose affine output layer is
// split into mixing, scale and location activations of an isotropic Gaussian
// mixture over the target.
//
// Output layout for K components and target dimension D:
//   [ a_pi (K) | a_sigma (K) | a_mu (K*D, component-major) ]
//
// Inputs and targets are standardized inside the model boundary. Targets use
// per-dimension means but a single shared scale s, so an isotropic component in
// standardized space stays isotropic in the caller's units (sigma = s * sigma').
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmdn/numcore.hpp"

namespace hmdn {

enum class HiddenActivation { tanh, relu };
enum class OptimizerKind { sgd, adam };

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    friend bool operator==(const AdamSettings&, const AdamSettings&) = default;
};

struct MdnConfig {
    std::size_t input_dim = 1;
    std::size_t target_dim = 1;
    std::size_t n_components = 1;
    std::vector<std::size_t> hidden_layers{64, 64};
    HiddenActivation hidden_activation = HiddenActivation::tanh;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::adam;
    AdamSettings adam{};
    std::size_t epochs = 2000;
    std::size_t batch_size = 64;
    double sigma_floor = 1e-3;
    // Stop once the best epoch loss has not improved for this many epochs; 0 disables.
    std::size_t patience = 50;
    bool standardize = true;
    std::uint64_t seed = 0;

    std::size_t output_width() const noexcept {
        return 2 * n_components + n_components * target_dim;
    }

    void validate() const {
        if (input_dim < 1) throw ArgumentError("MdnConfig: input_dim must be >= 1");
        if (target_dim < 1) throw ArgumentError("MdnConfig: target_dim must be >= 1");
        if (n_components < 1) throw ArgumentError("MdnConfig: n_components must be >= 1");
        if (!(sigma_floor > 0.0)) throw ArgumentError("MdnConfig: sigma_floor must be positive");
        if (epochs < 1) throw ArgumentError("MdnConfig: epochs must be >= 1");
        if (batch_size < 1) throw ArgumentError("MdnConfig: batch_size must be >= 1");
        if (!(learning_rate > 0.0)) throw ArgumentError("MdnConfig: learning_rate must be positive");
        for (auto w : hidden_layers) {
            if (w < 1) throw ArgumentError("MdnConfig: hidden layer width must be >= 1");
        }
    }

    friend bool operator==(const MdnConfig&, const MdnConfig&) = default;
};

struct Activations {
    Vector a_pi;
    Vector a_sigma;
    Vector a_mu;
};

struct MixtureParams {
    Vector pi;
    Vector sigma;
    std::vector<Vector> mu;

    std::size_t n_components() const noexcept { return pi.size(); }
    std::size_t dim() const noexcept { return mu.empty() ? 0 : mu.front().size(); }
};

/// Output-layer derivatives of the per-sample negative log-likelihood.
struct GradWorkspace {
    Vector gamma;
    Vector d_a_pi;
    Vector d_a_sigma;
    Vector d_a_mu;
};

struct Layer {
    Matrix weights;  // out x in
    Vector bias;     // out

    friend bool operator==(const Layer&, const Layer&) = default;
};

struct Standardization {
    Vector input_mean;
    Vector input_scale;
    Vector target_mean;
    double target_scale = 1.0;

    static Standardization identity(std::size_t input_dim, std::size_t target_dim) {
        return {Vector(input_dim, 0.0), Vector(input_dim, 1.0), Vector(target_dim, 0.0), 1.0};
    }

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct Sample {
    Vector x;
    Vector y;
};

using Dataset = std::vector<Sample>;

class MdnModel {
public:
    MdnModel(MdnConfig config, std::vector<Layer> layers, Standardization stats,
             std::vector<double> training_log = {},
             double final_nll = std::numeric_limits<double>::quiet_NaN())
        : config_(std::move(config)),
          layers_(std::move(layers)),
          stats_(std::move(stats)),
          training_log_(std::move(training_log)),
          final_nll_(final_nll) {
        check_shapes();
    }

    /// Glorot-uniform weights, zero biases, identity standardization.
    static MdnModel initialize(const MdnConfig& config, Rng& rng) {
        config.validate();
        std::vector<Layer> layers;
        std::size_t fan_in = config.input_dim;
        auto add_layer = [&](std::size_t fan_out) {
            Layer layer{Matrix(fan_out, fan_in), Vector(fan_out, 0.0)};
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            for (double& w : layer.weights.data()) w = rng.uniform(-limit, limit);
            layers.push_back(std::move(layer));
            fan_in = fan_out;
        };
        for (auto width : config.hidden_layers) add_layer(width);
        add_layer(config.output_width());
        return MdnModel(config, std::move(layers),
                        Standardization::identity(config.input_dim, config.target_dim));
    }

    const MdnConfig& config() const noexcept { return config_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const Standardization& standardization() const noexcept { return stats_; }
    const std::vector<double>& training_log() const noexcept { return training_log_; }
    double final_nll() const noexcept { return final_nll_; }

    /// Same weights with different bookkeeping; used by the trainer.
    MdnModel with_training_result(std::vector<double> log, double final_nll) const {
        return MdnModel(config_, layers_, stats_, std::move(log), final_nll);
    }

private:
    void check_shapes() const {
        config_.validate();
        if (layers_.size() != config_.hidden_layers.size() + 1) {
            throw ShapeError("MdnModel: expected " + std::to_string(config_.hidden_layers.size() + 1) +
                             " layers, got " + std::to_string(layers_.size()));
        }
        std::size_t fan_in = config_.input_dim;
        for (std::size_t l = 0; l < layers_.size(); ++l) {
            const std::size_t fan_out =
                l + 1 == layers_.size() ? config_.output_width() : config_.hidden_layers[l];
            const auto& layer = layers_[l];
            if (layer.weights.rows() != fan_out || layer.weights.cols() != fan_in ||
                layer.bias.size() != fan_out) {
                throw ShapeError("MdnModel: layer " + std::to_string(l) + " has shape " +
                                 layer.weights.shape_string() + ", expected " +
                                 std::to_string(fan_out) + "x" + std::to_string(fan_in));
            }
            fan_in = fan_out;
        }
        if (stats_.input_mean.size() != config_.input_dim || stats_.input_scale.size() != config_.input_dim ||
            stats_.target_mean.size() != config_.target_dim || !(stats_.target_scale > 0.0)) {
            throw ShapeError("MdnModel: standardization statistics do not match config dimensions");
        }
    }

    MdnConfig config_;
    std::vector<Layer> layers_;
    Standardization stats_;
    std::vector<double> training_log_;
    double final_nll_;
};

namespace detail {

inline double activate(HiddenActivation act, double v) noexcept {
    return act == HiddenActivation::tanh ? std::tanh(v) : (v > 0.0 ? v : 0.0);
}

// Derivative expressed through the activation output h.
inline double activate_grad(HiddenActivation act, double h) noexcept {
    return act == HiddenActivation::tanh ? 1.0 - h * h : (h > 0.0 ? 1.0 : 0.0);
}

/// Forward pass on an already standardized input; fills every layer's output.
inline void forward_layers(const std::vector<Layer>& layers, HiddenActivation act,
                           std::span<const double> x, std::vector<Vector>& outputs) {
    outputs.resize(layers.size());
    std::span<const double> in = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        auto& out = outputs[l];
        out.resize(layer.bias.size());
        const bool hidden = l + 1 < layers.size();
        for (std::size_t o = 0; o < out.size(); ++o) {
            const double z = layer.bias[o] + dot(layer.weights.row(o), in);
            out[o] = hidden ? activate(act, z) : z;
        }
        in = out;
    }
}

inline Vector standardize_input(const Standardization& s, std::span<const double> x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - s.input_mean[i]) / s.input_scale[i];
    return out;
}

inline Vector standardize_target(const Standardization& s, std::span<const double> y) {
    Vector out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = (y[i] - s.target_mean[i]) / s.target_scale;
    return out;
}

inline Activations split_output(std::span<const double> out, std::size_t k, std::size_t d) {
    Activations a;
    a.a_pi.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(k));
    a.a_sigma.assign(out.begin() + static_cast<std::ptrdiff_t>(k),
                     out.begin() + static_cast<std::ptrdiff_t>(2 * k));
    a.a_mu.assign(out.begin() + static_cast<std::ptrdiff_t>(2 * k),
                  out.begin() + static_cast<std::ptrdiff_t>(2 * k + k * d));
    return a;
}

// Per-component log(pi_k N(y | mu_k, sigma_k^2 I)).
inline Vector component_log_terms(const MixtureParams& p, std::span<const double> y) {
    const auto d = static_cast<double>(y.size());
    Vector terms(p.n_components());
    for (std::size_t k = 0; k < terms.size(); ++k) {
        double sq = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double diff = y[i] - p.mu[k][i];
            sq += diff * diff;
        }
        const double var = p.sigma[k] * p.sigma[k];
        terms[k] = std::log(p.pi[k]) - 0.5 * d * std::log(2.0 * std::numbers::pi * var) - 0.5 * sq / var;
    }
    return terms;
}

}  // namespace detail

/// Raw output activations for input x (standardization applied first).
inline Activations forward(const MdnModel& model, std::span<const double> x) {
    const auto& cfg = model.config();
    if (x.size() != cfg.input_dim) {
        throw ShapeError("forward: input has dimension " + std::to_string(x.size()) + ", model expects " +
                         std::to_string(cfg.input_dim));
    }
    std::vector<Vector> outputs;
    const Vector xs = detail::standardize_input(model.standardization(), x);
    detail::forward_layers(model.layers(), cfg.hidden_activation, xs, outputs);
    return detail::split_output(outputs.back(), cfg.n_components, cfg.target_dim);
}

/// softmax for pi, floored exp for sigma, identity for mu.
inline MixtureParams activations_to_params(const Activations& a, double sigma_floor) {
    const std::size_t k = a.a_pi.size();
    if (a.a_sigma.size() != k || k == 0 || a.a_mu.size() % k != 0) {
        throw ShapeError("activations_to_params: inconsistent activation lengths");
    }
    const std::size_t d = a.a_mu.size() / k;
    MixtureParams p;
    p.pi.resize(k);
    p.sigma.resize(k);
    p.mu.assign(k, Vector(d));
    const double lse = log_sum_exp(a.a_pi);
    for (std::size_t c = 0; c < k; ++c) {
        p.pi[c] = std::exp(a.a_pi[c] - lse);
        p.sigma[c] = std::max(std::exp(a.a_sigma[c]), sigma_floor);
        for (std::size_t i = 0; i < d; ++i) p.mu[c][i] = a.a_mu[c * d + i];
    }
    return p;
}

/// Mixture over the target in the caller's units.
inline MixtureParams mixture(const MdnModel& model, std::span<const double> x) {
    const auto& s = model.standardization();
    MixtureParams p = activations_to_params(forward(model, x), model.config().sigma_floor / s.target_scale);
    for (std::size_t c = 0; c < p.n_components(); ++c) {
        p.sigma[c] *= s.target_scale;
        for (std::size_t i = 0; i < p.mu[c].size(); ++i) p.mu[c][i] = s.target_mean[i] + s.target_scale * p.mu[c][i];
    }
    return p;
}

inline double log_density(const MixtureParams& params, std::span<const double> y) {
    if (y.size() != params.dim()) {
        throw ShapeError("density: target has dimension " + std::to_string(y.size()) + ", mixture has " +
                         std::to_string(params.dim()));
    }
    return log_sum_exp(detail::component_log_terms(params, y));
}

inline double density(const MixtureParams& params, std::span<const double> y) {
    return std::exp(log_density(params, y));
}

/// Batch-mean negative log-likelihood.
inline double nll(const MdnModel& model, std::span<const Sample> batch) {
    if (batch.empty()) throw ArgumentError("nll: empty batch");
    double total = 0.0;
    for (const auto& s : batch) total -= log_density(mixture(model, s.x), s.y);
    return total / static_cast<double>(batch.size());
}

/// Responsibilities and output-activation derivatives of -ln p(y) for one sample.
/// `params` must come from `a` with the same floor; gradients through a floored
/// sigma are zero.
inline GradWorkspace output_gradient(const Activations& a, const MixtureParams& params,
                                     std::span<const double> y, double sigma_floor) {
    const std::size_t k = params.n_components();
    const std::size_t d = params.dim();
    GradWorkspace g;
    Vector terms = detail::component_log_terms(params, y);
    const double lse = log_sum_exp(terms);
    g.gamma.resize(k);
    g.d_a_pi.resize(k);
    g.d_a_sigma.resize(k);
    g.d_a_mu.resize(k * d);
    for (std::size_t c = 0; c < k; ++c) {
        const double gamma = std::exp(terms[c] - lse);
        g.gamma[c] = gamma;
        g.d_a_pi[c] = params.pi[c] - gamma;
        const double var = params.sigma[c] * params.sigma[c];
        double sq = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = params.mu[c][i] - y[i];
            sq += diff * diff;
            g.d_a_mu[c * d + i] = gamma * diff / var;
        }
        const bool floored = std::exp(a.a_sigma[c]) < sigma_floor;
        g.d_a_sigma[c] = floored ? 0.0 : gamma * (static_cast<double>(d) - sq / var);
    }
    return g;
}

/// Gradient set shaped like the model's layers.
using Gradients = std::vector<Layer>;

namespace detail {

inline Gradients zero_gradients(const std::vector<Layer>& layers) {
    Gradients g;
    g.reserve(layers.size());
    for (const auto& l : layers) g.push_back({Matrix(l.weights.rows(), l.weights.cols()), Vector(l.bias.size(), 0.0)});
    return g;
}

/// Accumulates d(mean NLL)/d(weights) over a batch of standardized samples into
/// `grads` and returns the summed standardized NLL.
class Backprop {
public:
    double accumulate(const std::vector<Layer>& layers, const MdnConfig& cfg, double floor,
                      std::span<const double> xs, std::span<const double> ys, double weight,
                      Gradients& grads) {
        detail::forward_layers(layers, cfg.hidden_activation, xs, outputs_);
        const Activations a = split_output(outputs_.back(), cfg.n_components, cfg.target_dim);
        const MixtureParams p = activations_to_params(a, floor);
        const GradWorkspace g = output_gradient(a, p, ys, floor);
        const double loss = -log_sum_exp(component_log_terms(p, ys));

        const std::size_t k = cfg.n_components;
        delta_.resize(cfg.output_width());
        std::copy(g.d_a_pi.begin(), g.d_a_pi.end(), delta_.begin());
        std::copy(g.d_a_sigma.begin(), g.d_a_sigma.end(), delta_.begin() + static_cast<std::ptrdiff_t>(k));
        std::copy(g.d_a_mu.begin(), g.d_a_mu.end(), delta_.begin() + static_cast<std::ptrdiff_t>(2 * k));
        for (double& v : delta_) v *= weight;

        for (std::size_t l = layers.size(); l-- > 0;) {
            const std::span<const double> in = l == 0 ? xs : std::span<const double>(outputs_[l - 1]);
            auto& gl = grads[l];
            const auto& W = layers[l].weights;
            const bool propagate = l > 0;
            if (propagate) prev_.assign(in.size(), 0.0);
            for (std::size_t o = 0; o < delta_.size(); ++o) {
                const double dv = delta_[o];
                if (dv == 0.0) continue;
                gl.bias[o] += dv;
                auto grow = gl.weights.row(o);
                for (std::size_t i = 0; i < in.size(); ++i) grow[i] += dv * in[i];
                if (propagate) {
                    const auto wrow = W.row(o);
                    for (std::size_t i = 0; i < in.size(); ++i) prev_[i] += dv * wrow[i];
                }
            }
            if (propagate) {
                for (std::size_t i = 0; i < prev_.size(); ++i) prev_[i] *= activate_grad(cfg.hidden_activation, in[i]);
                delta_.swap(prev_);
            }
        }
        return loss;
    }

private:
    std::vector<Vector> outputs_;
    Vector delta_;
    Vector prev_;
};

}  // namespace detail

/// Exact gradient of nll(model, batch) with respect to every weight and bias.
inline Gradients gradients(const MdnModel& model, std::span<const Sample> batch) {
    if (batch.empty()) throw ArgumentError("gradients: empty batch");
    const auto& cfg = model.config();
    const auto& s = model.standardization();
    Gradients grads = detail::zero_gradients(model.layers());
    detail::Backprop bp;
    const double w = 1.0 / static_cast<double>(batch.size());
    for (const auto& sample : batch) {
        if (sample.x.size() != cfg.input_dim || sample.y.size() != cfg.target_dim) {
            throw ShapeError("gradients: sample dimensions do not match model");
        }
        const Vector xs = detail::standardize_input(s, sample.x);
        const Vector ys = detail::standardize_target(s, sample.y);
        bp.accumulate(model.layers(), cfg, cfg.sigma_floor / s.target_scale, xs, ys, w, grads);
    }
    return grads;
}

/// Ancestral sampling: k ~ Categorical(pi) by cumulative-sum inversion
/// (first k with u < cumsum_k), then an isotropic Gaussian draw around mu_k.
inline std::vector<Vector> sample(const MixtureParams& params, std::size_t m, Rng& rng) {
    if (m < 1) throw ArgumentError("sample: m must be >= 1");
    const std::size_t k = params.n_components();
    Vector cumulative(k);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t c = 0; c < k; ++c) {
        acc += params.pi[c];
        cumulative[c] = acc;
        if (params.pi[c] > 0.0) last_positive = c;
    }
    std::vector<Vector> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double u = rng.uniform();
        std::size_t chosen = last_positive;
        for (std::size_t c = 0; c < k; ++c) {
            if (u < cumulative[c]) {
                chosen = c;
                break;
            }
        }
        out.push_back(gaussian_sample(rng, params.mu[chosen], params.sigma[chosen]));
    }
    return out;
}

/// Per-feature z-score for inputs; per-dimension mean and one RMS scale for targets.
/// Zero-variance features keep scale 1.
inline Standardization fit_standardization(std::span<const Sample> data, std::size_t input_dim,
                                           std::size_t target_dim) {
    Standardization s = Standardization::identity(input_dim, target_dim);
    const auto n = static_cast<double>(data.size());
    for (const auto& d : data) {
        for (std::size_t i = 0; i < input_dim; ++i) s.input_mean[i] += d.x[i] / n;
        for (std::size_t i = 0; i < target_dim; ++i) s.target_mean[i] += d.y[i] / n;
    }
    Vector in_var(input_dim, 0.0);
    double target_var = 0.0;
    for (const auto& d : data) {
        for (std::size_t i = 0; i < input_dim; ++i) {
            const double diff = d.x[i] - s.input_mean[i];
            in_var[i] += diff * diff / n;
        }
        for (std::size_t i = 0; i < target_dim; ++i) {
            const double diff = d.y[i] - s.target_mean[i];
            target_var += diff * diff / (n * static_cast<double>(target_dim));
        }
    }
    constexpr double kMinScale = 1e-12;
    for (std::size_t i = 0; i < input_dim; ++i) {
        const double sd = std::sqrt(in_var[i]);
        s.input_scale[i] = sd > kMinScale ? sd : 1.0;
    }
    const double tsd = std::sqrt(target_var);
    s.target_scale = tsd > kMinScale ? tsd : 1.0;
    return s;
}

/// Mini-batch gradient descent on the batch-mean NLL. Deterministic given
/// (dataset, config): one Rng seeded by config.seed drives initialization and
/// then the per-epoch Fisher-Yates shuffle. training_log holds the running mean
/// NLL of each epoch in the caller's units; final_nll is a fresh pass over the
/// whole dataset with the returned weights.
inline MdnModel train(std::span<const Sample> dataset, const MdnConfig& config) {
    config.validate();
    if (dataset.empty()) throw ArgumentError("train: empty dataset");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].x.size() != config.input_dim || dataset[i].y.size() != config.target_dim) {
            throw ShapeError("train: record " + std::to_string(i) + " has dimensions (" +
                             std::to_string(dataset[i].x.size()) + ", " + std::to_string(dataset[i].y.size()) +
                             "), config expects (" + std::to_string(config.input_dim) + ", " +
                             std::to_string(config.target_dim) + ")");
        }
    }

    Rng rng(config.seed);
    const MdnModel init = MdnModel::initialize(config, rng);
    std::vector<Layer> layers = init.layers();
    const Standardization stats = config.standardize
                                      ? fit_standardization(dataset, config.input_dim, config.target_dim)
                                      : Standardization::identity(config.input_dim, config.target_dim);

    const std::size_t n = dataset.size();
    std::vector<Vector> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = detail::standardize_input(stats, dataset[i].x);
        ys[i] = detail::standardize_target(stats, dataset[i].y);
    }
    const double floor = config.sigma_floor / stats.target_scale;
    // Converts a standardized NLL to the caller's units.
    const double log_jacobian = static_cast<double>(config.target_dim) * std::log(stats.target_scale);

    Gradients m1 = detail::zero_gradients(layers);
    Gradients m2 = detail::zero_gradients(layers);
    std::uint64_t step = 0;
    auto apply = [&](Gradients& grads) {
        ++step;
        const double lr = config.learning_rate;
        const auto& ad = config.adam;
        const double c1 = 1.0 - std::pow(ad.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(ad.beta2, static_cast<double>(step));
        auto update = [&](std::vector<double>& w, const std::vector<double>& g, std::vector<double>& v1,
                          std::vector<double>& v2) {
            if (config.optimizer == OptimizerKind::sgd) {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
                return;
            }
            for (std::size_t i = 0; i < w.size(); ++i) {
                v1[i] = ad.beta1 * v1[i] + (1.0 - ad.beta1) * g[i];
                v2[i] = ad.beta2 * v2[i] + (1.0 - ad.beta2) * g[i] * g[i];
                w[i] -= lr * (v1[i] / c1) / (std::sqrt(v2[i] / c2) + ad.eps);
            }
        };
        for (std::size_t l = 0; l < layers.size(); ++l) {
            update(layers[l].weights.data(), grads[l].weights.data(), m1[l].weights.data(), m2[l].weights.data());
            update(layers[l].bias, grads[l].bias, m1[l].bias, m2[l].bias);
        }
    };

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::vector<double> log;
    log.reserve(config.epochs);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_epoch = 0;
    detail::Backprop bp;
    Gradients grads = detail::zero_gradients(layers);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + config.batch_size);
            const double w = 1.0 / static_cast<double>(end - start);
            for (auto& g : grads) {
                std::fill(g.weights.data().begin(), g.weights.data().end(), 0.0);
                std::fill(g.bias.begin(), g.bias.end(), 0.0);
            }
            double batch_loss = 0.0;
            for (std::size_t j = start; j < end; ++j) {
                batch_loss += bp.accumulate(layers, config, floor, xs[order[j]], ys[order[j]], w, grads);
            }
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch_index + 1));
            }
            epoch_loss += batch_loss;
            apply(grads);
        }
        const double mean_loss = epoch_loss / static_cast<double>(n) + log_jacobian;
        log.push_back(mean_loss);
        if (mean_loss < best) {
            best = mean_loss;
            best_epoch = epoch;
        } else if (config.patience > 0 && epoch - best_epoch >= config.patience) {
            break;
        }
    }

    MdnModel trained(config, std::move(layers), stats);
    for (const auto& l : trained.layers()) {
        if (!l.weights.all_finite()) throw NumericError("train: non-finite weights after training");
    }
    const double final_loss = nll(trained, dataset);
    return trained.with_training_result(std::move(log), final_loss);
}

}  // namespace hmdn

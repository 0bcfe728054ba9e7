#include "dbdp/net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dbdp/rng.hpp"

namespace dbdp {

int NetworkSpec::width() const {
    int w = 0;
    for (int l : layer_sizes) w = std::max(w, l);
    return w;
}

std::size_t NetworkSpec::param_count() const {
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i)
        count += static_cast<std::size_t>(layer_sizes[i]) * layer_sizes[i + 1] + layer_sizes[i + 1];
    return count;
}

void NetworkSpec::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("network needs at least one layer");
    for (int l : layer_sizes)
        if (l < 1) throw std::invalid_argument("layer sizes must be positive");
}

LipschitzConstants lipschitz_constants(const NetworkSpec& spec, double R) {
    if (R <= 0.0) throw std::invalid_argument("lipschitz_constants: R must be > 0");
    const double depth_exponent = spec.depth() - 1;
    LipschitzConstants out;
    out.parameter_lipschitz = static_cast<double>(spec.param_count()) *
                              std::pow(R, depth_exponent) *
                              std::pow(static_cast<double>(spec.width()), depth_exponent);
    out.output_bound = 2.0 * R * spec.width();
    return out;
}

int Network::total_hidden_units(const NetworkSpec& spec) {
    int units = 0;
    for (std::size_t i = 1; i + 1 < spec.layer_sizes.size(); ++i) units += spec.layer_sizes[i];
    return units;
}

Network::Network(NetworkSpec spec, bool batch_norm)
    : spec_(std::move(spec)), batch_norm_(batch_norm) {
    spec_.validate();
    std::size_t size = spec_.param_count();
    const int units = total_hidden_units(spec_);
    if (batch_norm_) size += 2 * static_cast<std::size_t>(units);
    theta_.assign(size, 0.0);
    if (batch_norm_) {
        bn_state_.running_mean.assign(units, 0.0);
        bn_state_.running_var.assign(units, 1.0);
        std::size_t off = spec_.param_count();
        for (std::size_t i = 1; i + 1 < spec_.layer_sizes.size(); ++i) {
            const int l = spec_.layer_sizes[i];
            for (int j = 0; j < l; ++j) theta_[off + j] = 1.0; // gamma; beta stays zero
            off += 2 * static_cast<std::size_t>(l);
        }
    }
}

Network Network::xavier(NetworkSpec spec, bool batch_norm, std::uint64_t seed) {
    Network net(std::move(spec), batch_norm);
    CounterRng rng(derive_stream(seed, 0x78617669)); // "xavi"
    std::size_t off = 0;
    const auto& sizes = net.spec_.layer_sizes;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        const int fan_in = sizes[i];
        const int fan_out = sizes[i + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        for (int j = 0; j < fan_in * fan_out; ++j)
            net.theta_[off + j] = bound * (2.0 * rng.next_unit() - 1.0);
        off += static_cast<std::size_t>(fan_in) * fan_out;
        off += fan_out; // biases stay zero
    }
    return net;
}

void Network::forward(const double* X, long n, Mode mode, ForwardCache* cache, double* out) const {
    const auto& sizes = spec_.layer_sizes;
    const int k = spec_.depth();
    if (n < 1) throw std::invalid_argument("forward: empty batch");
    if (batch_norm_ && mode == Mode::train && n < 2)
        throw std::invalid_argument("forward: batch norm in train mode needs n >= 2");

    const int hidden_layers = k - 1;
    if (cache) {
        cache->n = n;
        cache->mode = mode;
        cache->inputs.assign(static_cast<std::size_t>(k) + 1, {});
        cache->bn_xhat.assign(batch_norm_ ? hidden_layers : 0, {});
        cache->bn_rstd.assign(batch_norm_ ? hidden_layers : 0, {});
        cache->bn_mean.assign(batch_norm_ ? hidden_layers : 0, {});
        cache->bn_var.assign(batch_norm_ ? hidden_layers : 0, {});
        cache->inputs[0].assign(X, X + n * sizes[0]);
    }

    std::vector<double> cur(X, X + n * sizes[0]);
    std::vector<double> next;
    std::size_t off = 0;
    int bn_off = 0;
    for (int layer = 0; layer < k; ++layer) {
        const int in = sizes[layer];
        const int out_dim = sizes[layer + 1];
        const double* W = theta_.data() + off;
        const double* b = W + static_cast<std::size_t>(in) * out_dim;
        next.assign(static_cast<std::size_t>(n) * out_dim, 0.0);
        for (long r = 0; r < n; ++r) {
            const double* x = cur.data() + r * in;
            double* y = next.data() + r * out_dim;
            for (int j = 0; j < out_dim; ++j) {
                const double* w = W + static_cast<std::size_t>(j) * in;
                double acc = b[j];
                for (int c = 0; c < in; ++c) acc += w[c] * x[c];
                y[j] = acc;
            }
        }
        off += static_cast<std::size_t>(in) * out_dim + out_dim;

        if (layer < k - 1) {
            if (batch_norm_) {
                const double* gamma = theta_.data() + spec_.param_count() + 2 * bn_off;
                const double* beta = gamma + out_dim;
                std::vector<double>* xhat = cache ? &cache->bn_xhat[layer] : nullptr;
                if (xhat) xhat->assign(static_cast<std::size_t>(n) * out_dim, 0.0);
                if (cache) {
                    cache->bn_rstd[layer].assign(out_dim, 0.0);
                    cache->bn_mean[layer].assign(out_dim, 0.0);
                    cache->bn_var[layer].assign(out_dim, 0.0);
                }
                for (int j = 0; j < out_dim; ++j) {
                    double mean, var;
                    if (mode == Mode::train) {
                        double sum = 0.0;
                        for (long r = 0; r < n; ++r) sum += next[r * out_dim + j];
                        mean = sum / n;
                        double sq = 0.0;
                        for (long r = 0; r < n; ++r) {
                            const double c = next[r * out_dim + j] - mean;
                            sq += c * c;
                        }
                        var = sq / n;
                    } else {
                        mean = bn_state_.running_mean[bn_off + j];
                        var = bn_state_.running_var[bn_off + j];
                    }
                    const double rstd = 1.0 / std::sqrt(var + BatchNormState::kEpsilon);
                    if (cache) {
                        cache->bn_rstd[layer][j] = rstd;
                        cache->bn_mean[layer][j] = mean;
                        cache->bn_var[layer][j] = var;
                    }
                    for (long r = 0; r < n; ++r) {
                        const double h = (next[r * out_dim + j] - mean) * rstd;
                        if (xhat) (*xhat)[r * out_dim + j] = h;
                        next[r * out_dim + j] = gamma[j] * h + beta[j];
                    }
                }
            }
            for (double& v : next) v = std::tanh(v);
            bn_off += out_dim;
        }
        cur.swap(next);
        if (cache) cache->inputs[static_cast<std::size_t>(layer) + 1] = cur;
    }
    std::copy(cur.begin(), cur.end(), out);
}

std::vector<double> Network::forward(const std::vector<double>& X, long n, Mode mode,
                                     ForwardCache* cache) const {
    std::vector<double> out(static_cast<std::size_t>(n) * spec_.output_size());
    forward(X.data(), n, mode, cache, out.data());
    return out;
}

std::vector<double> Network::backward(const ForwardCache& cache, const double* dL_dout) {
    const auto& sizes = spec_.layer_sizes;
    const int k = spec_.depth();
    const long n = cache.n;
    if (cache.inputs.size() != static_cast<std::size_t>(k) + 1 ||
        cache.inputs[0].size() != static_cast<std::size_t>(n) * sizes[0])
        throw std::invalid_argument("backward: cache does not match this network");

    std::vector<double> grad(theta_.size(), 0.0);
    std::vector<double> delta(dL_dout, dL_dout + n * sizes[k]);
    std::vector<double> prev_delta;

    int bn_off = batch_norm_ ? total_hidden_units(spec_) : 0;
    std::size_t affine_off = spec_.param_count();

    for (int layer = k - 1; layer >= 0; --layer) {
        const int in = sizes[layer];
        const int out_dim = sizes[layer + 1];
        affine_off -= static_cast<std::size_t>(in) * out_dim + out_dim;

        if (layer < k - 1) {
            // Unwind tanh: delta holds dL/d(layer activation output).
            const std::vector<double>& act = cache.inputs[static_cast<std::size_t>(layer) + 1];
            for (long r = 0; r < n; ++r)
                for (int j = 0; j < out_dim; ++j) {
                    const double a = act[r * out_dim + j];
                    delta[r * out_dim + j] *= (1.0 - a * a);
                }
            if (batch_norm_) {
                bn_off -= out_dim;
                const double* gamma = theta_.data() + spec_.param_count() + 2 * bn_off;
                double* dgamma = grad.data() + spec_.param_count() + 2 * bn_off;
                double* dbeta = dgamma + out_dim;
                const std::vector<double>& xhat = cache.bn_xhat[layer];
                const std::vector<double>& rstd = cache.bn_rstd[layer];
                for (int j = 0; j < out_dim; ++j) {
                    double sum_dy = 0.0, sum_dy_xhat = 0.0;
                    for (long r = 0; r < n; ++r) {
                        const double dy = delta[r * out_dim + j];
                        sum_dy += dy;
                        sum_dy_xhat += dy * xhat[r * out_dim + j];
                    }
                    dgamma[j] += sum_dy_xhat;
                    dbeta[j] += sum_dy;
                    if (cache.mode == Mode::train) {
                        const double scale = gamma[j] * rstd[j];
                        for (long r = 0; r < n; ++r) {
                            const double dy = delta[r * out_dim + j];
                            const double h = xhat[r * out_dim + j];
                            delta[r * out_dim + j] =
                                scale * (dy - sum_dy / n - h * sum_dy_xhat / n);
                        }
                    } else {
                        const double scale = gamma[j] * rstd[j];
                        for (long r = 0; r < n; ++r) delta[r * out_dim + j] *= scale;
                    }
                }
            }
        }

        const double* W = theta_.data() + affine_off;
        double* dW = grad.data() + affine_off;
        double* db = dW + static_cast<std::size_t>(in) * out_dim;
        const std::vector<double>& input = cache.inputs[static_cast<std::size_t>(layer)];

        for (long r = 0; r < n; ++r) {
            const double* x = input.data() + r * in;
            const double* dy = delta.data() + r * out_dim;
            for (int j = 0; j < out_dim; ++j) {
                const double g = dy[j];
                double* dwrow = dW + static_cast<std::size_t>(j) * in;
                for (int c = 0; c < in; ++c) dwrow[c] += g * x[c];
                db[j] += g;
            }
        }
        if (layer > 0) {
            prev_delta.assign(static_cast<std::size_t>(n) * in, 0.0);
            for (long r = 0; r < n; ++r) {
                const double* dy = delta.data() + r * out_dim;
                double* dx = prev_delta.data() + r * in;
                for (int j = 0; j < out_dim; ++j) {
                    const double g = dy[j];
                    const double* wrow = W + static_cast<std::size_t>(j) * in;
                    for (int c = 0; c < in; ++c) dx[c] += g * wrow[c];
                }
            }
            delta.swap(prev_delta);
        }
    }

    // Running statistics update from the cached batch moments, once per
    // train-mode backward (one optimizer iteration). Unbiased variance.
    if (batch_norm_ && cache.mode == Mode::train) {
        int stat_off = 0;
        for (int layer = 0; layer < k - 1; ++layer) {
            const int out_dim = sizes[layer + 1];
            for (int j = 0; j < out_dim; ++j) {
                const double mean = cache.bn_mean[layer][j];
                const double var = cache.bn_var[layer][j];
                const double unbiased = n > 1 ? var * static_cast<double>(n) / (n - 1) : var;
                double& rm = bn_state_.running_mean[stat_off + j];
                double& rv = bn_state_.running_var[stat_off + j];
                rm = (1.0 - BatchNormState::kMomentum) * rm + BatchNormState::kMomentum * mean;
                rv = (1.0 - BatchNormState::kMomentum) * rv + BatchNormState::kMomentum * unbiased;
            }
            stat_off += out_dim;
        }
    }

    return grad;
}

double AdamState::learning_rate_at(long step) const {
    const long halvings = halving_period > 0 ? step / halving_period : 0;
    return base_lr * std::pow(2.0, -static_cast<double>(halvings));
}

void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state) {
    if (theta.size() != grad.size())
        throw std::invalid_argument("adam_step: gradient length mismatch");
    if (state.m.size() != theta.size()) state.reset(theta.size());

    for (double g : grad)
        if (!std::isfinite(g)) throw TrainingAbort("non-finite gradient entry");

    state.t += 1;
    const double lr = state.learning_rate_at(state.t);
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        theta[i] -= lr * (mhat / (std::sqrt(vhat) + state.epsilon) + state.weight_decay * theta[i]);
    }
    if (state.max_norm > 0.0) project_linf(theta, state.max_norm);
}

void project_linf(std::span<double> theta, double R) {
    for (double& v : theta) v = std::clamp(v, -R, R);
}

} // namespace dbdp

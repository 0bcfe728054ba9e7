#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dbdp/errors.hpp"

namespace dbdp {

/// Architecture descriptor (l_1, ..., l_{k+1}). depth() is the number of
/// affine maps k; the network applies tanh between them (never after the
/// last one).
struct NetworkSpec {
    std::vector<int> layer_sizes;

    int depth() const { return static_cast<int>(layer_sizes.size()) - 1; }
    int width() const;
    std::size_t param_count() const;
    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }

    void validate() const;
    bool operator==(const NetworkSpec&) const = default;
};

/// C_SR and B_SR for networks with parameters bounded by R in sup norm:
/// C = |S| R^(D-1) ||S||_inf^(D-1), B = 2 R ||S||_inf.
struct LipschitzConstants {
    double parameter_lipschitz; // C_SR
    double output_bound;        // B_SR
};

LipschitzConstants lipschitz_constants(const NetworkSpec& spec, double R);

/// Per-hidden-layer batch-norm parameters live inside the trainable vector
/// (gamma then beta, after the affine parameters); the running statistics
/// live here.
struct BatchNormState {
    static constexpr double kEpsilon = 1e-5;
    static constexpr double kMomentum = 0.1;

    std::vector<double> running_mean; // concatenated over hidden layers
    std::vector<double> running_var;
};

enum class Mode { train, eval };

/// Activation cache captured by forward() for the matching backward().
struct ForwardCache {
    long n = 0;
    Mode mode = Mode::train;
    // inputs[i]: n x l_i matrix fed to affine layer i (inputs[0] is X).
    std::vector<std::vector<double>> inputs;
    // tanh outputs equal inputs[i+1]; batch-norm internals per hidden layer:
    std::vector<std::vector<double>> bn_xhat; // n x l_{i+1}
    std::vector<std::vector<double>> bn_rstd; // l_{i+1}
    std::vector<std::vector<double>> bn_mean; // l_{i+1}, batch mean in train mode
    std::vector<std::vector<double>> bn_var;  // l_{i+1}, biased batch variance
};

/// Feedforward tanh network with optional batch normalization on the
/// hidden layers (affine -> batch norm -> tanh; the final layer stays
/// affine). All parameters are doubles; everything is deterministic.
///
/// Flat parameter order: per layer, the weight matrix row-major
/// (l_{i+1} x l_i) then the bias (l_{i+1}); when batch norm is enabled,
/// gamma then beta for each hidden layer follow the affine block.
class Network {
  public:
    Network() = default;
    Network(NetworkSpec spec, bool batch_norm);

    /// Weights uniform on +-sqrt(6/(fan_in+fan_out)), biases zero,
    /// gamma 1, beta 0; deterministic given the seed.
    static Network xavier(NetworkSpec spec, bool batch_norm, std::uint64_t seed);

    const NetworkSpec& spec() const { return spec_; }
    bool batch_norm() const { return batch_norm_; }

    std::vector<double>& trainable() { return theta_; }
    const std::vector<double>& trainable() const { return theta_; }
    std::size_t trainable_size() const { return theta_.size(); }

    /// The affine slice of the trainable vector (the Parameters store).
    std::span<const double> affine_parameters() const {
        return {theta_.data(), spec_.param_count()};
    }
    std::span<double> affine_parameters() { return {theta_.data(), spec_.param_count()}; }

    BatchNormState& bn_state() { return bn_state_; }
    const BatchNormState& bn_state() const { return bn_state_; }

    /// Forward pass over a row-major n x l_1 batch. out is n x l_{k+1}.
    /// Train mode with batch norm requires n >= 2.
    void forward(const double* X, long n, Mode mode, ForwardCache* cache, double* out) const;

    std::vector<double> forward(const std::vector<double>& X, long n, Mode mode,
                                ForwardCache* cache = nullptr) const;

    /// Exact gradient of the scalar loss whose per-output gradient is
    /// dL_dout (n x l_{k+1}), with respect to the trainable vector.
    /// In train mode this also updates the running statistics.
    std::vector<double> backward(const ForwardCache& cache, const double* dL_dout);

    static int total_hidden_units(const NetworkSpec& spec);

  private:
    NetworkSpec spec_;
    bool batch_norm_ = false;
    std::vector<double> theta_;
    BatchNormState bn_state_;
};

/// Adam with decoupled weight decay and a step-halving learning-rate
/// schedule: lr_t = base_lr * 2^-floor(t / halving_period).
struct AdamState {
    double base_lr = 1e-3;
    long halving_period = 5000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
    double max_norm = 0.0; // > 0: project onto ||theta||_inf <= max_norm after the update

    long t = 0;
    std::vector<double> m; // first moment
    std::vector<double> v; // second moment

    void reset(std::size_t size) {
        t = 0;
        m.assign(size, 0.0);
        v.assign(size, 0.0);
    }

    double learning_rate_at(long step) const;
};

/// One optimizer step in place. Throws TrainingAbort on non-finite
/// gradient entries.
void adam_step(std::span<double> theta, std::span<const double> grad, AdamState& state);

/// Clamp every entry into [-R, R].
void project_linf(std::span<double> theta, double R);

} // namespace dbdp

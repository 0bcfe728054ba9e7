#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dbdp/net.hpp"
#include "dbdp/problems.hpp"

namespace dbdp {

/// One-step transfer F(t, x, y, z, h, dw) = y - f(t, x, y, z) h + z . dw.
double step_transfer(const ProblemSpec& problem, double t, std::span<const double> x, double y,
                     std::span<const double> z, double h, std::span<const double> dw);

/// Two-tier optimization schedule: the step adjacent to the terminal
/// condition trains longest, later (warm-started) steps train shorter with
/// a smaller rate.
struct TrainingSchedule {
    long iterations_first = 50000;
    long iterations_rest = 5000;
    double lr_first = 0.01;
    double lr_rest = 0.001;
    long halve_first = 5000;
    long halve_rest = 500;
    long batch_size = 4096;
    double weight_decay = 0.01;

    void validate() const;
};

struct NetConfig {
    int hidden_width = 30; // default d + 20, resolved by the config layer
    int depth = 4;         // number of affine layers
    bool batch_norm = true;

    /// (d, w, ..., w, out) with depth affine maps.
    NetworkSpec make_spec(int d, int out) const;
};

/// The per-step pair: U_i approximates u(t_i, .), Z_i approximates
/// Sigma^T grad u(t_i, .). Same hidden sizes, outputs 1 and d.
struct StepNetworks {
    Network u;
    Network z;
};

enum class SamplerKind { mc, rqmc };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

/// Batch source for training. Fresh randomness for every (step, iteration)
/// pair, derived statelessly so distinct pairs could be produced
/// concurrently.
class BatchSampler {
  public:
    virtual ~BatchSampler() = default;
    virtual NormalBatch normals(int step, long iteration, long m, int s) = 0;
    virtual std::string name() const = 0;
};

class McSampler final : public BatchSampler {
  public:
    explicit McSampler(std::uint64_t master_seed) : master_seed_(master_seed) {}
    NormalBatch normals(int step, long iteration, long m, int s) override;
    std::string name() const override { return "mc"; }

  private:
    std::uint64_t master_seed_;
};

class RqmcSampler final : public BatchSampler {
  public:
    RqmcSampler(std::uint64_t master_seed, ScrambleMode mode)
        : master_seed_(master_seed), mode_(mode) {}
    NormalBatch normals(int step, long iteration, long m, int s) override;
    std::string name() const override { return "rqmc"; }

  private:
    std::uint64_t master_seed_;
    ScrambleMode mode_;
    std::unique_ptr<SobolGenerator> gen_; // reused across iterations (same s)
};

std::unique_ptr<BatchSampler> make_sampler(SamplerKind kind, ScrambleMode mode,
                                           std::uint64_t master_seed);

/// Evaluator for the frozen target: fills out (n values) from a row-major
/// n x d matrix.
using ValueFn = std::function<void(const double* X, long n, double* out)>;

ValueFn terminal_value_fn(const ProblemSpec& problem);
ValueFn network_value_fn(const Network& net); // eval mode, borrows the network

/// Per-sample residuals H = U_next(X_{i+1}) - F(t_i, X_i, u, z, dt, dW).
/// u_vals: m values; z_vals: m x d. Shared by training, tests and the rate
/// probe so the empirical-risk integrand has a single definition.
std::vector<double> step_residuals(const ProblemSpec& problem, const ValueFn& u_next,
                                   const PathSlice& slice, std::span<const double> u_vals,
                                   std::span<const double> z_vals);

/// Loss only, for arbitrary (u, z) callables; u_fn fills m values, z_fn
/// fills m x d.
double step_loss_value(const ProblemSpec& problem, const ValueFn& u_next,
                       const std::function<void(const double*, long, double*)>& u_fn,
                       const std::function<void(const double*, long, double*)>& z_fn,
                       const PathSlice& slice);

struct StepLossResult {
    double loss = 0.0;
    std::vector<double> grad_u;
    std::vector<double> grad_z;
};

/// Batch-mean squared residual and its gradients with respect to the two
/// step networks. The target is treated as a constant: no gradient reaches
/// U_next. Throws TrainingAbort on a non-finite loss.
StepLossResult step_loss(const ProblemSpec& problem, const ValueFn& u_next, StepNetworks& nets,
                         const PathSlice& slice);

struct StepTrainMeta {
    long iterations = 0;
    double first_loss = 0.0;
    double final_loss = 0.0; // mean over the trailing 5% of iterations
};

struct StepTrainResult {
    StepNetworks nets;
    StepTrainMeta meta;
};

/// Train the networks for grid step i against the frozen target. Warm
/// start from `warm_from` when given, otherwise Xavier initialization.
StepTrainResult train_step(const ProblemSpec& problem, const TimeGrid& grid, int step,
                           const ValueFn& u_next, const TrainingSchedule& schedule,
                           const NetConfig& net_config, BatchSampler& sampler,
                           std::uint64_t master_seed, const StepNetworks* warm_from = nullptr);

struct TrainedSolution {
    ProblemSpec problem;
    TimeGrid grid;
    NetConfig net_config;
    SamplerKind sampler = SamplerKind::rqmc;
    ScrambleMode scramble = ScrambleMode::owen_nested;
    std::uint64_t master_seed = 0;
    std::vector<StepNetworks> steps; // index i in 0..N-1; step N is the terminal g
    std::vector<StepTrainMeta> meta;

    /// U_0 in eval mode over a row-major n x d batch.
    std::vector<double> evaluate_initial(const double* X, long n) const;
};

/// Backward loop i = N-1, ..., 0, threading the frozen target.
TrainedSolution solve(const ProblemSpec& problem, const TimeGrid& grid,
                      const TrainingSchedule& schedule, const NetConfig& net_config,
                      SamplerKind sampler_kind, ScrambleMode scramble, std::uint64_t master_seed);

TrainedSolution solve_with_sampler(const ProblemSpec& problem, const TimeGrid& grid,
                                   const TrainingSchedule& schedule, const NetConfig& net_config,
                                   BatchSampler& sampler, std::uint64_t master_seed);

// Persistence: a directory holding one checkpoint file per step network
// (step<i>_u.ckpt, step<i>_z.ckpt) plus manifest.txt.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);
void save_solution(const TrainedSolution& solution, const std::string& dir);
TrainedSolution load_solution(const std::string& dir);

} // namespace dbdp

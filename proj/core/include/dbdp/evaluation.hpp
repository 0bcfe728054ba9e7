#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbdp/scheme.hpp"

namespace dbdp {

/// Density-normalized histogram over a fixed range, with values outside
/// the range tallied separately:
/// integral(density) + out_of_range / total == 1 exactly.
struct Histogram {
    std::vector<double> edges;   // bins + 1 entries
    std::vector<double> density; // bins entries
    long out_of_range = 0;
    long total = 0;

    double in_range_integral() const;
};

Histogram pointwise_histogram(std::span<const double> errors, double lo = -0.1, double hi = 0.1,
                              int bins = 50);

struct ErrorReport {
    double relative_l2 = 0.0;
    std::vector<double> pointwise_errors; // signed, U_hat(eta_i) - u(0, eta_i)
    Histogram histogram;
    double reference_se_mean = 0.0; // mean MC standard error of u(0, eta_i); 0 for closed forms
};

struct EvalOptions {
    long m_eval = 1L << 16;       // i.i.d. uniform evaluation points (plain MC, closed forms)
    long hjb_eval_points = 256;   // evaluation subset size for hjb
    long hjb_ref_samples = 1L << 17;
    std::uint64_t seed = 2024;
};

/// Uniform evaluation points on [a,b]^d, from a dedicated MC substream.
std::vector<double> evaluation_points(const ProblemSpec& problem, long m, std::uint64_t seed);

/// Reference values u(0, eta_i); fills standard errors for hjb.
std::vector<double> reference_values(const ProblemSpec& problem, const std::vector<double>& eta,
                                     long m, const EvalOptions& opts,
                                     std::vector<double>* standard_errors = nullptr);

/// Relative L2 error of the trained initial-time network against the
/// reference solution over the target box:
/// sqrt(sum (U_hat - u)^2 / sum u^2) over m i.i.d. uniform points.
ErrorReport relative_l2(const TrainedSolution& solution, const EvalOptions& opts = {});

/// Same, against precomputed points/references (used by the suite runner
/// to share expensive hjb references across runs of one cell).
ErrorReport relative_l2_against(const TrainedSolution& solution, const std::vector<double>& eta,
                                const std::vector<double>& u_ref,
                                const std::vector<double>* ref_se = nullptr);

/// Ordinary least squares slope of log2(rmse) on log2(m).
double fit_rate(std::span<const long> m_values, std::span<const double> rmse_values);

struct RateProbeResult {
    std::string sampler;
    std::vector<long> m_values;
    std::vector<double> rmse_values;
    double fitted_slope = 0.0;
    bool degenerate = false; // constant integrand: all deviations 0
};

struct RateProbeConfig {
    std::vector<long> m_values;        // increasing powers of two
    int replications = 32;
    long oracle_m = 1L << 22;          // scrambled-Sobol' oracle sample count
    std::uint64_t seed = 7;
    ScrambleMode scramble = ScrambleMode::owen_nested;
};

/// Empirical quadrature-error probe for a frozen step loss: RMSE over
/// replications of |L_m - L*| where L* is a high-count RQMC oracle value.
/// This is the measurable proxy for the generalization-error rate: the
/// excess risk is bounded by twice the uniform quadrature error, and for
/// frozen parameters the same rate theorems govern |L_m - L|.
RateProbeResult quadrature_rate_probe(const ProblemSpec& problem, const StepNetworks& nets,
                                      double t_i, double dt, SamplerKind sampler,
                                      const RateProbeConfig& config);

/// Probe of a plain integrand h(u) on (0,1)^s against its exact value,
/// for the synthetic CLI modes (smooth product / constant).
RateProbeResult integrand_rate_probe(const std::function<double(std::span<const double>)>& h,
                                     int s, double exact, SamplerKind sampler,
                                     const RateProbeConfig& config);

struct SuiteCell {
    ProblemKind problem;
    int d = 10;
    int N = 2;
    long m = 1L << 12;
    SamplerKind sampler = SamplerKind::rqmc;
};

struct SuiteCellResult {
    SuiteCell cell;
    int n_runs = 0;
    double mean_rel_l2 = 0.0;
    double std_rel_l2 = 0.0;
    std::vector<double> run_errors;
    bool complete = true;
    std::string failure;
};

struct SuiteConfig {
    std::vector<SuiteCell> cells;
    double T = 1.0;
    TrainingSchedule schedule;
    NetConfig net_config; // hidden_width <= 0: resolve to d + 20 per cell
    ScrambleMode scramble = ScrambleMode::owen_nested;
    int n_runs = 4;
    std::uint64_t master_seed = 1;
    EvalOptions eval;
    int workers = 0; // 0: hardware concurrency
};

/// Train and evaluate every (cell, run) pair; aggregation is order-fixed
/// and run seeds derive from the cell contents, so results do not depend
/// on scheduling. Per-run failures mark the cell incomplete.
std::vector<SuiteCellResult> run_suite(const SuiteConfig& config);

/// Sample mean and n-1 standard deviation.
void mean_std(std::span<const double> values, double& mean, double& sd);

// CSV writers. Every file starts with '#' comment lines that embed the
// config fingerprint and the values used.
void write_histogram_csv(const std::string& path, const Histogram& hist,
                         const std::vector<std::string>& header_comments);
void write_rate_csv(const std::string& path, const std::vector<RateProbeResult>& results,
                    const std::vector<std::string>& header_comments);
void write_suite_csv(const std::string& path, const std::vector<SuiteCellResult>& results,
                     const std::vector<std::string>& header_comments);
void write_metrics_csv(const std::string& path, const ErrorReport& report, long m_eval,
                       const std::vector<std::string>& header_comments);

} // namespace dbdp

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dbdp/evaluation.hpp"
#include "dbdp/problems.hpp"
#include "dbdp/scheme.hpp"

namespace dbdp {

/// Experiment configuration. Flat `key = value` text format with optional
/// `[section]` grouping lines; unknown keys are rejected with the line
/// number. Every field has a default; a value of -1 for d-dependent fields
/// (hidden_width, a, b, mu, sigma) means "resolve from the problem".
/// No environment variables are consulted anywhere.
struct ExperimentConfig {
    // problem
    ProblemKind problem = ProblemKind::heat;
    int d = 10;
    double T = 1.0;
    int N = 2;
    bool override_domain = false; // a/b/mu/sigma set explicitly
    double a = 0.0;
    double b = 0.0;
    bool override_coefficients = false;
    double mu = 0.0;
    double sigma = 0.0;

    // sampling
    SamplerKind sampler = SamplerKind::rqmc;
    ScrambleMode scramble = ScrambleMode::owen_nested;

    // training
    long batch_size = 4096;
    long iterations_first = 50000;
    long iterations_rest = 5000;
    double lr_first = 0.01;
    double lr_rest = 0.001;
    long halve_first = 5000;
    long halve_rest = 500;
    double weight_decay = 0.01;

    // network
    int hidden_width = -1; // -1: d + 20
    int depth = 4;
    bool batch_norm = true;

    // evaluation
    long m_eval = 1L << 16;
    long hjb_eval_points = 256;
    long hjb_ref_samples = 1L << 17;
    std::uint64_t eval_seed = 2024;

    // rate probe
    int rate_d = 5;
    int rate_m_log2_min = 8;
    int rate_m_log2_max = 14;
    int rate_replications = 32;
    int rate_oracle_m_log2 = 22;

    // run control
    int n_runs = 1;
    std::uint64_t master_seed = 1;
    int workers = 0;
    std::string out_dir = ".";

    /// Resolved problem/schedule/net/eval views.
    ProblemSpec make_problem() const;
    TrainingSchedule make_schedule() const;
    NetConfig make_net_config() const;
    EvalOptions make_eval_options() const;
    RateProbeConfig make_rate_config() const;
    std::vector<long> rate_m_values() const;
};

/// Parse from a file; ConfigError carries the offending line number.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(std::istream& in, const std::string& name = "<config>");

/// Canonical serialization with all defaults applied. Reloading the result
/// yields an identical effective config.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization.
std::uint64_t config_fingerprint(const ExperimentConfig& config);

/// Comment lines ("config_fingerprint = ..." followed by every key=value
/// pair) for embedding in output CSVs.
std::vector<std::string> config_header_comments(const ExperimentConfig& config);

} // namespace dbdp

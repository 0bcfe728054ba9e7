#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dbdp/sampling.hpp"

namespace dbdp {

enum class ProblemKind { heat, hjb, bs1, bs2 };

std::string to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// One benchmark PDE/BSDE instance. The state process is simulated exactly:
/// arithmetic Brownian motion with drift mu*1_d and diffusion sigma*I_d for
/// heat/hjb, the componentwise log-normal solution for bs1/bs2.
///
/// Defaults per kind: heat/bs1/bs2 use mu = 0.2/d, sigma = 1/sqrt(d) on
/// [-0.5, 0.5]^d; hjb uses mu = 0, sigma = sqrt(2) on [0, 1]^d (so the
/// generator is the Laplacian and the driver is -||z||^2 / 2).
struct ProblemSpec {
    ProblemKind kind = ProblemKind::heat;
    int d = 1;
    double T = 1.0;
    double a = -0.5;
    double b = 0.5;
    double mu = 0.2;
    double sigma = 1.0;

    static ProblemSpec make(ProblemKind kind, int d, double T = 1.0);

    bool lognormal_state() const { return kind == ProblemKind::bs1 || kind == ProblemKind::bs2; }
    bool has_closed_form() const { return kind != ProblemKind::hjb; }

    /// Nonlinear term f(t, x, y, z).
    double driver(double t, std::span<const double> x, double y, std::span<const double> z) const;

    /// Partial derivatives of the driver with respect to y and z, needed to
    /// push loss gradients through the one-step transfer.
    void driver_partials(double t, std::span<const double> x, double y,
                         std::span<const double> z, double& df_dy,
                         std::span<double> df_dz) const;

    /// Terminal condition g(x).
    double terminal(std::span<const double> x) const;

    /// Closed-form solution u(t, x) for heat/bs1/bs2. Throws for hjb.
    double closed_form(double t, std::span<const double> x) const;
};

/// Monte Carlo estimate of the log-transformed expectation that solves the
/// hjb problem; `standard_error` is the delta-method error of the log.
struct McEstimate {
    double value = 0.0;
    double standard_error = 0.0;
};

struct McRefConfig {
    long samples = 1L << 17;
    std::uint64_t seed = 0;
};

/// Reference solution u(t, x): closed form where available, otherwise the
/// Monte Carlo estimator (hjb only).
double reference_solution(const ProblemSpec& problem, std::span<const double> x, double t = 0.0,
                          const McRefConfig& mc = {}, double* standard_error = nullptr);

McEstimate hjb_reference(const ProblemSpec& problem, std::span<const double> x, double t,
                         const McRefConfig& mc);

/// Strictly increasing time nodes 0 = t_0 < ... < t_N = T.
struct TimeGrid {
    std::vector<double> nodes;

    static TimeGrid uniform(double T, int N);

    int steps() const { return static_cast<int>(nodes.size()) - 1; }
    double horizon() const { return nodes.back(); }
    double dt(int i) const { return nodes[i + 1] - nodes[i]; }
    double mesh() const;
    void validate() const;
};

/// One simulated time slice: initial points, states at t_i and t_{i+1},
/// and the Brownian increments over [t_i, t_{i+1}]. All matrices m x d.
struct PathSlice {
    long m = 0;
    int d = 0;
    double t_i = 0.0;
    double dt = 0.0;
    std::vector<double> eta;
    std::vector<double> x_i;
    std::vector<double> x_ip1;
    std::vector<double> dw;
};

/// Map a 3d-column normal batch to (eta, W_{t_i}, dW): eta is the inverse
/// CDF transform of the first block into [a,b]^d, the second block scales
/// by sqrt(t_i), the third by sqrt(dt).
void transform_normals(const NormalBatch& W, double a, double b, double t_i, double dt,
                       std::vector<double>& eta, std::vector<double>& w_ti,
                       std::vector<double>& dw);

/// Exact-in-law simulation of the slice from a 3d-column normal batch.
PathSlice simulate_slice(const ProblemSpec& problem, const NormalBatch& normals, double t_i,
                         double dt);

using DriverFn =
    std::function<double(double, std::span<const double>, double, std::span<const double>)>;

/// Finite-difference consistency check: evaluates
/// du/dt + (1/2) tr(Sigma Sigma^T D^2 u) + M . Du + f(t, x, u, Sigma^T Du)
/// on the closed-form solution with central differences of step h. A
/// correct driver transcription makes this vanish up to O(h^2).
/// `driver_override` substitutes the f used (tests perturb it).
double pde_residual(const ProblemSpec& problem, double t, std::span<const double> x, double h,
                    const DriverFn& driver_override = {});

} // namespace dbdp

#include "dbdp/problems.hpp"

#include <cmath>
#include <stdexcept>

#include "dbdp/errors.hpp"
#include "dbdp/rng.hpp"

namespace dbdp {

std::string to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::heat: return "heat";
    case ProblemKind::hjb: return "hjb";
    case ProblemKind::bs1: return "bs1";
    case ProblemKind::bs2: return "bs2";
    }
    return "heat";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "heat") return ProblemKind::heat;
    if (name == "hjb") return ProblemKind::hjb;
    if (name == "bs1") return ProblemKind::bs1;
    if (name == "bs2") return ProblemKind::bs2;
    throw ConfigError("unknown problem '" + name + "' (expected heat, hjb, bs1 or bs2)");
}

ProblemSpec ProblemSpec::make(ProblemKind kind, int d, double T) {
    if (d < 1) throw ConfigError("problem dimension must be >= 1");
    if (T <= 0.0) throw ConfigError("horizon T must be > 0");
    ProblemSpec p;
    p.kind = kind;
    p.d = d;
    p.T = T;
    if (kind == ProblemKind::hjb) {
        p.a = 0.0;
        p.b = 1.0;
        p.mu = 0.0;
        p.sigma = std::sqrt(2.0);
    } else {
        p.a = -0.5;
        p.b = 0.5;
        p.mu = 0.2 / d;
        p.sigma = 1.0 / std::sqrt(static_cast<double>(d));
    }
    return p;
}

namespace {

double sum_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
}

double sum_of_squares(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

// Shared quadratic coupling term (1/(2d)) * (y * (1_d . z))^2.
double coupling_term(int d, double y, std::span<const double> z) {
    const double s = sum_of(z);
    const double ys = y * s;
    return ys * ys / (2.0 * d);
}

} // namespace

double ProblemSpec::driver(double t, std::span<const double> x, double y,
                           std::span<const double> z) const {
    switch (kind) {
    case ProblemKind::heat: {
        const double xbar = sum_of(x);
        const double e_half = std::exp(0.5 * (T - t));
        const double e_full = e_half * e_half;
        const double quad = sigma * std::sqrt(static_cast<double>(d)) * std::sin(xbar) *
                            std::cos(xbar) * e_full;
        return (std::cos(xbar) + mu * d * std::sin(xbar)) * e_half - 0.5 * quad * quad +
               coupling_term(d, y, z);
    }
    case ProblemKind::hjb: {
        return -0.5 * sum_of_squares(z);
    }
    case ProblemKind::bs1: {
        const double xbar = sum_of(x);
        const double x2 = sum_of_squares(x);
        const double e_half = std::exp(0.5 * (T - t));
        const double e_full = e_half * e_half;
        const double quad = sigma * xbar * std::cos(xbar) * std::sin(xbar) * e_full;
        return (0.5 * std::cos(xbar) + mu * xbar * std::sin(xbar) +
                0.5 * sigma * sigma * x2 * std::cos(xbar)) *
                   e_half -
               quad * quad / (2.0 * d) + coupling_term(d, y, z);
    }
    case ProblemKind::bs2: {
        const double xbar = sum_of(x);
        const double x2 = sum_of_squares(x);
        const double e_half = std::exp(0.5 * (T - t));
        const double e_full = e_half * e_half;
        const double cdf = normal_cdf(xbar);
        const double pdf = normal_pdf(xbar);
        const double quad = sigma * xbar * pdf * cdf * e_full;
        return (0.5 * cdf - mu * xbar * pdf + 0.5 * sigma * sigma * x2 * xbar * pdf) * e_half -
               quad * quad / (2.0 * d) + coupling_term(d, y, z);
    }
    }
    return 0.0;
}

void ProblemSpec::driver_partials(double /*t*/, std::span<const double> /*x*/, double y,
                                  std::span<const double> z, double& df_dy,
                                  std::span<double> df_dz) const {
    if (kind == ProblemKind::hjb) {
        df_dy = 0.0;
        for (int j = 0; j < d; ++j) df_dz[j] = -z[j];
        return;
    }
    // Only the coupling term depends on (y, z).
    const double s = sum_of(z);
    df_dy = y * s * s / d;
    const double dz = y * y * s / d;
    for (int j = 0; j < d; ++j) df_dz[j] = dz;
}

double ProblemSpec::terminal(std::span<const double> x) const {
    switch (kind) {
    case ProblemKind::heat:
    case ProblemKind::bs1: return std::cos(sum_of(x));
    case ProblemKind::hjb: return std::sqrt(std::sqrt(sum_of_squares(x)));
    case ProblemKind::bs2: return normal_cdf(sum_of(x));
    }
    return 0.0;
}

double ProblemSpec::closed_form(double t, std::span<const double> x) const {
    const double e_half = std::exp(0.5 * (T - t));
    switch (kind) {
    case ProblemKind::heat:
    case ProblemKind::bs1: return std::cos(sum_of(x)) * e_half;
    case ProblemKind::bs2: return normal_cdf(sum_of(x)) * e_half;
    case ProblemKind::hjb:
        throw std::invalid_argument("hjb has no closed-form solution; use reference_solution");
    }
    return 0.0;
}

McEstimate hjb_reference(const ProblemSpec& problem, std::span<const double> x, double t,
                         const McRefConfig& mc) {
    // u(t,x) = -log E[exp(-||x + sqrt(2) W_{T-t}||_2^(1/2))], W_s ~ N(0, s I).
    const double tau = problem.T - t;
    const int d = problem.d;
    if (tau <= 0.0) {
        const double g = problem.terminal(x);
        return {g, 0.0};
    }
    const double scale = std::sqrt(2.0 * tau);
    CounterRng rng(derive_stream(mc.seed, 0x686A62)); // "hjb"
    double sum = 0.0, sumsq = 0.0;
    for (long i = 0; i < mc.samples; ++i) {
        double norm2 = 0.0;
        for (int j = 0; j < d; ++j) {
            const double w = inverse_normal_cdf(clamp_unit(rng.next_unit()));
            const double v = x[j] + scale * w;
            norm2 += v * v;
        }
        const double val = std::exp(-std::sqrt(std::sqrt(norm2)));
        sum += val;
        sumsq += val * val;
    }
    const double n = static_cast<double>(mc.samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sumsq / n - mean * mean) / (n - 1.0);
    McEstimate est;
    est.value = -std::log(mean);
    est.standard_error = std::sqrt(var) / mean; // delta method for -log
    return est;
}

double reference_solution(const ProblemSpec& problem, std::span<const double> x, double t,
                          const McRefConfig& mc, double* standard_error) {
    if (problem.has_closed_form()) {
        if (standard_error) *standard_error = 0.0;
        return problem.closed_form(t, x);
    }
    const McEstimate est = hjb_reference(problem, x, t, mc);
    if (standard_error) *standard_error = est.standard_error;
    return est.value;
}

TimeGrid TimeGrid::uniform(double T, int N) {
    if (N < 1) throw ConfigError("time grid needs at least one step");
    if (T <= 0.0) throw ConfigError("horizon T must be > 0");
    TimeGrid grid;
    grid.nodes.resize(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) grid.nodes[i] = T * static_cast<double>(i) / N;
    grid.nodes[N] = T; // exact terminal node
    return grid;
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) m = std::max(m, nodes[i + 1] - nodes[i]);
    return m;
}

void TimeGrid::validate() const {
    if (nodes.size() < 2 || nodes.front() != 0.0)
        throw std::invalid_argument("time grid must start at 0 and contain at least one step");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (nodes[i + 1] <= nodes[i])
            throw std::invalid_argument("time grid nodes must be strictly increasing");
}

void transform_normals(const NormalBatch& W, double a, double b, double t_i, double dt,
                       std::vector<double>& eta, std::vector<double>& w_ti,
                       std::vector<double>& dw) {
    if (W.s % 3 != 0) throw std::invalid_argument("transform_normals: batch width must be 3d");
    const int d = W.s / 3;
    const long m = W.m;
    eta.resize(static_cast<std::size_t>(m) * d);
    w_ti.resize(static_cast<std::size_t>(m) * d);
    dw.resize(static_cast<std::size_t>(m) * d);
    const double sqrt_t = std::sqrt(t_i);
    const double sqrt_dt = std::sqrt(dt);
    for (long r = 0; r < m; ++r) {
        const double* row = W.values.data() + static_cast<std::size_t>(r) * W.s;
        double* e = eta.data() + static_cast<std::size_t>(r) * d;
        double* w = w_ti.data() + static_cast<std::size_t>(r) * d;
        double* inc = dw.data() + static_cast<std::size_t>(r) * d;
        for (int j = 0; j < d; ++j) {
            e[j] = (b - a) * normal_cdf(row[j]) + a;
            w[j] = sqrt_t * row[d + j];
            inc[j] = sqrt_dt * row[2 * d + j];
        }
    }
}

PathSlice simulate_slice(const ProblemSpec& problem, const NormalBatch& normals, double t_i,
                         double dt) {
    if (normals.s != 3 * problem.d)
        throw std::invalid_argument("simulate_slice: normal batch width must be 3d");
    PathSlice slice;
    slice.m = normals.m;
    slice.d = problem.d;
    slice.t_i = t_i;
    slice.dt = dt;

    std::vector<double> w_ti;
    transform_normals(normals, problem.a, problem.b, t_i, dt, slice.eta, w_ti, slice.dw);

    const std::size_t total = slice.eta.size();
    slice.x_i.resize(total);
    slice.x_ip1.resize(total);
    const double mu = problem.mu;
    const double sigma = problem.sigma;
    if (problem.lognormal_state()) {
        const double drift = mu - 0.5 * sigma * sigma;
        for (std::size_t i = 0; i < total; ++i) {
            slice.x_i[i] = slice.eta[i] * std::exp(drift * t_i + sigma * w_ti[i]);
            slice.x_ip1[i] = slice.x_i[i] * std::exp(drift * dt + sigma * slice.dw[i]);
        }
    } else {
        for (std::size_t i = 0; i < total; ++i) {
            slice.x_i[i] = slice.eta[i] + mu * t_i + sigma * w_ti[i];
            slice.x_ip1[i] = slice.x_i[i] + mu * dt + sigma * slice.dw[i];
        }
    }
    return slice;
}

double pde_residual(const ProblemSpec& problem, double t, std::span<const double> x, double h,
                    const DriverFn& driver_override) {
    if (!problem.has_closed_form())
        throw std::invalid_argument("pde_residual requires a closed-form solution");
    if (!(t > 0.0 && t < problem.T))
        throw std::invalid_argument("pde_residual: t must lie strictly inside (0, T)");

    const int d = problem.d;
    const auto u = [&](double tt, std::span<const double> xx) {
        return problem.closed_form(tt, xx);
    };

    std::vector<double> xp(x.begin(), x.end());
    const double u0 = u(t, xp);

    const double du_dt = (u(t + h, xp) - u(t - h, xp)) / (2.0 * h);

    std::vector<double> grad(d), lap(d);
    for (int j = 0; j < d; ++j) {
        const double xj = xp[j];
        xp[j] = xj + h;
        const double up = u(t, xp);
        xp[j] = xj - h;
        const double um = u(t, xp);
        xp[j] = xj;
        grad[j] = (up - um) / (2.0 * h);
        lap[j] = (up - 2.0 * u0 + um) / (h * h);
    }

    double second = 0.0, first = 0.0;
    std::vector<double> z(d);
    if (problem.lognormal_state()) {
        for (int j = 0; j < d; ++j) {
            second += 0.5 * problem.sigma * problem.sigma * xp[j] * xp[j] * lap[j];
            first += problem.mu * xp[j] * grad[j];
            z[j] = problem.sigma * xp[j] * grad[j];
        }
    } else {
        for (int j = 0; j < d; ++j) {
            second += 0.5 * problem.sigma * problem.sigma * lap[j];
            first += problem.mu * grad[j];
            z[j] = problem.sigma * grad[j];
        }
    }

    const double f = driver_override ? driver_override(t, xp, u0, z)
                                     : problem.driver(t, xp, u0, z);
    return du_dt + second + first + f;
}

} // namespace dbdp

#include "dbdp/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dbdp/errors.hpp"
#include "dbdp/rng.hpp"

namespace dbdp {

namespace fs = std::filesystem;

double step_transfer(const ProblemSpec& problem, double t, std::span<const double> x, double y,
                     std::span<const double> z, double h, std::span<const double> dw) {
    double zdw = 0.0;
    for (std::size_t j = 0; j < dw.size(); ++j) zdw += z[j] * dw[j];
    return y - problem.driver(t, x, y, z) * h + zdw;
}

void TrainingSchedule::validate() const {
    if (iterations_first < 0 || iterations_rest < 0 || batch_size < 1 || lr_first <= 0.0 ||
        lr_rest <= 0.0 || halve_first < 1 || halve_rest < 1 || weight_decay < 0.0)
        throw ConfigError("training schedule fields must be positive");
}

NetworkSpec NetConfig::make_spec(int d, int out) const {
    if (depth < 1 || hidden_width < 1) throw ConfigError("network depth and width must be >= 1");
    NetworkSpec spec;
    spec.layer_sizes.push_back(d);
    for (int i = 0; i < depth - 1; ++i) spec.layer_sizes.push_back(hidden_width);
    spec.layer_sizes.push_back(out);
    return spec;
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::mc ? "mc" : "rqmc"; }

SamplerKind sampler_kind_from_string(const std::string& name) {
    if (name == "mc") return SamplerKind::mc;
    if (name == "rqmc") return SamplerKind::rqmc;
    throw ConfigError("unknown sampler '" + name + "' (expected mc or rqmc)");
}

namespace {
constexpr std::uint64_t kBatchTag = 0x62617463; // "batc"
}

NormalBatch McSampler::normals(int step, long iteration, long m, int s) {
    const std::uint64_t seed = derive_stream(master_seed_, kBatchTag,
                                             static_cast<std::uint64_t>(step),
                                             static_cast<std::uint64_t>(iteration));
    return to_normals(mc_points(seed, m, s));
}

NormalBatch RqmcSampler::normals(int step, long iteration, long m, int s) {
    if (!gen_ || gen_->dimension() != s) gen_ = std::make_unique<SobolGenerator>(s);
    gen_->seek(0);
    ScrambleKey key;
    key.seed = derive_stream(master_seed_, kBatchTag, static_cast<std::uint64_t>(step),
                             static_cast<std::uint64_t>(iteration));
    key.mode = mode_;
    return to_normals(sobol_points(*gen_, key, m));
}

std::unique_ptr<BatchSampler> make_sampler(SamplerKind kind, ScrambleMode mode,
                                           std::uint64_t master_seed) {
    if (kind == SamplerKind::mc) return std::make_unique<McSampler>(master_seed);
    return std::make_unique<RqmcSampler>(master_seed, mode);
}

ValueFn terminal_value_fn(const ProblemSpec& problem) {
    const int d = problem.d;
    return [problem, d](const double* X, long n, double* out) {
        for (long r = 0; r < n; ++r)
            out[r] = problem.terminal({X + static_cast<std::size_t>(r) * d,
                                       static_cast<std::size_t>(d)});
    };
}

ValueFn network_value_fn(const Network& net) {
    return [&net](const double* X, long n, double* out) {
        net.forward(X, n, Mode::eval, nullptr, out);
    };
}

std::vector<double> step_residuals(const ProblemSpec& problem, const ValueFn& u_next,
                                   const PathSlice& slice, std::span<const double> u_vals,
                                   std::span<const double> z_vals) {
    const long m = slice.m;
    const int d = slice.d;
    std::vector<double> target(m);
    u_next(slice.x_ip1.data(), m, target.data());

    std::vector<double> h(m);
    for (long r = 0; r < m; ++r) {
        const std::span<const double> x{slice.x_i.data() + static_cast<std::size_t>(r) * d,
                                        static_cast<std::size_t>(d)};
        const std::span<const double> z{z_vals.data() + static_cast<std::size_t>(r) * d,
                                        static_cast<std::size_t>(d)};
        const std::span<const double> dw{slice.dw.data() + static_cast<std::size_t>(r) * d,
                                         static_cast<std::size_t>(d)};
        h[r] = target[r] - step_transfer(problem, slice.t_i, x, u_vals[r], z, slice.dt, dw);
    }
    return h;
}

double step_loss_value(const ProblemSpec& problem, const ValueFn& u_next,
                       const std::function<void(const double*, long, double*)>& u_fn,
                       const std::function<void(const double*, long, double*)>& z_fn,
                       const PathSlice& slice) {
    const long m = slice.m;
    std::vector<double> u_vals(m);
    std::vector<double> z_vals(static_cast<std::size_t>(m) * slice.d);
    u_fn(slice.x_i.data(), m, u_vals.data());
    z_fn(slice.x_i.data(), m, z_vals.data());
    const std::vector<double> h = step_residuals(problem, u_next, slice, u_vals, z_vals);
    double acc = 0.0;
    for (double v : h) acc += v * v;
    return acc / static_cast<double>(m);
}

StepLossResult step_loss(const ProblemSpec& problem, const ValueFn& u_next, StepNetworks& nets,
                         const PathSlice& slice) {
    const long m = slice.m;
    const int d = slice.d;

    ForwardCache cache_u, cache_z;
    std::vector<double> u_vals(m);
    std::vector<double> z_vals(static_cast<std::size_t>(m) * d);
    nets.u.forward(slice.x_i.data(), m, Mode::train, &cache_u, u_vals.data());
    nets.z.forward(slice.x_i.data(), m, Mode::train, &cache_z, z_vals.data());

    const std::vector<double> h = step_residuals(problem, u_next, slice, u_vals, z_vals);

    double loss = 0.0;
    for (double v : h) loss += v * v;
    loss /= static_cast<double>(m);
    if (!std::isfinite(loss)) throw TrainingAbort("non-finite training loss");

    // dL/dH_r = 2 H_r / m; H depends on the networks only through
    // F(t, x, u, z, h, dw), so
    //   dL/du_r   = (2 H_r / m) (h df/dy - 1)
    //   dL/dz_rk  = (2 H_r / m) (h df/dz_k - dw_rk).
    std::vector<double> dL_du(m);
    std::vector<double> dL_dz(static_cast<std::size_t>(m) * d);
    std::vector<double> df_dz(d);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (long r = 0; r < m; ++r) {
        const std::span<const double> x{slice.x_i.data() + static_cast<std::size_t>(r) * d,
                                        static_cast<std::size_t>(d)};
        const std::span<const double> z{z_vals.data() + static_cast<std::size_t>(r) * d,
                                        static_cast<std::size_t>(d)};
        double df_dy = 0.0;
        problem.driver_partials(slice.t_i, x, u_vals[r], z, df_dy, df_dz);
        const double scale = 2.0 * h[r] * inv_m;
        dL_du[r] = scale * (slice.dt * df_dy - 1.0);
        for (int k = 0; k < d; ++k)
            dL_dz[static_cast<std::size_t>(r) * d + k] =
                scale * (slice.dt * df_dz[k] - slice.dw[static_cast<std::size_t>(r) * d + k]);
    }

    StepLossResult result;
    result.loss = loss;
    result.grad_u = nets.u.backward(cache_u, dL_du.data());
    result.grad_z = nets.z.backward(cache_z, dL_dz.data());
    return result;
}

StepTrainResult train_step(const ProblemSpec& problem, const TimeGrid& grid, int step,
                           const ValueFn& u_next, const TrainingSchedule& schedule,
                           const NetConfig& net_config, BatchSampler& sampler,
                           std::uint64_t master_seed, const StepNetworks* warm_from) {
    schedule.validate();
    const int last_step = grid.steps() - 1;
    const bool first_tier = step == last_step;
    const long iterations = first_tier ? schedule.iterations_first : schedule.iterations_rest;
    const double t_i = grid.nodes[step];
    const double dt = grid.dt(step);

    StepTrainResult result;
    if (warm_from) {
        result.nets = *warm_from;
    } else {
        result.nets.u = Network::xavier(net_config.make_spec(problem.d, 1),
                                        net_config.batch_norm,
                                        derive_stream(master_seed, 0x75, step)); // 'u'
        result.nets.z = Network::xavier(net_config.make_spec(problem.d, problem.d),
                                        net_config.batch_norm,
                                        derive_stream(master_seed, 0x7A, step)); // 'z'
    }

    AdamState opt_u, opt_z;
    opt_u.base_lr = opt_z.base_lr = first_tier ? schedule.lr_first : schedule.lr_rest;
    opt_u.halving_period = opt_z.halving_period = first_tier ? schedule.halve_first
                                                             : schedule.halve_rest;
    opt_u.weight_decay = opt_z.weight_decay = schedule.weight_decay;
    opt_u.reset(result.nets.u.trainable_size());
    opt_z.reset(result.nets.z.trainable_size());

    result.meta.iterations = iterations;
    const long tail = std::max(1L, iterations / 20);
    double tail_sum = 0.0;
    long tail_count = 0;

    for (long iter = 0; iter < iterations; ++iter) {
        const NormalBatch batch = sampler.normals(step, iter, schedule.batch_size, 3 * problem.d);
        const PathSlice slice = simulate_slice(problem, batch, t_i, dt);
        try {
            StepLossResult sl = step_loss(problem, u_next, result.nets, slice);
            if (iter == 0) result.meta.first_loss = sl.loss;
            if (iter >= iterations - tail) {
                tail_sum += sl.loss;
                ++tail_count;
            }
            adam_step(result.nets.u.trainable(), sl.grad_u, opt_u);
            adam_step(result.nets.z.trainable(), sl.grad_z, opt_z);
        } catch (const TrainingAbort& abort) {
            throw TrainingAbort(abort.what(), step, iter);
        }
    }
    result.meta.final_loss = tail_count > 0 ? tail_sum / tail_count : result.meta.first_loss;
    return result;
}

std::vector<double> TrainedSolution::evaluate_initial(const double* X, long n) const {
    std::vector<double> out(n);
    steps.front().u.forward(X, n, Mode::eval, nullptr, out.data());
    return out;
}

TrainedSolution solve_with_sampler(const ProblemSpec& problem, const TimeGrid& grid,
                                   const TrainingSchedule& schedule, const NetConfig& net_config,
                                   BatchSampler& sampler, std::uint64_t master_seed) {
    grid.validate();
    const int N = grid.steps();

    TrainedSolution solution;
    solution.problem = problem;
    solution.grid = grid;
    solution.net_config = net_config;
    solution.master_seed = master_seed;
    solution.steps.resize(N);
    solution.meta.resize(N);

    for (int i = N - 1; i >= 0; --i) {
        const ValueFn u_next = i == N - 1 ? terminal_value_fn(problem)
                                          : network_value_fn(solution.steps[i + 1].u);
        const StepNetworks* warm = i == N - 1 ? nullptr : &solution.steps[i + 1];
        StepTrainResult r =
            train_step(problem, grid, i, u_next, schedule, net_config, sampler, master_seed, warm);
        solution.steps[i] = std::move(r.nets);
        solution.meta[i] = r.meta;
    }
    return solution;
}

TrainedSolution solve(const ProblemSpec& problem, const TimeGrid& grid,
                      const TrainingSchedule& schedule, const NetConfig& net_config,
                      SamplerKind sampler_kind, ScrambleMode scramble,
                      std::uint64_t master_seed) {
    auto sampler = make_sampler(sampler_kind, scramble, master_seed);
    TrainedSolution solution =
        solve_with_sampler(problem, grid, schedule, net_config, *sampler, master_seed);
    solution.sampler = sampler_kind;
    solution.scramble = scramble;
    return solution;
}

namespace {

void write_value(std::FILE* f, double v, bool lead_space) {
    std::fprintf(f, lead_space ? " %.17g" : "%.17g", v);
}

} // namespace

void save_network(const Network& net, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    const auto& sizes = net.spec().layer_sizes;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        std::fprintf(f, i == 0 ? "%d" : " %d", sizes[i]);
    std::fprintf(f, "\n%d %zu\n", net.batch_norm() ? 1 : 0, net.bn_state().running_mean.size());
    bool first = true;
    for (double v : net.trainable()) {
        write_value(f, v, !first);
        first = false;
    }
    for (double v : net.bn_state().running_mean) write_value(f, v, true);
    for (double v : net.bn_state().running_var) write_value(f, v, true);
    std::fprintf(f, "\n");
    std::fclose(f);
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint '" + path + "' is empty");
    NetworkSpec spec;
    {
        std::istringstream ls(line);
        int v;
        while (ls >> v) spec.layer_sizes.push_back(v);
    }
    int bn_flag = 0;
    std::size_t stat_count = 0;
    if (!(in >> bn_flag >> stat_count))
        throw std::runtime_error("checkpoint '" + path + "' has no batch-norm header");

    Network net(spec, bn_flag != 0);
    if (stat_count != net.bn_state().running_mean.size())
        throw std::runtime_error("checkpoint '" + path + "' running-stat count mismatch");
    for (double& v : net.trainable())
        if (!(in >> v)) throw std::runtime_error("checkpoint '" + path + "' is truncated");
    for (double& v : net.bn_state().running_mean)
        if (!(in >> v)) throw std::runtime_error("checkpoint '" + path + "' is truncated");
    for (double& v : net.bn_state().running_var)
        if (!(in >> v)) throw std::runtime_error("checkpoint '" + path + "' is truncated");
    return net;
}

void save_solution(const TrainedSolution& solution, const std::string& dir) {
    fs::create_directories(dir);
    const int N = solution.grid.steps();
    std::ofstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("cannot write manifest in '" + dir + "'");
    mf.precision(17);
    mf << "problem = " << to_string(solution.problem.kind) << "\n";
    mf << "d = " << solution.problem.d << "\n";
    mf << "T = " << solution.problem.T << "\n";
    mf << "a = " << solution.problem.a << "\n";
    mf << "b = " << solution.problem.b << "\n";
    mf << "mu = " << solution.problem.mu << "\n";
    mf << "sigma = " << solution.problem.sigma << "\n";
    mf << "grid =";
    for (double t : solution.grid.nodes) mf << " " << t;
    mf << "\n";
    mf << "hidden_width = " << solution.net_config.hidden_width << "\n";
    mf << "depth = " << solution.net_config.depth << "\n";
    mf << "batch_norm = " << (solution.net_config.batch_norm ? "true" : "false") << "\n";
    mf << "sampler = " << to_string(solution.sampler) << "\n";
    mf << "scramble = " << to_string(solution.scramble) << "\n";
    mf << "master_seed = " << solution.master_seed << "\n";
    for (int i = 0; i < N; ++i) {
        mf << "step" << i << "_iterations = " << solution.meta[i].iterations << "\n";
        mf << "step" << i << "_first_loss = " << solution.meta[i].first_loss << "\n";
        mf << "step" << i << "_final_loss = " << solution.meta[i].final_loss << "\n";
    }
    for (int i = 0; i < N; ++i) {
        save_network(solution.steps[i].u,
                     (fs::path(dir) / ("step" + std::to_string(i) + "_u.ckpt")).string());
        save_network(solution.steps[i].z,
                     (fs::path(dir) / ("step" + std::to_string(i) + "_z.ckpt")).string());
    }
}

TrainedSolution load_solution(const std::string& dir) {
    std::ifstream mf(fs::path(dir) / "manifest.txt");
    if (!mf) throw std::runtime_error("missing manifest.txt in '" + dir + "'");

    TrainedSolution solution;
    std::string line;
    std::string problem_name = "heat";
    int d = 1;
    while (std::getline(mf, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        const auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
        };
        trim(key);
        trim(value);
        if (key == "problem") problem_name = value;
        else if (key == "d") d = std::stoi(value);
        else if (key == "T") solution.problem.T = std::stod(value);
        else if (key == "a") solution.problem.a = std::stod(value);
        else if (key == "b") solution.problem.b = std::stod(value);
        else if (key == "mu") solution.problem.mu = std::stod(value);
        else if (key == "sigma") solution.problem.sigma = std::stod(value);
        else if (key == "grid") {
            std::istringstream gs(value);
            double t;
            solution.grid.nodes.clear();
            while (gs >> t) solution.grid.nodes.push_back(t);
        } else if (key == "hidden_width") solution.net_config.hidden_width = std::stoi(value);
        else if (key == "depth") solution.net_config.depth = std::stoi(value);
        else if (key == "batch_norm") solution.net_config.batch_norm = value == "true";
        else if (key == "sampler") solution.sampler = sampler_kind_from_string(value);
        else if (key == "scramble") solution.scramble = scramble_mode_from_string(value);
        else if (key == "master_seed") solution.master_seed = std::stoull(value);
        else if (key.starts_with("step")) {
            const auto us = key.find('_');
            const int idx = std::stoi(key.substr(4, us - 4));
            if (static_cast<std::size_t>(idx) >= solution.meta.size())
                solution.meta.resize(idx + 1);
            const std::string field = key.substr(us + 1);
            if (field == "iterations") solution.meta[idx].iterations = std::stol(value);
            else if (field == "first_loss") solution.meta[idx].first_loss = std::stod(value);
            else if (field == "final_loss") solution.meta[idx].final_loss = std::stod(value);
        }
    }
    solution.problem.kind = problem_kind_from_string(problem_name);
    solution.problem.d = d;
    solution.grid.validate();

    const int N = solution.grid.steps();
    solution.steps.resize(N);
    if (solution.meta.size() != static_cast<std::size_t>(N))
        solution.meta.resize(N);
    for (int i = 0; i < N; ++i) {
        solution.steps[i].u =
            load_network((fs::path(dir) / ("step" + std::to_string(i) + "_u.ckpt")).string());
        solution.steps[i].z =
            load_network((fs::path(dir) / ("step" + std::to_string(i) + "_z.ckpt")).string());
    }
    return solution;
}

} // namespace dbdp

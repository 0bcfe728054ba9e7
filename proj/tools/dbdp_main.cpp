// Command-line front end: solve, evaluate, rate-probe, reproduce-table.
// All randomness derives from the configured master seed; nothing reads
// the clock, OS entropy, or environment variables.

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dbdp/config.hpp"
#include "dbdp/errors.hpp"
#include "dbdp/evaluation.hpp"
#include "dbdp/scheme.hpp"

namespace fs = std::filesystem;
using namespace dbdp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;
};

ExperimentConfig load_and_override(const CommonFlags& flags) {
    ExperimentConfig cfg = load_config(flags.config_path);
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (flags.seed_set) cfg.master_seed = flags.seed;
    if (flags.workers > 0) cfg.workers = flags.workers;
    return cfg;
}

int cmd_solve(const CommonFlags& flags) {
    const ExperimentConfig cfg = load_and_override(flags);
    const ProblemSpec problem = cfg.make_problem();
    const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.N);
    TrainedSolution solution = solve(problem, grid, cfg.make_schedule(), cfg.make_net_config(),
                                     cfg.sampler, cfg.scramble, cfg.master_seed);

    const fs::path dir = cfg.out_dir;
    save_solution(solution, dir.string());
    {
        std::ofstream cf(dir / "effective_config.txt");
        cf << serialize_config(cfg);
    }
    std::printf("solution written to %s\n", dir.string().c_str());
    for (int i = 0; i < grid.steps(); ++i)
        std::printf("step %d: iterations %ld, first loss %.6g, final loss %.6g\n", i,
                    solution.meta[i].iterations, solution.meta[i].first_loss,
                    solution.meta[i].final_loss);
    return kExitOk;
}

int cmd_evaluate(const std::string& solution_dir, long m_eval, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir) {
    const TrainedSolution solution = load_solution(solution_dir);

    EvalOptions opts;
    if (m_eval > 0) opts.m_eval = m_eval;
    if (seed_set) opts.seed = seed;

    const ErrorReport report = relative_l2(solution, opts);
    const long points = solution.problem.has_closed_form() ? opts.m_eval : opts.hjb_eval_points;

    // Reconstruct enough of the configuration for the CSV fingerprint.
    ExperimentConfig cfg;
    cfg.problem = solution.problem.kind;
    cfg.d = solution.problem.d;
    cfg.T = solution.problem.T;
    cfg.N = solution.grid.steps();
    cfg.sampler = solution.sampler;
    cfg.scramble = solution.scramble;
    cfg.master_seed = solution.master_seed;
    cfg.hidden_width = solution.net_config.hidden_width;
    cfg.depth = solution.net_config.depth;
    cfg.batch_norm = solution.net_config.batch_norm;
    cfg.m_eval = opts.m_eval;
    cfg.eval_seed = opts.seed;
    const std::vector<std::string> comments = config_header_comments(cfg);

    const fs::path dir = out_dir.empty() ? fs::path(solution_dir) : fs::path(out_dir);
    fs::create_directories(dir);
    write_metrics_csv((dir / "metrics.csv").string(), report, points, comments);
    write_histogram_csv((dir / "histogram.csv").string(), report.histogram, comments);
    std::printf("relative_l2 = %.8g (m_eval = %ld, out_of_range = %ld)\n", report.relative_l2,
                points, report.histogram.out_of_range);
    if (report.reference_se_mean > 0.0)
        std::printf("mean reference standard error = %.3g\n", report.reference_se_mean);
    return kExitOk;
}

int cmd_rate_probe(const CommonFlags& flags, const std::string& integrand) {
    const ExperimentConfig cfg = load_and_override(flags);
    RateProbeConfig probe = cfg.make_rate_config();

    std::vector<RateProbeResult> results;
    if (integrand == "constant") {
        const auto h = [](std::span<const double>) { return 1.0; };
        results.push_back(integrand_rate_probe(h, 6, 1.0, SamplerKind::mc, probe));
        results.push_back(integrand_rate_probe(h, 6, 1.0, SamplerKind::rqmc, probe));
    } else if (integrand == "genz") {
        // Smooth separable product on (0,1)^6 with exact integral 1.
        const auto h = [](std::span<const double> u) {
            double prod = 1.0;
            for (double v : u) prod *= 1.0 + (v - 0.5);
            return prod;
        };
        results.push_back(integrand_rate_probe(h, 6, 1.0, SamplerKind::mc, probe));
        results.push_back(integrand_rate_probe(h, 6, 1.0, SamplerKind::rqmc, probe));
    } else if (integrand == "step-loss") {
        const ProblemSpec problem = ProblemSpec::make(cfg.problem, cfg.rate_d, cfg.T);
        NetConfig net = cfg.make_net_config();
        net.hidden_width = cfg.rate_d + 20;
        net.batch_norm = false;
        StepNetworks nets;
        nets.u = Network::xavier(net.make_spec(problem.d, 1), false,
                                 derive_stream(cfg.master_seed, 0x70726F6265, 0));
        nets.z = Network::xavier(net.make_spec(problem.d, problem.d), false,
                                 derive_stream(cfg.master_seed, 0x70726F6265, 1));
        const TimeGrid grid = TimeGrid::uniform(cfg.T, cfg.N);
        const int step = grid.steps() - 1;
        results.push_back(quadrature_rate_probe(problem, nets, grid.nodes[step], grid.dt(step),
                                                SamplerKind::mc, probe));
        results.push_back(quadrature_rate_probe(problem, nets, grid.nodes[step], grid.dt(step),
                                                SamplerKind::rqmc, probe));
    } else {
        throw ConfigError("unknown integrand '" + integrand +
                          "' (expected step-loss, genz or constant)");
    }

    fs::create_directories(cfg.out_dir);
    write_rate_csv((fs::path(cfg.out_dir) / "rate_probe.csv").string(), results,
                   config_header_comments(cfg));
    for (const RateProbeResult& r : results) {
        if (r.degenerate)
            std::printf("%s: degenerate case (all deviations zero), no slope\n",
                        r.sampler.c_str());
        else
            std::printf("%s: fitted slope %.4f\n", r.sampler.c_str(), r.fitted_slope);
    }
    return kExitOk;
}

int cmd_reproduce_table(const std::string& table_id, const std::string& scale,
                        const std::string& out_dir, std::uint64_t seed, bool seed_set,
                        int workers) {
    const ProblemKind kind = problem_kind_from_string(table_id);
    const bool desk = scale == "desk";
    if (!desk && scale != "full") throw ConfigError("scale must be desk or full");

    SuiteConfig suite;
    suite.master_seed = seed_set ? seed : 1;
    suite.workers = workers;
    suite.net_config.hidden_width = -1; // d + 20 per cell
    suite.scramble = ScrambleMode::owen_nested;

    if (desk) {
        suite.n_runs = kind == ProblemKind::hjb ? 2 : 4;
        suite.schedule.iterations_first = 4000;
        suite.schedule.iterations_rest = 1500;
        suite.schedule.lr_first = 0.01;
        suite.schedule.lr_rest = 0.001;
        suite.schedule.halve_first = 1000;
        suite.schedule.halve_rest = 400;
        for (SamplerKind sampler : {SamplerKind::mc, SamplerKind::rqmc}) {
            SuiteCell cell;
            cell.problem = kind;
            cell.d = 10;
            cell.N = 2;
            cell.m = 1L << 12;
            cell.sampler = sampler;
            suite.cells.push_back(cell);
        }
    } else {
        suite.n_runs = 8;
        suite.schedule = TrainingSchedule{}; // paper-scale defaults
        for (int d : {20, 50})
            for (long m : {1L << 12, 1L << 14, 1L << 16})
                for (SamplerKind sampler : {SamplerKind::mc, SamplerKind::rqmc}) {
                    SuiteCell cell;
                    cell.problem = kind;
                    cell.d = d;
                    cell.N = 2;
                    cell.m = m;
                    cell.sampler = sampler;
                    suite.cells.push_back(cell);
                }
        if (kind == ProblemKind::hjb) suite.eval.hjb_eval_points = 1L << 12;
    }

    const std::vector<SuiteCellResult> results = run_suite(suite);

    ExperimentConfig cfg;
    cfg.problem = kind;
    cfg.d = suite.cells.front().d;
    cfg.N = suite.cells.front().N;
    cfg.batch_size = suite.cells.front().m;
    cfg.iterations_first = suite.schedule.iterations_first;
    cfg.iterations_rest = suite.schedule.iterations_rest;
    cfg.lr_first = suite.schedule.lr_first;
    cfg.lr_rest = suite.schedule.lr_rest;
    cfg.halve_first = suite.schedule.halve_first;
    cfg.halve_rest = suite.schedule.halve_rest;
    cfg.n_runs = suite.n_runs;
    cfg.master_seed = suite.master_seed;
    cfg.workers = suite.workers;
    cfg.out_dir = out_dir.empty() ? "." : out_dir;
    std::vector<std::string> comments = config_header_comments(cfg);
    comments.insert(comments.begin() + 1, "scale = " + scale);

    fs::create_directories(cfg.out_dir);
    const std::string path =
        (fs::path(cfg.out_dir) / ("table_" + table_id + "_" + scale + ".csv")).string();
    write_suite_csv(path, results, comments);

    std::printf("problem,d,N,m,sampler,n_runs,mean_rel_l2,std_rel_l2\n");
    bool all_complete = true;
    for (const SuiteCellResult& r : results) {
        if (!r.complete) {
            all_complete = false;
            std::printf("%s,%d,%d,%ld,%s,%d,incomplete (%s)\n", to_string(r.cell.problem).c_str(),
                        r.cell.d, r.cell.N, r.cell.m, to_string(r.cell.sampler).c_str(), r.n_runs,
                        r.failure.c_str());
        } else {
            std::printf("%s,%d,%d,%ld,%s,%d,%.6g,%.6g\n", to_string(r.cell.problem).c_str(),
                        r.cell.d, r.cell.N, r.cell.m, to_string(r.cell.sampler).c_str(), r.n_runs,
                        r.mean_rel_l2, r.std_rel_l2);
        }
    }
    std::printf("table written to %s\n", path.c_str());
    return all_complete ? kExitOk : kExitRuntime;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deep backward dynamic programming PDE solver with MC/RQMC sampling"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* solve_cmd = app.add_subcommand("solve", "Train a solution from a config file");
    solve_cmd->add_option("--config", flags.config_path, "Config file path")->required();
    solve_cmd->add_option("--out", flags.out_dir, "Output directory");
    auto* solve_seed = solve_cmd->add_option("--seed", flags.seed, "Master seed override");
    solve_cmd->add_option("--workers", flags.workers, "Worker threads");

    std::string solution_dir;
    long m_eval = 0;
    std::string eval_out;
    auto* eval_cmd = app.add_subcommand("evaluate", "Evaluate a trained solution directory");
    eval_cmd->add_option("solution_dir", solution_dir, "Solution directory")->required();
    eval_cmd->add_option("--m-eval", m_eval, "Evaluation sample count (default 65536)");
    auto* eval_seed = eval_cmd->add_option("--seed", flags.seed, "Evaluation seed");
    eval_cmd->add_option("--out", eval_out, "Output directory (default: solution dir)");

    std::string integrand = "step-loss";
    auto* rate_cmd = app.add_subcommand("rate-probe", "Empirical MC vs RQMC error-rate probe");
    rate_cmd->add_option("--config", flags.config_path, "Config file path")->required();
    rate_cmd->add_option("--out", flags.out_dir, "Output directory");
    auto* rate_seed = rate_cmd->add_option("--seed", flags.seed, "Master seed override");
    rate_cmd->add_option("--integrand", integrand, "step-loss, genz or constant");

    std::string table_id;
    std::string scale = "desk";
    std::string table_out;
    int table_workers = 0;
    auto* table_cmd = app.add_subcommand("reproduce-table", "Run a benchmark error table");
    table_cmd->add_option("table_id", table_id, "heat, hjb, bs1 or bs2")->required();
    table_cmd->add_option("--scale", scale, "desk or full (full is long-running)");
    table_cmd->add_option("--out", table_out, "Output directory");
    auto* table_seed = table_cmd->add_option("--seed", flags.seed, "Master seed override");
    table_cmd->add_option("--workers", table_workers, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) {
            flags.seed_set = solve_seed->count() > 0;
            return cmd_solve(flags);
        }
        if (eval_cmd->parsed())
            return cmd_evaluate(solution_dir, m_eval, flags.seed, eval_seed->count() > 0,
                                eval_out);
        if (rate_cmd->parsed()) {
            flags.seed_set = rate_seed->count() > 0;
            return cmd_rate_probe(flags, integrand);
        }
        if (table_cmd->parsed())
            return cmd_reproduce_table(table_id, scale, table_out, flags.seed,
                                       table_seed->count() > 0, table_workers);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}

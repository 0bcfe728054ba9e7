#include "dbdp/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "dbdp/errors.hpp"
#include "dbdp/rng.hpp"

namespace dbdp {

double Histogram::in_range_integral() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i)
        acc += density[i] * (edges[i + 1] - edges[i]);
    return acc;
}

Histogram pointwise_histogram(std::span<const double> errors, double lo, double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw std::invalid_argument("pointwise_histogram: bad range");
    Histogram hist;
    hist.total = static_cast<long>(errors.size());
    hist.edges.resize(static_cast<std::size_t>(bins) + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i) hist.edges[i] = lo + width * i;
    hist.edges[bins] = hi;

    std::vector<long> counts(bins, 0);
    for (double e : errors) {
        if (e < lo || e > hi) {
            ++hist.out_of_range;
            continue;
        }
        int bin = static_cast<int>((e - lo) / width);
        if (bin == bins) bin = bins - 1; // right edge closes the last bin
        ++counts[bin];
    }
    hist.density.resize(bins);
    const double norm = hist.total > 0 ? 1.0 / (static_cast<double>(hist.total) * width) : 0.0;
    for (int i = 0; i < bins; ++i) hist.density[i] = counts[i] * norm;
    return hist;
}

std::vector<double> evaluation_points(const ProblemSpec& problem, long m, std::uint64_t seed) {
    const PointBatch uniforms = mc_points(derive_stream(seed, 0x6576616C), m, problem.d); // "eval"
    std::vector<double> eta(uniforms.values.size());
    const double span = problem.b - problem.a;
    for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = problem.a + span * uniforms.values[i];
    return eta;
}

std::vector<double> reference_values(const ProblemSpec& problem, const std::vector<double>& eta,
                                     long m, const EvalOptions& opts,
                                     std::vector<double>* standard_errors) {
    const int d = problem.d;
    std::vector<double> u_ref(m);
    if (standard_errors) standard_errors->assign(m, 0.0);
    for (long i = 0; i < m; ++i) {
        const std::span<const double> x{eta.data() + static_cast<std::size_t>(i) * d,
                                        static_cast<std::size_t>(d)};
        if (problem.has_closed_form()) {
            u_ref[i] = problem.closed_form(0.0, x);
        } else {
            McRefConfig mc;
            mc.samples = opts.hjb_ref_samples;
            mc.seed = derive_stream(opts.seed, 0x726566, static_cast<std::uint64_t>(i)); // "ref"
            const McEstimate est = hjb_reference(problem, x, 0.0, mc);
            u_ref[i] = est.value;
            if (standard_errors) (*standard_errors)[i] = est.standard_error;
        }
    }
    return u_ref;
}

ErrorReport relative_l2_against(const TrainedSolution& solution, const std::vector<double>& eta,
                                const std::vector<double>& u_ref,
                                const std::vector<double>* ref_se) {
    const int d = solution.problem.d;
    const long m = static_cast<long>(u_ref.size());
    const std::vector<double> u_hat = solution.evaluate_initial(eta.data(), m);

    ErrorReport report;
    report.pointwise_errors.resize(m);
    double num = 0.0, den = 0.0;
    for (long i = 0; i < m; ++i) {
        const double diff = u_hat[i] - u_ref[i];
        report.pointwise_errors[i] = diff;
        num += diff * diff;
        den += u_ref[i] * u_ref[i];
    }
    if (den <= 0.0) throw std::runtime_error("relative_l2: reference norm is zero");
    report.relative_l2 = std::sqrt(num / den);
    report.histogram = pointwise_histogram(report.pointwise_errors);
    if (ref_se && !ref_se->empty()) {
        double acc = 0.0;
        for (double s : *ref_se) acc += s;
        report.reference_se_mean = acc / static_cast<double>(ref_se->size());
    }
    (void)d;
    return report;
}

ErrorReport relative_l2(const TrainedSolution& solution, const EvalOptions& opts) {
    const ProblemSpec& problem = solution.problem;
    const long m = problem.has_closed_form() ? opts.m_eval : opts.hjb_eval_points;
    const std::vector<double> eta = evaluation_points(problem, m, opts.seed);
    std::vector<double> se;
    const std::vector<double> u_ref = reference_values(problem, eta, m, opts, &se);
    return relative_l2_against(solution, eta, u_ref, &se);
}

double fit_rate(std::span<const long> m_values, std::span<const double> rmse_values) {
    if (m_values.size() != rmse_values.size() || m_values.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 (m, rmse) pairs");
    const std::size_t n = m_values.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(rmse_values[i] > 0.0))
            throw std::invalid_argument("fit_rate: rmse values must be positive");
        const double x = std::log2(static_cast<double>(m_values[i]));
        const double y = std::log2(rmse_values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    return (n * sxy - sx * sy) / denom;
}

namespace {

// RMSE over replications of the deviation between batch means and the
// oracle value, for one sampler at one batch size.
template <typename BatchMean>
double replication_rmse(long m, int replications, SamplerKind sampler, ScrambleMode scramble,
                        std::uint64_t seed, const BatchMean& batch_mean, double oracle) {
    double acc = 0.0;
    for (int rep = 0; rep < replications; ++rep) {
        const double dev = batch_mean(m, sampler, scramble,
                                      derive_stream(seed, 0x726570, static_cast<std::uint64_t>(m),
                                                    static_cast<std::uint64_t>(rep))) -
                           oracle;
        acc += dev * dev;
    }
    return std::sqrt(acc / replications);
}

} // namespace

RateProbeResult quadrature_rate_probe(const ProblemSpec& problem, const StepNetworks& nets,
                                      double t_i, double dt, SamplerKind sampler,
                                      const RateProbeConfig& config) {
    const int s = 3 * problem.d;
    const ValueFn u_next = terminal_value_fn(problem);
    const auto u_fn = [&nets](const double* X, long n, double* out) {
        nets.u.forward(X, n, Mode::eval, nullptr, out);
    };
    const auto z_fn = [&nets](const double* X, long n, double* out) {
        nets.z.forward(X, n, Mode::eval, nullptr, out);
    };

    // Empirical risk over one batch of uniforms mapped through the exact
    // simulation. This is the training integrand with frozen parameters.
    const auto batch_mean = [&](long m, SamplerKind kind, ScrambleMode scramble,
                                std::uint64_t stream) {
        NormalBatch normals;
        if (kind == SamplerKind::mc) {
            normals = to_normals(mc_points(stream, m, s));
        } else {
            SobolGenerator gen(s);
            ScrambleKey key{stream, scramble};
            normals = to_normals(sobol_points(gen, key, m));
        }
        const PathSlice slice = simulate_slice(problem, normals, t_i, dt);
        return step_loss_value(problem, u_next, u_fn, z_fn, slice);
    };

    RateProbeResult result;
    result.sampler = to_string(sampler);
    result.m_values = config.m_values;

    const double oracle = batch_mean(config.oracle_m, SamplerKind::rqmc, config.scramble,
                                     derive_stream(config.seed, 0x6F7261636C)); // "oracl"

    bool all_zero = true;
    for (long m : config.m_values) {
        const double rmse = replication_rmse(m, config.replications, sampler, config.scramble,
                                             config.seed, batch_mean, oracle);
        result.rmse_values.push_back(rmse);
        if (rmse > 0.0) all_zero = false;
    }
    result.degenerate = all_zero;
    if (!result.degenerate)
        result.fitted_slope = fit_rate(result.m_values, result.rmse_values);
    return result;
}

RateProbeResult integrand_rate_probe(const std::function<double(std::span<const double>)>& h,
                                     int s, double exact, SamplerKind sampler,
                                     const RateProbeConfig& config) {
    const auto batch_mean = [&](long m, SamplerKind kind, ScrambleMode scramble,
                                std::uint64_t stream) {
        PointBatch batch;
        if (kind == SamplerKind::mc) {
            batch = mc_points(stream, m, s);
        } else {
            SobolGenerator gen(s);
            ScrambleKey key{stream, scramble};
            batch = sobol_points(gen, key, m);
        }
        double acc = 0.0;
        for (long r = 0; r < m; ++r)
            acc += h({batch.values.data() + static_cast<std::size_t>(r) * s,
                      static_cast<std::size_t>(s)});
        return acc / static_cast<double>(m);
    };

    RateProbeResult result;
    result.sampler = to_string(sampler);
    result.m_values = config.m_values;
    bool all_zero = true;
    for (long m : config.m_values) {
        const double rmse = replication_rmse(m, config.replications, sampler, config.scramble,
                                             config.seed, batch_mean, exact);
        result.rmse_values.push_back(rmse);
        if (rmse > 0.0) all_zero = false;
    }
    result.degenerate = all_zero;
    if (!result.degenerate)
        result.fitted_slope = fit_rate(result.m_values, result.rmse_values);
    return result;
}

void mean_std(std::span<const double> values, double& mean, double& sd) {
    const std::size_t n = values.size();
    mean = 0.0;
    sd = 0.0;
    if (n == 0) return;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    if (n < 2) return;
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    sd = std::sqrt(acc / static_cast<double>(n - 1));
}

namespace {

std::uint64_t run_seed(const SuiteConfig& config, const SuiteCell& cell, int run) {
    // Content-addressed so cells are independent of execution order.
    const std::uint64_t cell_id =
        derive_stream(static_cast<std::uint64_t>(cell.problem),
                      static_cast<std::uint64_t>(cell.d) | (static_cast<std::uint64_t>(cell.N) << 16),
                      static_cast<std::uint64_t>(cell.m),
                      static_cast<std::uint64_t>(cell.sampler));
    return derive_stream(config.master_seed, cell_id, static_cast<std::uint64_t>(run));
}

} // namespace

std::vector<SuiteCellResult> run_suite(const SuiteConfig& config) {
    struct Job {
        std::size_t cell_index;
        int run;
    };
    std::vector<SuiteCellResult> results(config.cells.size());
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        results[c].cell = config.cells[c];
        results[c].n_runs = config.n_runs;
        results[c].run_errors.assign(config.n_runs, 0.0);
        for (int r = 0; r < config.n_runs; ++r) jobs.push_back({c, r});
    }

    // Shared per-cell evaluation data (points and references); expensive
    // for hjb, so computed once per cell.
    std::vector<std::vector<double>> cell_eta(config.cells.size());
    std::vector<std::vector<double>> cell_ref(config.cells.size());
    std::vector<std::vector<double>> cell_se(config.cells.size());
    for (std::size_t c = 0; c < config.cells.size(); ++c) {
        const SuiteCell& cell = config.cells[c];
        const ProblemSpec problem = ProblemSpec::make(cell.problem, cell.d, config.T);
        const long m_eval =
            problem.has_closed_form() ? config.eval.m_eval : config.eval.hjb_eval_points;
        cell_eta[c] = evaluation_points(problem, m_eval, config.eval.seed);
        cell_ref[c] = reference_values(problem, cell_eta[c], m_eval, config.eval, &cell_se[c]);
    }

    std::vector<std::string> failures(jobs.size());
    std::atomic<std::size_t> next_job{0};
    const auto worker = [&]() {
        while (true) {
            const std::size_t j = next_job.fetch_add(1);
            if (j >= jobs.size()) return;
            const Job job = jobs[j];
            const SuiteCell& cell = config.cells[job.cell_index];
            try {
                ProblemSpec problem = ProblemSpec::make(cell.problem, cell.d, config.T);
                TrainingSchedule schedule = config.schedule;
                schedule.batch_size = cell.m;
                NetConfig net = config.net_config;
                if (net.hidden_width <= 0) net.hidden_width = cell.d + 20;
                const TimeGrid grid = TimeGrid::uniform(config.T, cell.N);
                TrainedSolution solution =
                    solve(problem, grid, schedule, net, cell.sampler, config.scramble,
                          run_seed(config, cell, job.run));
                const ErrorReport report =
                    relative_l2_against(solution, cell_eta[job.cell_index],
                                        cell_ref[job.cell_index], &cell_se[job.cell_index]);
                results[job.cell_index].run_errors[job.run] = report.relative_l2;
            } catch (const std::exception& e) {
                failures[j] = e.what();
            }
        }
    };

    int workers = config.workers > 0 ? config.workers
                                     : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min<std::size_t>(workers, jobs.size());
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!failures[j].empty()) {
            results[jobs[j].cell_index].complete = false;
            results[jobs[j].cell_index].failure = failures[j];
        }
    }
    for (auto& cell_result : results) {
        mean_std(cell_result.run_errors, cell_result.mean_rel_l2, cell_result.std_rel_l2);
    }
    return results;
}

namespace {

std::ofstream open_csv(const std::string& path, const std::vector<std::string>& comments) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out.precision(12);
    for (const std::string& c : comments) out << "# " << c << "\n";
    return out;
}

} // namespace

void write_histogram_csv(const std::string& path, const Histogram& hist,
                         const std::vector<std::string>& header_comments) {
    std::ofstream out = open_csv(path, header_comments);
    out << "bin_left,bin_right,density\n";
    for (std::size_t i = 0; i < hist.density.size(); ++i)
        out << hist.edges[i] << "," << hist.edges[i + 1] << "," << hist.density[i] << "\n";
    out << "out_of_range," << hist.out_of_range << "\n";
}

void write_rate_csv(const std::string& path, const std::vector<RateProbeResult>& results,
                    const std::vector<std::string>& header_comments) {
    std::ofstream out = open_csv(path, header_comments);
    for (const RateProbeResult& r : results) {
        if (r.degenerate) out << "# sampler " << r.sampler << ": degenerate (zero deviations)\n";
        else out << "# slope_" << r.sampler << " = " << r.fitted_slope << "\n";
    }
    out << "sampler,m,rmse\n";
    for (const RateProbeResult& r : results)
        for (std::size_t i = 0; i < r.m_values.size(); ++i)
            out << r.sampler << "," << r.m_values[i] << "," << r.rmse_values[i] << "\n";
}

void write_suite_csv(const std::string& path, const std::vector<SuiteCellResult>& results,
                     const std::vector<std::string>& header_comments) {
    std::ofstream out = open_csv(path, header_comments);
    out << "problem,d,N,m,sampler,n_runs,mean_rel_l2,std_rel_l2\n";
    for (const SuiteCellResult& r : results) {
        out << to_string(r.cell.problem) << "," << r.cell.d << "," << r.cell.N << "," << r.cell.m
            << "," << to_string(r.cell.sampler) << "," << r.n_runs << ",";
        if (r.complete) out << r.mean_rel_l2 << "," << r.std_rel_l2 << "\n";
        else out << "incomplete,incomplete\n";
    }
}

void write_metrics_csv(const std::string& path, const ErrorReport& report, long m_eval,
                       const std::vector<std::string>& header_comments) {
    std::ofstream out = open_csv(path, header_comments);
    out << "metric,value\n";
    out << "relative_l2," << report.relative_l2 << "\n";
    out << "m_eval," << m_eval << "\n";
    out << "out_of_range," << report.histogram.out_of_range << "\n";
    out << "reference_se_mean," << report.reference_se_mean << "\n";
}

} // namespace dbdp

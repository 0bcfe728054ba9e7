#include "dbdp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "dbdp/errors.hpp"

namespace dbdp {

ProblemSpec ExperimentConfig::make_problem() const {
    ProblemSpec p = ProblemSpec::make(problem, d, T);
    if (override_domain) {
        if (!(a < b)) throw ConfigError("domain bounds must satisfy a < b");
        p.a = a;
        p.b = b;
    }
    if (override_coefficients) {
        p.mu = mu;
        p.sigma = sigma;
    }
    return p;
}

TrainingSchedule ExperimentConfig::make_schedule() const {
    TrainingSchedule s;
    s.iterations_first = iterations_first;
    s.iterations_rest = iterations_rest;
    s.lr_first = lr_first;
    s.lr_rest = lr_rest;
    s.halve_first = halve_first;
    s.halve_rest = halve_rest;
    s.batch_size = batch_size;
    s.weight_decay = weight_decay;
    s.validate();
    return s;
}

NetConfig ExperimentConfig::make_net_config() const {
    NetConfig n;
    n.hidden_width = hidden_width > 0 ? hidden_width : d + 20;
    n.depth = depth;
    n.batch_norm = batch_norm;
    return n;
}

EvalOptions ExperimentConfig::make_eval_options() const {
    EvalOptions e;
    e.m_eval = m_eval;
    e.hjb_eval_points = hjb_eval_points;
    e.hjb_ref_samples = hjb_ref_samples;
    e.seed = eval_seed;
    return e;
}

std::vector<long> ExperimentConfig::rate_m_values() const {
    if (rate_m_log2_min < 1 || rate_m_log2_max < rate_m_log2_min)
        throw ConfigError("rate probe needs 1 <= rate_m_log2_min <= rate_m_log2_max");
    std::vector<long> m_values;
    for (int k = rate_m_log2_min; k <= rate_m_log2_max; ++k) m_values.push_back(1L << k);
    return m_values;
}

RateProbeConfig ExperimentConfig::make_rate_config() const {
    RateProbeConfig r;
    r.m_values = rate_m_values();
    r.replications = rate_replications;
    r.oracle_m = 1L << rate_oracle_m_log2;
    r.seed = master_seed;
    r.scramble = scramble;
    return r;
}

namespace {

const char* const kSections[] = {"problem", "sampling", "training", "network", "evaluation",
                                 "rate_probe", "run"};

bool parse_bool(const std::string& value, int line) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw ConfigError("expected a boolean, got '" + value + "'", line);
}

template <typename T>
T parse_number(const std::string& value, int line) {
    std::istringstream ss(value);
    T out;
    ss >> out;
    if (ss.fail() || !(ss >> std::ws).eof())
        throw ConfigError("expected a number, got '" + value + "'", line);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& name) {
    ExperimentConfig cfg;
    std::map<std::string, bool> seen;
    std::string line;
    int lineno = 0;
    bool saw_a = false, saw_b = false, saw_mu = false, saw_sigma = false;

    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
            const std::string section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const char* s : kSections) known = known || section == s;
            if (!known) throw ConfigError("unknown section '" + section + "'", lineno);
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value' in " + name, lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("expected 'key = value' in " + name, lineno);
        if (seen[key]) throw ConfigError("duplicate key '" + key + "'", lineno);
        seen[key] = true;

        if (key == "problem") cfg.problem = problem_kind_from_string(value);
        else if (key == "d") cfg.d = parse_number<int>(value, lineno);
        else if (key == "T") cfg.T = parse_number<double>(value, lineno);
        else if (key == "N") cfg.N = parse_number<int>(value, lineno);
        else if (key == "a") { cfg.a = parse_number<double>(value, lineno); saw_a = true; }
        else if (key == "b") { cfg.b = parse_number<double>(value, lineno); saw_b = true; }
        else if (key == "mu") { cfg.mu = parse_number<double>(value, lineno); saw_mu = true; }
        else if (key == "sigma") { cfg.sigma = parse_number<double>(value, lineno); saw_sigma = true; }
        else if (key == "sampler") cfg.sampler = sampler_kind_from_string(value);
        else if (key == "scramble") cfg.scramble = scramble_mode_from_string(value);
        else if (key == "batch_size") cfg.batch_size = parse_number<long>(value, lineno);
        else if (key == "iterations_first") cfg.iterations_first = parse_number<long>(value, lineno);
        else if (key == "iterations_rest") cfg.iterations_rest = parse_number<long>(value, lineno);
        else if (key == "lr_first") cfg.lr_first = parse_number<double>(value, lineno);
        else if (key == "lr_rest") cfg.lr_rest = parse_number<double>(value, lineno);
        else if (key == "halve_first") cfg.halve_first = parse_number<long>(value, lineno);
        else if (key == "halve_rest") cfg.halve_rest = parse_number<long>(value, lineno);
        else if (key == "weight_decay") cfg.weight_decay = parse_number<double>(value, lineno);
        else if (key == "hidden_width") cfg.hidden_width = parse_number<int>(value, lineno);
        else if (key == "depth") cfg.depth = parse_number<int>(value, lineno);
        else if (key == "batch_norm") cfg.batch_norm = parse_bool(value, lineno);
        else if (key == "m_eval") cfg.m_eval = parse_number<long>(value, lineno);
        else if (key == "hjb_eval_points") cfg.hjb_eval_points = parse_number<long>(value, lineno);
        else if (key == "hjb_ref_samples") cfg.hjb_ref_samples = parse_number<long>(value, lineno);
        else if (key == "eval_seed") cfg.eval_seed = parse_number<std::uint64_t>(value, lineno);
        else if (key == "rate_d") cfg.rate_d = parse_number<int>(value, lineno);
        else if (key == "rate_m_log2_min") cfg.rate_m_log2_min = parse_number<int>(value, lineno);
        else if (key == "rate_m_log2_max") cfg.rate_m_log2_max = parse_number<int>(value, lineno);
        else if (key == "rate_replications") cfg.rate_replications = parse_number<int>(value, lineno);
        else if (key == "rate_oracle_m_log2")
            cfg.rate_oracle_m_log2 = parse_number<int>(value, lineno);
        else if (key == "n_runs") cfg.n_runs = parse_number<int>(value, lineno);
        else if (key == "master_seed") cfg.master_seed = parse_number<std::uint64_t>(value, lineno);
        else if (key == "workers") cfg.workers = parse_number<int>(value, lineno);
        else if (key == "out_dir") cfg.out_dir = value;
        else throw ConfigError("unknown key '" + key + "'", lineno);
    }

    if (saw_a != saw_b) throw ConfigError("domain bounds a and b must be set together");
    if (saw_mu != saw_sigma) throw ConfigError("mu and sigma must be set together");
    cfg.override_domain = saw_a;
    cfg.override_coefficients = saw_mu;

    if (cfg.d < 1) throw ConfigError("d must be >= 1");
    if (cfg.N < 1) throw ConfigError("N must be >= 1");
    if (cfg.T <= 0.0) throw ConfigError("T must be > 0");
    if (cfg.n_runs < 1) throw ConfigError("n_runs must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    // Effective values: d-dependent defaults resolved.
    const ProblemSpec p = cfg.make_problem();
    const NetConfig net = cfg.make_net_config();
    std::ostringstream out;
    out.precision(17);
    out << "[problem]\n";
    out << "problem = " << to_string(cfg.problem) << "\n";
    out << "d = " << cfg.d << "\n";
    out << "T = " << cfg.T << "\n";
    out << "N = " << cfg.N << "\n";
    out << "a = " << p.a << "\n";
    out << "b = " << p.b << "\n";
    out << "mu = " << p.mu << "\n";
    out << "sigma = " << p.sigma << "\n";
    out << "[sampling]\n";
    out << "sampler = " << to_string(cfg.sampler) << "\n";
    out << "scramble = " << to_string(cfg.scramble) << "\n";
    out << "[training]\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "iterations_first = " << cfg.iterations_first << "\n";
    out << "iterations_rest = " << cfg.iterations_rest << "\n";
    out << "lr_first = " << cfg.lr_first << "\n";
    out << "lr_rest = " << cfg.lr_rest << "\n";
    out << "halve_first = " << cfg.halve_first << "\n";
    out << "halve_rest = " << cfg.halve_rest << "\n";
    out << "weight_decay = " << cfg.weight_decay << "\n";
    out << "[network]\n";
    out << "hidden_width = " << net.hidden_width << "\n";
    out << "depth = " << net.depth << "\n";
    out << "batch_norm = " << (net.batch_norm ? "true" : "false") << "\n";
    out << "[evaluation]\n";
    out << "m_eval = " << cfg.m_eval << "\n";
    out << "hjb_eval_points = " << cfg.hjb_eval_points << "\n";
    out << "hjb_ref_samples = " << cfg.hjb_ref_samples << "\n";
    out << "eval_seed = " << cfg.eval_seed << "\n";
    out << "[rate_probe]\n";
    out << "rate_d = " << cfg.rate_d << "\n";
    out << "rate_m_log2_min = " << cfg.rate_m_log2_min << "\n";
    out << "rate_m_log2_max = " << cfg.rate_m_log2_max << "\n";
    out << "rate_replications = " << cfg.rate_replications << "\n";
    out << "rate_oracle_m_log2 = " << cfg.rate_oracle_m_log2 << "\n";
    out << "[run]\n";
    out << "n_runs = " << cfg.n_runs << "\n";
    out << "master_seed = " << cfg.master_seed << "\n";
    out << "workers = " << cfg.workers << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

std::uint64_t config_fingerprint(const ExperimentConfig& config) {
    const std::string text = serialize_config(config);
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::vector<std::string> config_header_comments(const ExperimentConfig& config) {
    std::vector<std::string> comments;
    std::ostringstream fp;
    fp << "config_fingerprint = 0x" << std::hex << config_fingerprint(config);
    comments.push_back(fp.str());
    std::istringstream lines(serialize_config(config));
    std::string line;
    while (std::getline(lines, line))
        if (!line.empty()) comments.push_back(line);
    return comments;
}

} // namespace dbdp

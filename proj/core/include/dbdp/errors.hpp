#pragma once

#include <stdexcept>
#include <string>

namespace dbdp {

/// Bad user-facing configuration (config file, CLI arguments, unsupported
/// sampler dimension). Maps to exit code 2 in the CLI.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg, int line = 0)
        : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}

    int line() const { return line_; }

  private:
    int line_;
};

/// Non-finite loss or gradient during optimization. Carries the step and
/// iteration where training blew up.
class TrainingAbort : public std::runtime_error {
  public:
    TrainingAbort(const std::string& msg, int step = -1, long iteration = -1)
        : std::runtime_error(format(msg, step, iteration)), step_(step), iteration_(iteration) {}

    int step() const { return step_; }
    long iteration() const { return iteration_; }

  private:
    static std::string format(const std::string& msg, int step, long iteration) {
        if (step < 0) return msg;
        return msg + " [step " + std::to_string(step) + ", iteration " + std::to_string(iteration) +
               "]";
    }

    int step_;
    long iteration_;
};

} // namespace dbdp

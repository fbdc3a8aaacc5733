#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rsv::cli {

enum class OutputFormat { table, json, csv };

struct RunConfig {
    std::string command;
    std::string model_path;
    std::string samples_path;
    std::string output_path;
    double delta = 0.2;
    double beta = 0.05;
    double p = 0.9;
    std::size_t n_runs = 100000;
    std::size_t trials = 100;
    std::uint64_t seed = 7;
    OutputFormat format = OutputFormat::table;
    bool exact_model = false;
    unsigned threads = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitVerdictFailure = 2;

/// Throws rsv::Error when delta, beta or p lie outside their domains.
void check(const RunConfig& config);

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sample(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_reproduce(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (including argv[0]) and dispatches. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rsv::cli

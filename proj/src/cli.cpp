#include "rsv/cli.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsv/benchmark.h"
#include "rsv/data.h"
#include "rsv/error.h"
#include "rsv/model_io.h"
#include "rsv/oracle.h"
#include "rsv/robust_dp.h"

namespace rsv::cli {

using nlohmann::json;

namespace {

constexpr double kExactTableTolerance = 5e-4;
constexpr double kSampledTableTolerance = 0.01;

/// Writes to --out when given, otherwise to the supplied stream.
class Sink {
   public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw Error("cannot open output file " + path);
        stream_ = file_.get();
    }
    std::ostream& operator*() { return *stream_; }

   private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::string fixed(double value, int digits = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << value;
    return os.str();
}

json radius_json(const AmbiguityRadius& radius) {
    return json{{"delta", radius.delta},     {"rho", radius.rho},   {"epsilon", radius.epsilon},
                {"n_samples", radius.n_samples}, {"beta", radius.beta}, {"total", radius.total()}};
}

json table_json(const SafetyTable& table) {
    const auto& partition = table.partition;
    json states = json::array();
    for (auto x : partition.living()) states.push_back(partition.name(x));
    json values = json::array();
    for (const auto& row : table.values) {
        json line = json::array();
        for (auto x : partition.living()) line.push_back(row[x]);
        values.push_back(std::move(line));
    }
    return json{{"scheme", to_string(table.scheme)}, {"radius", radius_json(table.radius)}, {"states", states}, {"values", values}};
}

void print_table_text(std::ostream& out, const SafetyTable& table) {
    const auto& partition = table.partition;
    out << "t";
    for (auto x : partition.living()) out << '\t' << partition.name(x);
    out << '\n';
    for (std::size_t t = 0; t < table.horizon(); ++t) {
        out << t;
        for (auto x : partition.living()) out << '\t' << fixed(table.value(t, x));
        out << '\n';
    }
}

void print_table_csv(std::ostream& out, const SafetyTable& table) {
    out << "t,state,value\n";
    out << std::setprecision(17);
    for (std::size_t t = 0; t <= table.horizon(); ++t)
        for (auto x : table.partition.living()) out << t << ',' << table.partition.name(x) << ',' << table.value(t, x) << '\n';
}

std::string radius_text(const AmbiguityRadius& radius) {
    std::ostringstream os;
    os << "radius " << fixed(radius.total(), 5) << " (delta " << fixed(radius.delta, 5) << ", rho " << fixed(radius.rho, 5);
    if (radius.rho > 0.0) os << ", N " << radius.n_samples << ", beta " << radius.beta;
    os << ")";
    return os.str();
}

InducedChain model_chain(const RunConfig& config) {
    if (config.model_path.empty()) throw Error("--model is required");
    auto file = load_model(config.model_path);
    return induce_chain(file.model, file.policy);
}

EmpiricalChain load_empirical(const RunConfig& config, const InducedChain& chain) {
    std::ifstream in(config.samples_path, std::ios::binary);
    if (!in) throw Error("cannot open sample log " + config.samples_path);
    return empirical_chain(read_sample_log(in, chain.partition), chain.partition, chain.horizon);
}

struct TableDiff {
    double max_abs = 0.0;
    std::size_t cells_outside = 0;
};

/// Compares states 1..4 (dense indices 0..3) of `table` with a printed reference table.
TableDiff diff(const SafetyTable& table, const benchmark::ReferenceTable& reference, double tolerance) {
    TableDiff result;
    for (std::size_t t = 0; t < reference.size(); ++t) {
        for (std::size_t x = 0; x < reference[t].size(); ++x) {
            const double gap = std::abs(table.value(t, x) - reference[t][x]);
            result.max_abs = std::max(result.max_abs, gap);
            if (gap > tolerance) ++result.cells_outside;
        }
    }
    return result;
}

void print_comparison(std::ostream& out, const std::string& title, const SafetyTable& table,
                      const benchmark::ReferenceTable& reference, const TableDiff& result, double tolerance) {
    out << title << " [" << radius_text(table.radius) << "]\n";
    out << "t\tS(t,1)\tS(t,2)\tS(t,3)\tS(t,4)\t| published\n";
    for (std::size_t t = 0; t < reference.size(); ++t) {
        out << t;
        for (std::size_t x = 0; x < 4; ++x) out << '\t' << fixed(table.value(t, x));
        out << "\t|";
        for (std::size_t x = 0; x < 4; ++x) out << ' ' << fixed(reference[t][x]);
        out << '\n';
    }
    out << "max |diff| = " << fixed(result.max_abs, 6) << ", tolerance " << tolerance << ", cells outside: " << result.cells_outside
        << "\n\n";
}

}  // namespace

void check(const RunConfig& config) {
    if (!(config.delta >= 0.0 && config.delta <= 1.0)) throw Error("--delta must lie in [0, 1]");
    if (!(config.beta > 0.0 && config.beta < 1.0)) throw Error("--beta must lie in (0, 1)");
    if (!(config.p > 0.0 && config.p < 1.0)) throw Error("--p must lie in (0, 1)");
    if (config.n_runs == 0) throw Error("--n-runs must be positive");
    if (config.trials == 0) throw Error("--trials must be positive");
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
    check(config);
    const auto chain = model_chain(config);

    SafetyTable table;
    std::optional<EmpiricalChain> empirical;
    if (config.exact_model) {
        AmbiguityRadius radius;
        radius.delta = config.delta;
        radius.state_count = chain.state_count();
        table = solve_robust_safety(chain, radius, config.delta == 0.0 ? Scheme::nominal : Scheme::robust, config.threads);
    } else {
        if (config.samples_path.empty()) throw Error("verify needs --samples or --exact-model");
        empirical = load_empirical(config, chain);
        table = solve_empirical_robust_safety(*empirical, config.delta, config.beta, config.threads);
    }
    const auto verdict = is_robust_p_safe(table, config.p);
    const double residual = robust_residual_living_mass(empirical ? empirical->chain : chain, table.radius.total());
    const auto& witness = table.partition.name(verdict.x);

    Sink sink(config.output_path, out);
    switch (config.format) {
        case OutputFormat::json: {
            auto document = table_json(table);
            document["max"] = {{"value", verdict.max_value}, {"t", verdict.t}, {"x", witness}};
            document["p"] = config.p;
            document["verdict"] = verdict.safe ? "safe" : "unsafe";
            document["residual_living_mass"] = residual;
            if (empirical) document["empirical_chain"] = empirical_chain_to_json(*empirical, table.radius);
            *sink << document.dump(2) << '\n';
            break;
        }
        case OutputFormat::csv:
            print_table_csv(*sink, table);
            break;
        case OutputFormat::table:
            *sink << "scheme: " << to_string(table.scheme) << ", " << radius_text(table.radius) << '\n';
            print_table_text(*sink, table);
            break;
    }
    if (config.format != OutputFormat::json) {
        err << "max S = " << fixed(verdict.max_value) << " at (t=" << verdict.t << ", x=" << witness << ")\n";
        err << "verdict: " << (verdict.safe ? "robust p-safe" : "NOT robust p-safe") << " for p = " << config.p << '\n';
        err << "worst-case mass still living at the horizon: " << fixed(residual) << '\n';
    }
    return verdict.safe ? kExitOk : kExitVerdictFailure;
}

int cmd_sample(const RunConfig& config, std::ostream& out, std::ostream& err) {
    check(config);
    const auto chain = model_chain(config);
    PerturbationSpec spec;
    spec.delta = config.delta;
    spec.seed = config.seed;
    const auto log = simulate_samples(chain, spec, config.n_runs, config.threads);
    Sink sink(config.output_path, out);
    write_sample_log(*sink, log, chain.partition);
    if (!*sink) throw Error("failed writing the sample log");
    err << "wrote " << log.records.size() << " records (N=" << log.n_runs << ", seed=" << log.seed << ")\n";
    return kExitOk;
}

int cmd_reproduce(const RunConfig& config, std::ostream& out, std::ostream& /*err*/) {
    check(config);
    const auto file = benchmark::twenty_state_model();
    const auto chain = induce_chain(file.model, file.policy);

    const auto start = std::chrono::steady_clock::now();
    const auto exact = solve_robust_safety(chain, config.delta, config.threads);

    PerturbationSpec spec;
    spec.delta = config.delta;
    spec.seed = config.seed;
    const auto log = simulate_samples(chain, spec, config.n_runs, config.threads);
    const auto empirical = empirical_chain(log, chain.partition, chain.horizon);
    const auto withRho = solve_empirical_robust_safety(empirical, config.delta, config.beta, config.threads);
    AmbiguityRadius deltaOnly;
    deltaOnly.delta = config.delta;
    deltaOnly.n_samples = empirical.n_samples;
    deltaOnly.state_count = chain.state_count();
    const auto withoutRho = solve_robust_safety(empirical.chain, deltaOnly, Scheme::robust, config.threads);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const auto exactDiff = diff(exact, benchmark::kRobustNominalTable, kExactTableTolerance);
    const auto rhoDiff = diff(withRho, benchmark::kEmpiricalRobustTable, kSampledTableTolerance);
    const auto deltaDiff = diff(withoutRho, benchmark::kEmpiricalDeltaOnlyTable, kSampledTableTolerance);
    const bool ok = exactDiff.cells_outside == 0 && rhoDiff.cells_outside == 0 && deltaDiff.cells_outside == 0;

    Sink sink(config.output_path, out);
    if (config.format == OutputFormat::json) {
        auto entry = [](const SafetyTable& table, const TableDiff& d, double tolerance) {
            auto document = table_json(table);
            document["max_abs_diff"] = d.max_abs;
            document["cells_outside"] = d.cells_outside;
            document["tolerance"] = tolerance;
            return document;
        };
        json document{{"rho", withRho.radius.rho},
                      {"epsilon", withRho.radius.epsilon},
                      {"seed", config.seed},
                      {"n_samples", empirical.n_samples},
                      {"empirical_robust", entry(withRho, rhoDiff, kSampledTableTolerance)},
                      {"empirical_delta_only", entry(withoutRho, deltaDiff, kSampledTableTolerance)},
                      {"nominal_robust", entry(exact, exactDiff, kExactTableTolerance)},
                      {"ok", ok}};
        *sink << document.dump(2) << '\n';
    } else {
        *sink << "rho = " << fixed(withRho.radius.rho, 5) << " (epsilon = " << fixed(withRho.radius.epsilon, 7) << ", N = "
              << empirical.n_samples << ", seed = " << config.seed << ")\n\n";
        print_comparison(*sink, "Empirical robust safety function, radius delta + rho", withRho,
                         benchmark::kEmpiricalRobustTable, rhoDiff, kSampledTableTolerance);
        print_comparison(*sink, "Empirical rows with radius delta only", withoutRho, benchmark::kEmpiricalDeltaOnlyTable,
                         deltaDiff, kSampledTableTolerance);
        print_comparison(*sink, "Robust safety function on the exact nominal chain", exact, benchmark::kRobustNominalTable,
                         exactDiff, kExactTableTolerance);
        *sink << (ok ? "all tables within tolerance" : "MISMATCH against published tables") << " (" << fixed(seconds, 2)
              << " s)\n";
    }
    return ok ? kExitOk : kExitVerdictFailure;
}

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& /*err*/) {
    check(config);
    InducedChain chain;
    if (config.model_path.empty()) {
        const auto file = benchmark::twenty_state_model();
        chain = induce_chain(file.model, file.policy);
    } else {
        chain = model_chain(config);
    }
    BoundTrialConfig trials;
    trials.delta = config.delta;
    trials.beta = config.beta;
    trials.n_samples = config.n_runs;
    trials.trials = config.trials;
    trials.seed = config.seed;
    trials.threads = config.threads;
    const auto report = validate_bound(chain, trials);
    Sink sink(config.output_path, out);
    *sink << to_json(report).dump(2) << '\n';
    return report.empirical_confidence < 1.0 - config.beta ? kExitVerdictFailure : kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robust reach-avoid safety verification for uncertain finite MDPs"};
    app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
    app.require_subcommand(1);

    RunConfig config;
    const std::map<std::string, OutputFormat> formats{
        {"table", OutputFormat::table}, {"json", OutputFormat::json}, {"csv", OutputFormat::csv}};

    auto add_common = [&](CLI::App* command) {
        command->add_option("--delta", config.delta, "Model-variability radius (TV)")->capture_default_str();
        command->add_option("--beta", config.beta, "Confidence parameter")->capture_default_str();
        command->add_option("--seed", config.seed, "Random seed")->capture_default_str();
        command->add_option("--n-runs", config.n_runs, "Number of sampled runs N")->capture_default_str();
        command->add_option("--out", config.output_path, "Output file (default stdout)");
        command->add_option("--format", config.format, "table, json or csv")
            ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
        command->add_option("--threads", config.threads, "Worker threads")->envname("RSV_THREADS")->capture_default_str();
    };

    auto* verify = app.add_subcommand("verify", "Robust safety table and p-safety verdict");
    add_common(verify);
    verify->add_option("--model", config.model_path, "Model JSON file")->required();
    verify->add_option("--samples", config.samples_path, "Sample log");
    verify->add_option("--p", config.p, "Safety threshold")->capture_default_str();
    verify->add_flag("--exact-model", config.exact_model, "Use the model's nominal chain with radius delta");

    auto* sample = app.add_subcommand("sample", "Generate a sample log from a model");
    add_common(sample);
    sample->add_option("--model", config.model_path, "Model JSON file")->required();

    auto* reproduce = app.add_subcommand("reproduce", "Recompute the twenty-state benchmark tables");
    add_common(reproduce);

    auto* validate = app.add_subcommand("validate", "Statistical check of the high-confidence upper bound");
    add_common(validate);
    validate->add_option("--model", config.model_path, "Model JSON file (default: twenty-state benchmark)");
    validate->add_option("--trials", config.trials, "Number of trials M")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& arg : args) argv.push_back(arg.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    for (const auto* command : app.get_subcommands()) config.command = command->get_name();
    try {
        if (*verify) return cmd_verify(config, out, err);
        if (*sample) return cmd_sample(config, out, err);
        if (*reproduce) return cmd_reproduce(config, out, err);
        if (*validate) return cmd_validate(config, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace rsv::cli

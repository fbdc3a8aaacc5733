#include "rsv/data.h"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "rsv/error.h"
#include "rsv/model_io.h"
#include "rsv/parallel.h"

namespace rsv {

namespace {

constexpr std::uint64_t kKernelStream = 0;
constexpr std::uint64_t kSampleStream = 1;
constexpr const char* kLogMagic = "#rsv-samples v1";

/// Calls visit(t, x, row) for every living (t, x) of the run's kernel, in (t, x) order.
template <typename Visit>
void for_each_run_row(const InducedChain& nominal, const PerturbationSpec& spec, std::size_t run, Visit&& visit) {
    const auto& living = nominal.partition.living();
    if (spec.mode == PerturbationMode::adversarial_preset) {
        const auto& preset = spec.presets.at((run - 1) % spec.presets.size());
        for (std::size_t t = 0; t < nominal.horizon; ++t)
            for (auto x : living) visit(t, x, std::span<const double>(preset.row(t, x)));
        return;
    }
    Rng rng(mix_seed(spec.seed, run, kKernelStream));
    const double halfWidth = 0.5 * spec.delta;
    for (std::size_t t = 0; t < nominal.horizon; ++t) {
        for (auto x : living) {
            auto row = halfWidth > 0.0 ? perturb_row(nominal.row(t, x), halfWidth, rng) : nominal.row(t, x);
            if (!is_stochastic(row))
                throw Error("internal error: perturbed row at (t=" + std::to_string(t) + ", x=" + nominal.partition.name(x) +
                            ") is not stochastic");
            visit(t, x, std::span<const double>(row));
        }
    }
}

void check_spec(const InducedChain& nominal, const PerturbationSpec& spec) {
    if (!(spec.delta >= 0.0 && spec.delta <= 1.0)) throw Error("perturbation delta must lie in [0, 1]");
    if (auto problems = validate_chain(nominal); !problems.empty())
        throw Error("invalid nominal chain: " + to_string(problems.front()));
    if (spec.mode != PerturbationMode::adversarial_preset) return;
    if (spec.presets.empty()) throw Error("adversarial preset mode needs at least one kernel");
    for (std::size_t i = 0; i < spec.presets.size(); ++i) {
        const auto& preset = spec.presets[i];
        if (auto problems = validate_chain(preset); !problems.empty())
            throw Error("preset kernel " + std::to_string(i) + ": " + to_string(problems.front()));
        if (chain_distance(preset, nominal) > 0.5 * spec.delta + kStochasticTolerance)
            throw Error("preset kernel " + std::to_string(i) + " is farther than delta/2 from the nominal chain");
    }
}

std::string generator_name(const PerturbationSpec& spec) {
    std::ostringstream os;
    os << (spec.mode == PerturbationMode::per_run_ball ? "per-run-ball" : "adversarial-preset") << " delta=" << spec.delta
       << " rng=mt19937_64";
    return os.str();
}

template <typename Int>
Int parse_int(std::string_view text, std::size_t line, const char* field) {
    Int value{};
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size())
        throw Error("sample log line " + std::to_string(line) + ": bad " + field + " '" + std::string(text) + "'");
    return value;
}

}  // namespace

Row perturb_row(std::span<const double> nominal, double half_width, Rng& rng) {
    const double weight = half_width * rng.uniform();
    const auto receiver = rng.categorical(nominal);
    Row row(nominal.size());
    for (std::size_t y = 0; y < nominal.size(); ++y) row[y] = (1.0 - weight) * nominal[y];
    row[receiver] += weight;
    return row;
}

InducedChain run_kernel(const InducedChain& nominal, const PerturbationSpec& spec, std::size_t run) {
    if (run == 0) throw Error("run indices start at 1");
    check_spec(nominal, spec);
    InducedChain kernel = nominal;
    for_each_run_row(nominal, spec, run, [&](std::size_t t, std::size_t x, std::span<const double> row) {
        kernel.rows[t][x].assign(row.begin(), row.end());
    });
    return kernel;
}

SampleLog simulate_samples(const InducedChain& nominal, const PerturbationSpec& spec, std::size_t n_runs, unsigned threads) {
    if (n_runs == 0) throw Error("number of runs must be positive");
    check_spec(nominal, spec);

    const auto& living = nominal.partition.living();
    const std::size_t perRun = nominal.horizon * living.size();
    SampleLog log;
    log.n_runs = n_runs;
    log.seed = spec.seed;
    log.generator = generator_name(spec);
    log.records.resize(n_runs * perRun);

    parallel_for(n_runs, threads, [&](std::size_t i) {
        const std::size_t run = i + 1;
        Rng sampler(mix_seed(spec.seed, run, kSampleStream));
        auto out = log.records.begin() + static_cast<std::ptrdiff_t>(i * perRun);
        for_each_run_row(nominal, spec, run, [&](std::size_t t, std::size_t x, std::span<const double> row) {
            *out++ = SampleRecord{static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(run),
                                  static_cast<std::uint32_t>(sampler.categorical(row))};
        });
    });
    return log;
}

EmpiricalChain empirical_chain(const SampleLog& log, const StatePartition& partition, std::size_t horizon) {
    const auto n = partition.size();
    if (horizon == 0) throw Error("horizon must be positive");

    EmpiricalChain empirical;
    empirical.counts.assign(horizon, std::vector<std::vector<std::size_t>>(n));
    for (auto x : partition.living())
        for (auto& step : empirical.counts) step[x].assign(n, 0);

    std::vector<std::vector<std::size_t>> totals(horizon, std::vector<std::size_t>(n, 0));
    for (const auto& record : log.records) {
        if (record.t >= horizon || record.x >= n || record.successor >= n)
            throw Error("sample record out of range (t=" + std::to_string(record.t) + ")");
        if (!partition.is_living(record.x))
            throw Error("sample record from terminal state '" + partition.name(record.x) + "'");
        if (record.run == 0) throw Error("run indices start at 1");
        ++empirical.counts[record.t][record.x][record.successor];
        ++totals[record.t][record.x];
    }

    std::string gaps;
    std::size_t samples = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
        for (auto x : partition.living()) {
            const auto count = totals[t][x];
            if (count == 0) {
                gaps += " (t=" + std::to_string(t) + ", x=" + partition.name(x) + ")";
                continue;
            }
            if (samples == 0) samples = count;
            if (count != samples)
                throw Error("unequal sample counts: (t=" + std::to_string(t) + ", x=" + partition.name(x) + ") has " +
                            std::to_string(count) + ", expected " + std::to_string(samples));
        }
    }
    if (!gaps.empty()) throw Error("sample log does not cover:" + gaps);
    if (log.n_runs != 0 && log.n_runs != samples)
        throw Error("sample log declares N=" + std::to_string(log.n_runs) + " but each (t, x) has " + std::to_string(samples) +
                    " records");

    // With equal counts N, runs are contiguous iff every run index is in [1, N] and appears once.
    std::vector<std::vector<std::vector<bool>>> seen(horizon, std::vector<std::vector<bool>>(n));
    for (const auto& record : log.records) {
        auto& runs = seen[record.t][record.x];
        if (runs.empty()) runs.assign(samples + 1, false);
        if (record.run > samples)
            throw Error("run index " + std::to_string(record.run) + " exceeds N=" + std::to_string(samples) + " at (t=" +
                        std::to_string(record.t) + ", x=" + partition.name(record.x) + ")");
        if (runs[record.run])
            throw Error("duplicate run " + std::to_string(record.run) + " at (t=" + std::to_string(record.t) +
                        ", x=" + partition.name(record.x) + ")");
        runs[record.run] = true;
    }

    empirical.n_samples = samples;
    empirical.chain.partition = partition;
    empirical.chain.horizon = horizon;
    empirical.chain.rows.assign(horizon, std::vector<Row>(n));
    const auto total = static_cast<double>(samples);
    for (std::size_t t = 0; t < horizon; ++t) {
        for (std::size_t x = 0; x < n; ++x) {
            if (partition.is_terminal(x)) {
                empirical.chain.rows[t][x] = absorbing_row(n, x);
                continue;
            }
            Row row(n);
            for (std::size_t y = 0; y < n; ++y) row[y] = static_cast<double>(empirical.counts[t][x][y]) / total;
            empirical.chain.rows[t][x] = std::move(row);
        }
    }
    return empirical;
}

SafetyTable solve_empirical_robust_safety(const EmpiricalChain& empirical, double delta, double beta, unsigned threads) {
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error("delta must lie in [0, 1]");
    const auto radius = hoeffding_radius(empirical.chain.state_count(), empirical.n_samples, beta, delta);
    return solve_robust_safety(empirical.chain, radius, Scheme::empirical_robust, threads);
}

void write_sample_log(std::ostream& out, const SampleLog& log, const StatePartition& partition) {
    out << kLogMagic << " N=" << log.n_runs << " seed=" << log.seed << '\n';
    std::string line;
    for (const auto& record : log.records) {
        line.clear();
        line += std::to_string(record.t);
        line += '\t';
        line += partition.name(record.x);
        line += '\t';
        line += std::to_string(record.run);
        line += '\t';
        line += partition.name(record.successor);
        line += '\n';
        out << line;
    }
}

SampleLog read_sample_log(std::istream& in, const StatePartition& partition) {
    std::unordered_map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < partition.size(); ++i) index.emplace(partition.name(i), static_cast<std::uint32_t>(i));
    auto state = [&](std::string_view name, std::size_t line) {
        auto it = index.find(std::string(name));
        if (it == index.end())
            throw Error("sample log line " + std::to_string(line) + ": unknown state '" + std::string(name) + "'");
        return it->second;
    };

    SampleLog log;
    std::string line;
    if (!std::getline(in, line) || !line.starts_with(kLogMagic)) throw Error("sample log lacks the '#rsv-samples v1' header");
    {
        std::istringstream header(line.substr(std::string_view(kLogMagic).size()));
        std::string field;
        bool haveN = false;
        bool haveSeed = false;
        while (header >> field) {
            if (field.starts_with("N=")) {
                log.n_runs = parse_int<std::size_t>(std::string_view(field).substr(2), 1, "N");
                haveN = true;
            } else if (field.starts_with("seed=")) {
                log.seed = parse_int<std::uint64_t>(std::string_view(field).substr(5), 1, "seed");
                haveSeed = true;
            } else {
                throw Error("sample log header: unknown field '" + field + "'");
            }
        }
        if (!haveN || !haveSeed) throw Error("sample log header must carry N=<int> and seed=<int>");
    }

    std::size_t lineNumber = 1;
    while (std::getline(in, line)) {
        ++lineNumber;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::string_view rest(line);
        std::string_view fields[4];
        for (std::size_t f = 0; f < 4; ++f) {
            const auto tab = rest.find('\t');
            if ((tab == std::string_view::npos) != (f == 3))
                throw Error("sample log line " + std::to_string(lineNumber) + ": expected 4 tab-separated fields");
            fields[f] = rest.substr(0, tab);
            if (tab != std::string_view::npos) rest.remove_prefix(tab + 1);
        }
        log.records.push_back(SampleRecord{parse_int<std::uint32_t>(fields[0], lineNumber, "time"), state(fields[1], lineNumber),
                                           parse_int<std::uint32_t>(fields[2], lineNumber, "run"), state(fields[3], lineNumber)});
    }
    return log;
}

nlohmann::json empirical_chain_to_json(const EmpiricalChain& empirical, const AmbiguityRadius& radius) {
    auto document = chain_to_json(empirical.chain);
    document["n_samples"] = empirical.n_samples;
    document["rho"] = radius.rho;
    return document;
}

}  // namespace rsv

#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "rsv/data.h"
#include "rsv/error.h"
#include "rsv/metric.h"
#include "rsv/model_io.h"
#include "test_util.h"

using namespace rsv;

namespace {

PerturbationSpec ball(double delta, std::uint64_t seed) {
    PerturbationSpec spec;
    spec.delta = delta;
    spec.seed = seed;
    return spec;
}

double max_row_tv(const InducedChain& a, const InducedChain& b) { return chain_distance(a, b); }

SampleLog tiny_log(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& transitions) {
    // (x, y) pairs at t = 0, runs numbered per x in order of appearance
    SampleLog log;
    std::map<std::uint32_t, std::uint32_t> runs;
    for (auto [x, y] : transitions) log.records.push_back({0, x, ++runs[x], y});
    return log;
}

}  // namespace

TEST(PerturbRow, StaysInsideHalfBallAndKeepsMean) {
    const auto nominal = fixtures::benchmark_chain().row(0, 0);
    Rng rng(5);
    Row mean(nominal.size(), 0.0);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
        const auto row = perturb_row(nominal, 0.1, rng);
        ASSERT_TRUE(is_stochastic(row, 1e-12));
        ASSERT_LE(tv_distance(row, nominal), 0.1 + 1e-12);
        for (std::size_t y = 0; y < row.size(); ++y) mean[y] += row[y] / draws;
    }
    EXPECT_LT(tv_distance(mean, nominal), 2e-3);
}

TEST(RunKernel, PerRunKernelsArePairwiseWithinDelta) {
    const auto nominal = fixtures::benchmark_chain();
    const auto spec = ball(0.2, 17);
    std::vector<InducedChain> runs;
    for (std::size_t run = 1; run <= 12; ++run) {
        runs.push_back(run_kernel(nominal, spec, run));
        EXPECT_TRUE(validate_chain(runs.back()).empty());
        EXPECT_LE(chain_distance(runs.back(), nominal), 0.1 + 1e-9);
    }
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (std::size_t j = i + 1; j < runs.size(); ++j) EXPECT_LE(chain_distance(runs[i], runs[j]), 0.2 + 1e-9);
    EXPECT_GT(chain_distance(runs[0], runs[1]), 0.0);
}

TEST(RunKernel, AdversarialPresetsAreCheckedAndCycled) {
    const auto nominal = fixtures::benchmark_chain();
    auto preset = nominal;
    for (std::size_t t = 0; t < 9; ++t) {
        for (auto x : nominal.partition.living()) {
            preset.rows[t][x][12] -= 0.0375;  // move one goal state's mass onto the unsafe state "11"
            preset.rows[t][x][10] += 0.0375;
        }
    }
    PerturbationSpec spec = ball(0.2, 1);
    spec.mode = PerturbationMode::adversarial_preset;
    spec.presets = {nominal, preset};
    EXPECT_EQ(run_kernel(nominal, spec, 1).rows, nominal.rows);
    EXPECT_EQ(run_kernel(nominal, spec, 2).rows, preset.rows);
    EXPECT_EQ(run_kernel(nominal, spec, 4).rows, preset.rows);

    spec.delta = 0.05;  // preset is 0.0375 away, beyond delta/2
    EXPECT_THROW(run_kernel(nominal, spec, 1), Error);
}

TEST(SimulateSamples, RecordCountAndOrdering) {
    const auto chain = fixtures::benchmark_chain();
    const auto log = simulate_samples(chain, ball(0.2, 3), 1);
    ASSERT_EQ(log.records.size(), 10u * 10u);
    EXPECT_EQ(log.records.front(), (SampleRecord{0, 0, 1, log.records.front().successor}));
    EXPECT_EQ(log.records.back().t, 9u);
    EXPECT_EQ(log.records.back().x, 9u);
    for (const auto& record : log.records) {
        if (record.t == 9) EXPECT_FALSE(chain.partition.is_living(record.successor));
    }
}

TEST(SimulateSamples, DeterministicAcrossRunsAndThreads) {
    const auto chain = fixtures::benchmark_chain();
    auto serialize = [&](const SampleLog& log) {
        std::ostringstream os;
        write_sample_log(os, log, chain.partition);
        return os.str();
    };
    const auto a = serialize(simulate_samples(chain, ball(0.2, 99), 50, 1));
    const auto b = serialize(simulate_samples(chain, ball(0.2, 99), 50, 4));
    const auto c = serialize(simulate_samples(chain, ball(0.2, 100), 50, 1));
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(SimulateSamples, RejectsBadArguments) {
    const auto chain = fixtures::benchmark_chain();
    EXPECT_THROW(simulate_samples(chain, ball(1.2, 1), 10), Error);
    EXPECT_THROW(simulate_samples(chain, ball(0.2, 1), 0), Error);
}

TEST(SimulateSamples, ZeroDeltaRecoversNominalRows) {
    const auto chain = fixtures::benchmark_chain();
    const auto log = simulate_samples(chain, ball(0.0, 8), 100000);
    const auto empirical = empirical_chain(log, chain.partition, chain.horizon);
    EXPECT_LE(max_row_tv(empirical.chain, chain), 0.01);
}

TEST(SimulateSamplesProperty, EmpiricalRowsConvergeWithN) {
    const auto chain = fixtures::benchmark_chain();
    double previous = 2.0;
    for (std::size_t n : {100u, 1000u, 100000u}) {
        const auto empirical = empirical_chain(simulate_samples(chain, ball(0.0, 123), n), chain.partition, chain.horizon);
        const double distance = max_row_tv(empirical.chain, chain);
        EXPECT_LT(distance, previous) << "N=" << n;
        previous = distance;
    }
}

TEST(EmpiricalChain, CountingEstimator) {
    const StatePartition p({"h", "a", "b", "c"}, {3}, {2});
    auto log = tiny_log({{0, 1}, {0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 0}, {1, 0}, {1, 0}});
    const auto empirical = empirical_chain(log, p, 1);
    EXPECT_EQ(empirical.n_samples, 4u);
    EXPECT_EQ(empirical.chain.row(0, 0), (Row{0.0, 0.5, 0.25, 0.25}));
    EXPECT_EQ(empirical.chain.row(0, 1), (Row{1.0, 0.0, 0.0, 0.0}));
    EXPECT_EQ(empirical.chain.row(0, 2), absorbing_row(4, 2));
    EXPECT_EQ(empirical.counts[0][0][1], 2u);
}

TEST(EmpiricalChain, RejectsGapsUnequalCountsAndDuplicates) {
    const StatePartition p({"h", "a", "b", "c"}, {3}, {2});
    try {
        empirical_chain(tiny_log({{0, 1}}), p, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("(t=0, x=a)"), std::string::npos) << e.what();
    }
    EXPECT_THROW(empirical_chain(tiny_log({{0, 1}, {0, 2}, {1, 0}}), p, 1), Error);

    auto duplicate = tiny_log({{0, 1}, {0, 2}, {1, 0}, {1, 0}});
    duplicate.records[1].run = 1;
    EXPECT_THROW(empirical_chain(duplicate, p, 1), Error);

    auto declared = tiny_log({{0, 1}, {1, 0}});
    declared.n_runs = 3;
    EXPECT_THROW(empirical_chain(declared, p, 1), Error);

    auto fromTerminal = tiny_log({{0, 1}, {1, 0}, {2, 0}});
    EXPECT_THROW(empirical_chain(fromTerminal, p, 1), Error);
}

TEST(SampleLogFormat, WriteReadRoundTrip) {
    const auto chain = fixtures::benchmark_chain();
    const auto log = simulate_samples(chain, ball(0.2, 4), 3);
    std::stringstream stream;
    write_sample_log(stream, log, chain.partition);
    const auto text = stream.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "#rsv-samples v1 N=3 seed=4");
    EXPECT_EQ(text.substr(text.find('\n') + 1, 6), "0\t1\t1\t");

    const auto restored = read_sample_log(stream, chain.partition);
    EXPECT_EQ(restored.n_runs, 3u);
    EXPECT_EQ(restored.seed, 4u);
    EXPECT_EQ(restored.records, log.records);
}

TEST(SampleLogFormat, RejectsMalformedInput) {
    const auto p = fixtures::benchmark_chain().partition;
    auto parse = [&](const std::string& text) {
        std::istringstream in(text);
        return read_sample_log(in, p);
    };
    EXPECT_THROW(parse("t\tx\trun\ty\n"), Error);
    EXPECT_THROW(parse("#rsv-samples v1 N=2\n"), Error);
    EXPECT_THROW(parse("#rsv-samples v1 N=2 seed=1\n0\t1\t1\n"), Error);
    EXPECT_THROW(parse("#rsv-samples v1 N=2 seed=1\n0\t1\t1\t99\n"), Error);
    EXPECT_THROW(parse("#rsv-samples v1 N=2 seed=1\nzero\t1\t1\t2\n"), Error);
    EXPECT_EQ(parse("#rsv-samples v1 N=1 seed=1\n# comment\n0\t1\t1\t2\r\n").records.size(), 1u);
}

TEST(SolveEmpiricalRobustSafety, ExactRowsLastStep) {
    const auto chain = fixtures::benchmark_chain();
    EmpiricalChain exact{chain, 100000, {}};
    const auto table = solve_empirical_robust_safety(exact, 0.2, 0.05);
    EXPECT_EQ(table.scheme, Scheme::empirical_robust);
    EXPECT_NEAR(table.radius.rho, 0.05781267909234066, 1e-15);
    // last step: 0.5 nominal unsafe mass plus delta + rho moved onto U
    EXPECT_NEAR(table.value(9, 0), 0.75781267909234066, 1e-12);
    EXPECT_THROW(solve_empirical_robust_safety(exact, 1.5, 0.05), Error);
    EXPECT_THROW(solve_empirical_robust_safety(exact, 0.2, 1.0), Error);
}

TEST(SolveEmpiricalRobustSafetyProperty, ApproachesNominalFromAbove) {
    const auto chain = fixtures::benchmark_chain();
    const auto nominal = solve_robust_safety(chain, 0.0);
    SafetyTable previous;
    bool first = true;
    for (std::size_t n : {100u, 1000u, 100000u, 10000000u}) {
        for (double beta : {0.1, 0.5, 0.9, 0.99}) {
            EmpiricalChain exact{chain, n, {}};
            const auto table = solve_empirical_robust_safety(exact, 0.0, beta);
            for (std::size_t t = 0; t < 10; ++t) {
                for (auto x : chain.partition.living()) {
                    EXPECT_GE(table.value(t, x), nominal.value(t, x));
                    if (!first) EXPECT_LE(table.value(t, x), previous.value(t, x) + 1e-15);
                }
            }
            previous = table;
            first = false;
        }
    }
}

TEST(EmpiricalChainJson, CarriesSampleCountAndRho) {
    const auto chain = fixtures::benchmark_chain();
    EmpiricalChain exact{chain, 1000, {}};
    const auto radius = hoeffding_radius(20, 1000, 0.05, 0.2);
    const auto document = empirical_chain_to_json(exact, radius);
    EXPECT_EQ(document.at("n_samples"), 1000);
    EXPECT_DOUBLE_EQ(document.at("rho").get<double>(), radius.rho);
    EXPECT_EQ(chain_from_json(document).rows, chain.rows);
}

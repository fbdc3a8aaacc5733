#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rsv/error.h"
#include "rsv/metric.h"
#include "rsv/model_io.h"
#include "test_util.h"

using namespace rsv;
using nlohmann::json;

namespace {

json small_document() {
    return json::parse(R"({
        "states": ["h1", "h2", "bad", "good"],
        "goal": ["good"],
        "unsafe": ["bad"],
        "actions": ["go", "stay"],
        "horizon": 2,
        "kernel": {"stationary": {
            "h1": {"go": {"good": 0.7, "bad": 0.3}, "stay": {"h1": 0.5, "h2": 0.5}},
            "h2": {"go": {"good": 1.0}, "stay": {"h2": 0.9, "bad": 0.1}}
        }},
        "policy": {"stationary": {"*": {"go": 0.5, "stay": 0.5}}}
    })");
}

void expect_error(const json& document, const std::string& fragment) {
    try {
        parse_model(document);
        FAIL() << "expected an error containing '" << fragment << "'";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
}

}  // namespace

TEST(ModelIo, ShippedModelMatchesBenchmark) {
    const auto file = load_model(std::filesystem::path(RSV_MODELS_DIR) / "twenty_state.json");
    const auto chain = induce_chain(file.model, file.policy);
    const auto reference = fixtures::benchmark_chain();
    EXPECT_EQ(chain.partition, reference.partition);
    EXPECT_LT(chain_distance(chain, reference), 1e-15);
}

TEST(ModelIo, ParsesSmallModel) {
    const auto file = parse_model(small_document());
    EXPECT_EQ(file.model.partition.living(), (std::vector<std::size_t>{0, 1}));
    const auto chain = induce_chain(file.model, file.policy);
    EXPECT_NEAR(chain.row(1, 0)[3], 0.35, 1e-15);
    EXPECT_NEAR(chain.row(1, 1)[1], 0.45, 1e-15);
    EXPECT_EQ(chain.row(0, 2), absorbing_row(4, 2));
}

TEST(ModelIo, PerStepKernelAndPolicyOverrides) {
    auto document = small_document();
    const auto step = document["kernel"]["stationary"];
    document["kernel"] = {{"per_t", {step, step}}};
    document["policy"] = json::parse(R"({"default": {"*": {"go": 0.0, "stay": 1.0}},
                                         "overrides": {"1": {"h2": {"go": 1.0}}}})");
    const auto file = parse_model(document);
    EXPECT_EQ(file.policy.rules[0][1], (Row{0.0, 1.0}));
    EXPECT_EQ(file.policy.rules[1][1], (Row{1.0, 0.0}));
    EXPECT_EQ(file.policy.rules[1][0], (Row{0.0, 1.0}));
}

TEST(ModelIo, RenormalizesDecimalRounding) {
    auto document = small_document();
    document["kernel"]["stationary"]["h1"]["go"] = {{"good", 0.7 + 4e-10}, {"bad", 0.3}};
    const auto file = parse_model(document);
    const auto& row = file.model.row(0, 0, 0);
    EXPECT_DOUBLE_EQ(row[3] + row[2], 1.0);
}

TEST(ModelIo, RejectsLargeDeviation) {
    auto document = small_document();
    document["kernel"]["stationary"]["h1"]["go"] = {{"good", 0.6}, {"bad", 0.3}};
    expect_error(document, "(t=0, x=h1, a=go)");
}

TEST(ModelIo, RejectsUnknownKeysAndNames) {
    auto document = small_document();
    document["discount"] = 0.9;
    expect_error(document, "unknown key 'discount'");

    document = small_document();
    document["kernel"]["stationary"]["h1"]["go"] = {{"elsewhere", 1.0}};
    expect_error(document, "unknown state 'elsewhere'");

    document = small_document();
    document["policy"] = {{"stationary", {{"*", {{"jump", 1.0}}}}}};
    expect_error(document, "unknown action 'jump'");

    document = small_document();
    document.erase("horizon");
    expect_error(document, "missing key 'horizon'");
}

TEST(ModelIo, RejectsMissingPolicyRule) {
    auto document = small_document();
    document["policy"] = {{"stationary", {{"h1", {{"go", 1.0}}}}}};
    expect_error(document, "(t=0, x=h2): missing policy rule");
}

TEST(ModelIo, MalformedJsonFile) {
    const auto path = std::filesystem::temp_directory_path() / "rsv_malformed_model.json";
    std::ofstream(path) << "{\"states\": [";
    EXPECT_THROW(load_model(path), Error);
    std::filesystem::remove(path);
    EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

TEST(ModelIo, ChainJsonRoundTrip) {
    const auto chain = fixtures::benchmark_chain();
    const auto restored = chain_from_json(json::parse(chain_to_json(chain).dump()));
    EXPECT_EQ(restored.partition, chain.partition);
    EXPECT_EQ(restored.rows, chain.rows);
}

#include "rsv/benchmark.h"

#include <string>

namespace rsv::benchmark {

ModelFile twenty_state_model() {
    constexpr std::size_t kStates = 20;
    constexpr std::size_t kHorizon = 10;

    std::vector<std::string> names;
    for (std::size_t i = 1; i <= kStates; ++i) names.push_back(std::to_string(i));
    std::vector<std::size_t> unsafe = {10, 11};
    std::vector<std::size_t> goal;
    for (std::size_t i = 12; i < kStates; ++i) goal.push_back(i);

    ModelFile file;
    auto& model = file.model;
    model.partition = StatePartition(names, goal, unsafe);
    model.actions = {"a_H", "a_U", "a_E"};
    model.horizon = kHorizon;

    auto uniform_on = [&](const std::vector<std::size_t>& subset) {
        Row row(kStates, 0.0);
        for (auto y : subset) row[y] = 1.0 / static_cast<double>(subset.size());
        return row;
    };
    const std::vector<Row> actionRows = {uniform_on(model.partition.living()), uniform_on(unsafe), uniform_on(goal)};

    model.kernel.assign(kHorizon, std::vector<std::vector<Row>>(kStates));
    file.policy.rules.assign(kHorizon, std::vector<Row>(kStates));
    for (std::size_t t = 0; t < kHorizon; ++t) {
        for (auto x : model.partition.living()) {
            model.kernel[t][x] = actionRows;
            file.policy.rules[t][x] = t + 1 < kHorizon ? Row{0.4, 0.3, 0.3} : Row{0.0, 0.5, 0.5};
        }
    }
    return file;
}

const ReferenceTable kRobustNominalTable = {{
    {0.8332, 0.8332, 0.8332, 0.8332},
    {0.8332, 0.8332, 0.8332, 0.8332},
    {0.8331, 0.8331, 0.8331, 0.8331},
    {0.8327, 0.8327, 0.8327, 0.8327},
    {0.8319, 0.8319, 0.8319, 0.8319},
    {0.8299, 0.8299, 0.8299, 0.8299},
    {0.8248, 0.8248, 0.8248, 0.8248},
    {0.8120, 0.8120, 0.8120, 0.8120},
    {0.7800, 0.7800, 0.7800, 0.7800},
    {0.7000, 0.7000, 0.7000, 0.7000},
}};

const ReferenceTable kEmpiricalRobustTable = {{
    {0.9305, 0.9274, 0.9309, 0.9312},
    {0.9291, 0.9286, 0.9297, 0.9278},
    {0.9291, 0.9299, 0.9296, 0.9293},
    {0.9306, 0.9288, 0.9313, 0.9292},
    {0.9296, 0.9291, 0.9259, 0.9284},
    {0.9269, 0.9259, 0.9231, 0.9247},
    {0.9187, 0.9170, 0.9200, 0.9191},
    {0.9007, 0.9012, 0.9016, 0.9018},
    {0.8608, 0.8600, 0.8638, 0.8593},
    {0.7575, 0.7607, 0.7587, 0.7553},
}};

const ReferenceTable kEmpiricalDeltaOnlyTable = {{
    {0.8342, 0.8313, 0.8343, 0.8348},
    {0.8328, 0.8321, 0.8332, 0.8317},
    {0.8327, 0.8334, 0.8334, 0.8331},
    {0.8343, 0.8326, 0.8350, 0.8330},
    {0.8336, 0.8333, 0.8302, 0.8322},
    {0.8313, 0.8305, 0.8278, 0.8293},
    {0.8250, 0.8231, 0.8261, 0.8253},
    {0.8107, 0.8111, 0.8115, 0.8115},
    {0.7798, 0.7790, 0.7828, 0.7784},
    {0.6997, 0.7029, 0.7009, 0.6975},
}};

}  // namespace rsv::benchmark

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "thematic/orchestrator/mapping.hpp"

using namespace thematic;
using namespace thematic::orchestrator;

namespace {

ThemeAxis axis() {
    ThemeAxis a;
    a.id = "ax";
    a.theme = {"th", "serene", ThemeSource::extracted};
    a.left_pole_label = "chaotic";
    a.right_pole_label = "serene";
    for (Direction d : {Direction::left, Direction::right})
        for (int r = 1; r <= 6; ++r)
            a.perturbations.push_back({std::string(to_string(d)) + std::to_string(r), "ax",
                                       std::string(to_string(d)) + " " + std::to_string(r), d, r});
    return a;
}

}  // namespace

TEST(Mapping, SharedPositionTable) {
    json table = json::parse(support::read_file(support::fixture_dir() / "position_mapping.json"));
    ASSERT_EQ(table["cases"].size(), 25u);
    for (const auto& c : table["cases"]) {
        double p = c.contains("decimal") ? std::stod(c["decimal"].get<std::string>())
                                         : static_cast<double>(c["num"].get<int>()) / c["den"].get<int>();
        EXPECT_EQ(target_intensity(p), c["intensity"].get<int>()) << c.dump();
        auto d = direction_of(p);
        if (c["direction"].is_null()) EXPECT_FALSE(d) << c.dump();
        else EXPECT_EQ(std::string(to_string(*d)), c["direction"].get<std::string>()) << c.dump();
    }
}

TEST(Mapping, WorkedExamples) {
    EXPECT_EQ(target_intensity(0.5), 3);
    EXPECT_EQ(target_intensity(-0.17), 2);
    EXPECT_EQ(target_intensity(1.0), 6);
    EXPECT_EQ(target_intensity(0.0), 0);
    EXPECT_EQ(target_intensity(1e-12), 1);
}

TEST(Mapping, JustAboveBoundaryMovesUp) {
    for (int j = 1; j < 6; ++j) {
        double at = j / 6.0;
        EXPECT_EQ(target_intensity(at), j);
        EXPECT_EQ(target_intensity(std::nextafter(at, 2.0)), j);  // within snap distance
        EXPECT_EQ(target_intensity(at + 1e-6), j + 1);
        EXPECT_EQ(target_intensity(-(at + 1e-6)), j + 1);
    }
}

TEST(Mapping, OutOfRangeIsRejected) {
    for (double p : {1.0000001, -1.5, std::nan(""), static_cast<double>(INFINITY)}) {
        try {
            target_intensity(p);
            ADD_FAILURE() << p;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::position_out_of_range);
        }
    }
}

TEST(Mapping, CandidatesAreGatedByRank) {
    auto a = axis();
    EXPECT_TRUE(candidates_for(a, 0.0).empty());
    auto c = candidates_for(a, 0.5);
    ASSERT_EQ(c.size(), 3u);
    for (const auto& p : c) {
        EXPECT_EQ(p.direction, Direction::right);
        EXPECT_LE(p.intensity_rank, 3);
    }
    EXPECT_EQ(candidates_for(a, -1.0).size(), 6u);
    EXPECT_EQ(candidates_for(a, -0.01).size(), 1u);
    EXPECT_EQ(candidates_for(a, -0.01)[0].direction, Direction::left);
}

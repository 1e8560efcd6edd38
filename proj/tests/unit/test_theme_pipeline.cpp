#include <gtest/gtest.h>

#include "test_support.hpp"
#include "thematic/theme/pipeline.hpp"

using namespace thematic;
using namespace thematic::theme;
using providers::FixtureFile;

namespace {

struct Harness {
    FixtureFile fixtures{providers::FixtureHeader{}};
    std::shared_ptr<providers::MockClient> client;
    std::unique_ptr<ThemePipeline> pipeline;

    ThemePipeline& build(PipelineOptions options = {}) {
        client = std::make_shared<providers::MockClient>(providers::ProviderKind::language_model, fixtures);
        pipeline = std::make_unique<ThemePipeline>(std::make_shared<providers::LanguageModel>(client), options);
        return *pipeline;
    }
};

std::vector<std::string> labels_of(const std::vector<KeywordCandidate>& cs) {
    std::vector<std::string> out;
    for (const auto& c : cs) out.push_back(c.label);
    return out;
}

std::vector<std::string> side(const ThemeAxis& a, Direction d) {
    std::vector<std::string> out;
    for (int r = 1; r <= 6; ++r)
        for (const auto& p : a.perturbations)
            if (p.direction == d && p.intensity_rank == r) out.push_back(p.label);
    return out;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an error";
    return ErrorCode::invalid_argument;
}

}  // namespace

TEST(Extract, SunsetKeywordsInProviderOrder) {
    Harness h;
    h.fixtures = support::demo_fixture_file();
    auto got = h.build().extract_keywords(support::sunset_png());
    EXPECT_EQ(labels_of(got), (std::vector<std::string>{"beach", "warm", "nostalgic", "golden hour"}));
    for (const auto& c : got) EXPECT_EQ(c.kind, KeywordKind::unknown);
}

TEST(Extract, CaseInsensitiveDedupKeepsFirstSpelling) {
    Harness h;
    support::add_extraction(h.fixtures, "img", {"calm", "Calm", "  calm  ", "sea"});
    EXPECT_EQ(labels_of(h.build().extract_keywords("img")), (std::vector<std::string>{"calm", "sea"}));
}

TEST(Extract, EmptyListIsEmptyExtraction) {
    Harness h;
    support::add_extraction(h.fixtures, "img", {});
    EXPECT_EQ(code_of([&] { h.build().extract_keywords("img"); }), ErrorCode::empty_extraction);
    Harness blank;
    support::add_extraction(blank.fixtures, "img", {" ", ""});
    EXPECT_EQ(code_of([&] { blank.build().extract_keywords("img"); }), ErrorCode::empty_extraction);
}

TEST(Extract, ProviderFailurePropagates) {
    Harness h;  // no fixture: the mock reports a miss
    EXPECT_EQ(code_of([&] { h.build().extract_keywords("img"); }), ErrorCode::fixture_miss);
}

TEST(Classify, AssignsEveryCandidate) {
    Harness h;
    h.fixtures = support::demo_fixture_file();
    auto& p = h.build();
    auto got = p.classify_keywords(p.extract_keywords(support::sunset_png()));
    ASSERT_EQ(got.size(), 4u);
    EXPECT_EQ(got[0].kind, KeywordKind::object);
    EXPECT_EQ(got[1].kind, KeywordKind::thematic);
    EXPECT_EQ(got[2].kind, KeywordKind::thematic);
    EXPECT_EQ(got[3].kind, KeywordKind::object);
}

TEST(Classify, MissingVerdictIsClassificationIncomplete) {
    Harness h;
    support::add_classification(h.fixtures, {"beach", "warm", "nostalgic"}, {{"beach", "object"}, {"warm", "thematic"}});
    std::vector<KeywordCandidate> in{{"beach"}, {"warm"}, {"nostalgic"}};
    try {
        h.build().classify_keywords(in);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::classification_incomplete);
        EXPECT_EQ(e.details()["missing"], json::array({"nostalgic"}));
    }
}

TEST(Classify, RejectsUnknownKindAndPreclassifiedInput) {
    Harness h;
    support::add_classification(h.fixtures, {"a"}, {{"a", "vibe"}});
    auto& p = h.build();
    EXPECT_EQ(code_of([&] { p.classify_keywords({{"a"}}); }), ErrorCode::contract_violation);
    EXPECT_EQ(code_of([&] { p.classify_keywords({{"a", KeywordKind::object}}); }), ErrorCode::invalid_argument);
    EXPECT_TRUE(p.classify_keywords({}).empty());
}

TEST(Filter, ThematicOnlyInInputOrder) {
    std::vector<KeywordCandidate> in{{"beach", KeywordKind::object},
                                     {"warm", KeywordKind::thematic},
                                     {"nostalgic", KeywordKind::thematic},
                                     {"golden hour", KeywordKind::object}};
    auto themes = ThemePipeline::filter_thematic(in, "ses-1");
    ASSERT_EQ(themes.size(), 2u);
    EXPECT_EQ(themes[0].label, "warm");
    EXPECT_EQ(themes[1].label, "nostalgic");
    EXPECT_EQ(themes[0].source, ThemeSource::extracted);
    EXPECT_EQ(themes[0].id, ThemePipeline::filter_thematic(in, "ses-1")[0].id);
    EXPECT_NE(themes[0].id, ThemePipeline::filter_thematic(in, "ses-2")[0].id);
}

TEST(Filter, AllObjectsIsNoThemesFound) {
    std::vector<KeywordCandidate> in{{"vase", KeywordKind::object}, {"table", KeywordKind::object}};
    EXPECT_EQ(code_of([&] { ThemePipeline::filter_thematic(in, "s"); }), ErrorCode::no_themes_found);
    EXPECT_EQ(code_of([&] { ThemePipeline::filter_thematic({{"x"}}, "s"); }), ErrorCode::invalid_argument);
}

TEST(BuildAxis, SereneHasPolesAndTwelveRankedPerturbations) {
    Harness h;
    h.fixtures = support::demo_fixture_file();
    auto axis = h.build().build_axis({make_theme("s", "serene", ThemeSource::user_added), std::nullopt});
    EXPECT_EQ(axis.left_pole_label, "chaotic");
    EXPECT_EQ(axis.right_pole_label, "serene");
    EXPECT_TRUE(validate_axis(axis).ok());
    EXPECT_EQ(side(axis, Direction::right),
              (std::vector<std::string>{"calm", "peaceful", "tranquil", "still", "meditative", "blissful"}));
    EXPECT_EQ(side(axis, Direction::left).front(), "restless");
    for (const auto& p : axis.perturbations) EXPECT_EQ(p.axis_id, axis.id);
}

TEST(BuildAxis, TenLabelsIsIncompleteAxis) {
    Harness h;
    support::add_axis(h.fixtures, "warm", "cold", "warm", {"a", "b", "c", "d", "e"}, {"f", "g", "h", "i", "j"});
    try {
        h.build().build_axis({make_theme("s", "warm", ThemeSource::user_added), std::nullopt});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::incomplete_axis);
        EXPECT_EQ(e.details()["got"], 10);
        EXPECT_EQ(e.details()["left"].size(), 5u);
    }
}

TEST(BuildAxis, ThirteenWithOneDuplicateDedupesToValidAxis) {
    Harness h;
    support::add_axis(h.fixtures, "warm", "cold", "warm", {"a", "b", "c", "d", "e", "f"},
                      {"g", "h", "A", "i", "j", "k", "l"});
    auto axis = h.build().build_axis({make_theme("s", "warm", ThemeSource::user_added), std::nullopt});
    EXPECT_TRUE(validate_axis(axis).ok());
    EXPECT_EQ(side(axis, Direction::right), (std::vector<std::string>{"g", "h", "i", "j", "k", "l"}));
}

TEST(BuildAxis, TooManyLabelsKeepsFirstSixPerSide) {
    Harness h;
    support::add_axis(h.fixtures, "warm", "cold", "warm", {"a", "b", "c", "d", "e", "f", "g", "h"},
                      {"i", "j", "k", "l", "m", "n", "o"});
    auto axis = h.build().build_axis({make_theme("s", "warm", ThemeSource::user_added), std::nullopt});
    EXPECT_EQ(axis.perturbations.size(), 12u);
    EXPECT_EQ(side(axis, Direction::left).back(), "f");
}

TEST(BuildAxis, PoleHintSkipsPoleCall) {
    Harness h;
    support::add_perturbations(h.fixtures, "warm", "icy", "toasty", {"a", "b", "c", "d", "e", "f"},
                               {"g", "h", "i", "j", "k", "l"});
    auto& p = h.build();
    AxisRequest req{make_theme("s", "warm", ThemeSource::user_added), std::make_pair("icy", "toasty")};
    auto axis = p.build_axis(req);
    EXPECT_EQ(axis.left_pole_label, "icy");
    EXPECT_EQ(axis.right_pole_label, "toasty");
    EXPECT_EQ(h.client->lookups(), 1);
}

TEST(BuildAxis, PoleFailureFallsBackToLessMore) {
    Harness h;
    support::add_perturbations(h.fixtures, "warm", "less warm", "more warm", {"a", "b", "c", "d", "e", "f"},
                               {"g", "h", "i", "j", "k", "l"});
    auto axis = h.build().build_axis({make_theme("s", "warm", ThemeSource::user_added), std::nullopt});
    EXPECT_EQ(axis.left_pole_label, "less warm");
    EXPECT_EQ(axis.right_pole_label, "more warm");
}

TEST(BuildAxis, RejectsOtherPerturbationCounts) {
    Harness h;
    AxisRequest req{make_theme("s", "warm", ThemeSource::user_added), std::nullopt};
    req.perturbation_count = 24;
    EXPECT_EQ(code_of([&] { h.build().build_axis(req); }), ErrorCode::invalid_argument);
}

TEST(BuildAxis, IdsAreDeterministic) {
    Harness h;
    h.fixtures = support::demo_fixture_file();
    auto& p = h.build();
    auto a = p.build_axis({make_theme("s", "warm", ThemeSource::extracted), std::nullopt});
    auto b = p.build_axis({make_theme("s", "warm", ThemeSource::extracted), std::nullopt});
    EXPECT_EQ(a, b);
}

TEST(BuildAxes, ConcurrentBuildKeepsOrderAndRethrows) {
    Harness h;
    h.fixtures = support::demo_fixture_file();
    auto& p = h.build(PipelineOptions{2});
    std::vector<AxisRequest> reqs{{make_theme("s", "warm", ThemeSource::extracted), std::nullopt},
                                  {make_theme("s", "nostalgic", ThemeSource::extracted), std::nullopt},
                                  {make_theme("s", "serene", ThemeSource::user_added), std::nullopt}};
    auto axes = p.build_axes(reqs);
    ASSERT_EQ(axes.size(), 3u);
    EXPECT_EQ(axes[0].theme.label, "warm");
    EXPECT_EQ(axes[2].theme.label, "serene");
    reqs.push_back({make_theme("s", "unknown-theme", ThemeSource::user_added), std::nullopt});
    EXPECT_EQ(code_of([&] { p.build_axes(reqs); }), ErrorCode::fixture_miss);
}

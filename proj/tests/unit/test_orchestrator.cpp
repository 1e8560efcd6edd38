#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace thematic;
using namespace thematic::orchestrator;

namespace {

const ThemeAxis& axis_named(const Session& s, const std::string& label) {
    for (const auto& a : s.axes)
        if (a.theme.label == label) return a;
    throw std::runtime_error("no axis " + label);
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

TEST(CreateSession, SunsetYieldsTwoAxesAndRootImage) {
    support::MockEnv env;
    auto created = env.sunset_session();
    const Session& s = created.session;
    EXPECT_TRUE(validate_session(s).ok());
    ASSERT_EQ(s.axes.size(), 2u);
    EXPECT_EQ(s.axes[0].theme.label, "warm");
    EXPECT_EQ(s.axes[1].theme.label, "nostalgic");
    ASSERT_EQ(s.images.size(), 1u);
    EXPECT_EQ(s.images[0].origin, ImageOrigin::uploaded);
    EXPECT_EQ(s.primary_ref, s.images[0].id);
    EXPECT_EQ(s.images[0].base_description, "a quiet beach at dusk");
    EXPECT_EQ(s.images[0].payload_hash, sha256_hex(support::sunset_png()));
    for (const auto& [id, pos] : s.navigation) EXPECT_EQ(pos, 0.0);
}

TEST(CreateSession, AllObjectImageNeedsUserTheme) {
    support::MockEnv env;
    EXPECT_EQ(code_of([&] { env.orch->create_session("s", support::still_life_png()); }), ErrorCode::no_themes_found);
    auto created = env.orch->create_session("s", support::still_life_png(), {"serene"});
    ASSERT_EQ(created.session.axes.size(), 1u);
    EXPECT_EQ(created.session.axes[0].theme.source, ThemeSource::user_added);
}

TEST(CreateSession, RejectsBadUploads) {
    support::MockEnv env(support::demo_fixture_file(), OrchestratorOptions{4, 3, ranking::Polarity::compatibility_first,
                                                                            true, 100});
    EXPECT_EQ(code_of([&] { env.orch->create_session("s", support::sunset_png()); }), ErrorCode::payload_too_large);
    support::MockEnv small;
    EXPECT_EQ(code_of([&] { small.orch->create_session("s", "not an image"); }), ErrorCode::image_undecodable);
    EXPECT_EQ(small.lm->calls(), 0);
}

TEST(CreateSession, MaxThemesCapsExtractedThemes) {
    support::MockEnv env(support::demo_fixture_file(), OrchestratorOptions{1});
    EXPECT_EQ(env.sunset_session().session.axes.size(), 1u);
}

TEST(CreateSession, ProviderFailureProducesNothing) {
    support::MockEnv env;
    env.lm->fail_next(ErrorCode::provider_unavailable);
    EXPECT_EQ(code_of([&] { env.sunset_session(); }), ErrorCode::provider_unavailable);
    EXPECT_EQ(env.blobs->size(), 0u);
}

TEST(Navigate, RecordsPositionAndPreviewsPrompt) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    const auto& warm = axis_named(s, "warm");
    auto preview = env.orch->navigate(s, {warm.id, 0.5}, 3);
    EXPECT_EQ(preview.session.navigation.at(warm.id), 0.5);
    EXPECT_EQ(preview.session.images, s.images);
    ASSERT_EQ(preview.selection.descriptors.size(), 3u);
    for (const auto& d : preview.selection.descriptors) {
        EXPECT_EQ(d.perturbation.direction, Direction::right);
        EXPECT_LE(d.perturbation.intensity_rank, 3);
    }
    EXPECT_EQ(preview.prompt.base_description, "a quiet beach at dusk");
    EXPECT_EQ(preview.prompt_preview.rfind("a quiet beach at dusk\nThematic emphasis: ", 0), 0u);
    EXPECT_FALSE(preview.selection.ranking_fingerprint.empty());
}

TEST(Navigate, OriginSelectsNothingAndSkipsEmbedding) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    int before = env.em->calls();
    auto preview = env.orch->navigate(s, {s.axes[0].id, 0.0}, 3);
    EXPECT_TRUE(preview.selection.descriptors.empty());
    EXPECT_EQ(preview.prompt_preview, "a quiet beach at dusk");
    EXPECT_EQ(env.em->calls(), before);
}

TEST(Navigate, KLargerThanCandidatesReturnsAll) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    EXPECT_EQ(env.orch->gesture_to_descriptors(s, {s.axes[0].id, -0.2}, 6).descriptors.size(), 2u);
    EXPECT_EQ(code_of([&] { env.orch->gesture_to_descriptors(s, {s.axes[0].id, 0.2}, 0); }),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([&] { env.orch->gesture_to_descriptors(s, {"nope", 0.2}, 1); }), ErrorCode::unknown_axis);
    EXPECT_EQ(code_of([&] { env.orch->gesture_to_descriptors(s, {s.axes[0].id, 2.0}, 1); }),
              ErrorCode::position_out_of_range);
}

TEST(Generate, AppendsChildOfPrimary) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    const auto& warm = axis_named(s, "warm");
    auto g = env.orch->generate(s, {warm.id, 0.5}, 3, 11);
    ASSERT_EQ(g.session.images.size(), 2u);
    const auto& child = g.session.images[1];
    EXPECT_EQ(child.origin, ImageOrigin::generated);
    EXPECT_EQ(child.parent_id, s.primary_ref);
    EXPECT_EQ(g.session.primary_ref, s.primary_ref);
    ASSERT_TRUE(child.prompt_used);
    EXPECT_EQ(child.prompt_used->injected_descriptors.size(), 3u);
    EXPECT_TRUE(env.blobs->contains(child.payload_hash));
    EXPECT_TRUE(lineage_check(g.session).ok());
    EXPECT_EQ(g.record.image, child);
    EXPECT_EQ(sniff_image(env.blobs->get(child.payload_hash)), ImageFormat::png);
}

TEST(Generate, IsAtomicOnGeneratorFailure) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    auto before = canonical_json(s);
    std::size_t blobs_before = env.blobs->size();
    env.gen->fail_next(ErrorCode::provider_unavailable);
    EXPECT_EQ(code_of([&] { env.orch->generate(s, {s.axes[0].id, 0.5}, 3); }), ErrorCode::generator_unavailable);
    EXPECT_EQ(canonical_json(s), before);
    EXPECT_EQ(env.blobs->size(), blobs_before);
}

TEST(Generate, SeedMakesOutputReproducible) {
    support::MockEnv a, b;
    auto sa = a.sunset_session().session;
    auto sb = b.sunset_session().session;
    auto ga = a.orch->generate(sa, {sa.axes[1].id, -1.0}, 2, 5);
    auto gb = b.orch->generate(sb, {sb.axes[1].id, -1.0}, 2, 5);
    EXPECT_EQ(canonical_json(ga.session), canonical_json(gb.session));
}

TEST(Generate, ReferenceImageFollowsOption) {
    // The mock generator's synthesized image ignores the reference, so the
    // request shape is observed through a recording wrapper.
    support::MockEnv env(support::demo_fixture_file(),
                         OrchestratorOptions{4, 3, ranking::Polarity::compatibility_first, false});
    auto s = env.sunset_session().session;
    auto rec = std::make_shared<providers::RecordingClient>(env.gen, providers::FixtureHeader{});
    env.providers.generator = std::make_shared<providers::Generator>(rec);
    orchestrator::Orchestrator orch(env.providers, env.embeddings, env.blobs, env.clock, env.orch->options());
    orch.generate(s, {s.axes[0].id, 0.3}, 1);
    auto entries = rec->snapshot().entries();
    ASSERT_EQ(entries.size(), 1u);
    EXPECT_FALSE(entries.begin()->second.request.contains("reference_image"));

    orchestrator::Orchestrator with_ref(env.providers, env.embeddings, env.blobs, env.clock, OrchestratorOptions{});
    with_ref.generate(s, {s.axes[0].id, 0.4}, 1);
    bool saw_reference = false;
    auto recorded = rec->snapshot();
    for (const auto& [fp, e] : recorded.entries())
        if (e.request.contains("reference_image")) saw_reference = true;
    EXPECT_TRUE(saw_reference);
}

TEST(Promote, SwitchesPrimaryAndResetsNavigation) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    auto nav = env.orch->navigate(s, {s.axes[0].id, 0.5}, 3).session;
    auto g = env.orch->generate(nav, {s.axes[0].id, 0.5}, 3);
    const auto& child_id = g.session.images.back().id;

    auto promoted = env.orch->promote_reference(g.session, child_id);
    EXPECT_EQ(promoted.primary_ref, child_id);
    for (const auto& [id, pos] : promoted.navigation) EXPECT_EQ(pos, 0.0);
    EXPECT_EQ(promoted.images, g.session.images);

    auto same = env.orch->promote_reference(g.session, g.session.primary_ref);
    EXPECT_EQ(same.navigation, g.session.navigation);
    EXPECT_NE(same.updated_at, g.session.updated_at);

    EXPECT_EQ(code_of([&] { env.orch->promote_reference(g.session, "img-nope"); }), ErrorCode::unknown_image);
}

TEST(Promote, GeneratedChildInheritsBaseDescription) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    auto g = env.orch->generate(s, {s.axes[0].id, 0.5}, 1);
    auto promoted = env.orch->promote_reference(g.session, g.session.images.back().id);
    int lm_before = env.lm->calls();
    auto again = env.orch->generate(promoted, {s.axes[1].id, 0.9}, 2);
    EXPECT_EQ(env.lm->calls(), lm_before);
    EXPECT_EQ(again.session.images.back().parent_id, promoted.primary_ref);
    EXPECT_TRUE(lineage_check(again.session).ok());
}

TEST(AddTheme, AppendsAxisAndRejectsDuplicates) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    auto next = env.orch->add_theme(s, "serene");
    ASSERT_EQ(next.axes.size(), 3u);
    EXPECT_EQ(next.axes[2].left_pole_label, "chaotic");
    EXPECT_EQ(next.navigation.at(next.axes[2].id), 0.0);
    EXPECT_EQ(code_of([&] { env.orch->add_theme(next, " Serene"); }), ErrorCode::duplicate_theme);
    EXPECT_EQ(code_of([&] { env.orch->add_theme(s, "warm"); }), ErrorCode::duplicate_theme);
}

TEST(BaseDescription, FailureIsMissingBaseDescription) {
    support::MockEnv env;
    auto s = env.sunset_session().session;
    s.images[0].base_description.reset();
    env.lm->fail_always(true);
    EXPECT_EQ(code_of([&] { env.orch->generate(s, {s.axes[0].id, 0.0}, 1); }), ErrorCode::missing_base_description);
}

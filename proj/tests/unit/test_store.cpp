#include <thread>

#include <gtest/gtest.h>

#include "test_support.hpp"
#include "thematic/orchestrator/registry.hpp"

using namespace thematic;
using namespace thematic::orchestrator;

namespace {

Session demo_session(support::MockEnv& env) {
    auto s = env.sunset_session("ses-store").session;
    return env.orch->generate(s, {s.axes[0].id, 0.5}, 2).session;
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

TEST(FileStores, PersistLoadRoundTrip) {
    support::MockEnv env;
    auto s = demo_session(env);
    support::TempDir dir;
    FileSessionStore store(dir.path());
    EXPECT_EQ(store.persist(s), s.id);
    EXPECT_EQ(store.load(s.id), s);
    EXPECT_EQ(store.list(), std::vector<std::string>{s.id});
    EXPECT_TRUE(store.remove(s.id));
    EXPECT_EQ(code_of([&] { store.load(s.id); }), ErrorCode::unknown_session);
}

TEST(FileStores, TruncatedRecordIsCorrupt) {
    support::MockEnv env;
    auto s = demo_session(env);
    support::TempDir dir;
    FileSessionStore store(dir.path());
    store.persist(s);
    auto text = support::read_file(store.path_for(s.id));
    {
        std::ofstream out(store.path_for(s.id), std::ios::binary | std::ios::trunc);
        out << text.substr(0, text.size() / 2);
    }
    EXPECT_EQ(code_of([&] { store.load(s.id); }), ErrorCode::corrupt_record);
}

TEST(FileStores, RecordViolatingInvariantsIsCorrupt) {
    support::MockEnv env;
    auto s = demo_session(env);
    MemorySessionStore store;
    store.persist(s);
    json j = json::parse(canonical_json(s));
    j["images"][1]["parent_id"] = "img-ghost";
    store.overwrite_raw(s.id, j.dump());
    EXPECT_EQ(code_of([&] { store.load(s.id); }), ErrorCode::corrupt_record);
    j = json::parse(canonical_json(s));
    j["id"] = "other";
    store.overwrite_raw(s.id, j.dump());
    EXPECT_EQ(code_of([&] { store.load(s.id); }), ErrorCode::corrupt_record);
}

TEST(FileStores, RefusesToPersistBrokenLineage) {
    support::MockEnv env;
    auto s = demo_session(env);
    s.images.push_back(s.images[0]);
    MemorySessionStore store;
    EXPECT_EQ(code_of([&] { store.persist(s); }), ErrorCode::invalid_argument);
    EXPECT_TRUE(store.list().empty());
}

TEST(FileStores, RejectsPathLikeIds) {
    support::TempDir dir;
    FileSessionStore store(dir.path());
    EXPECT_EQ(code_of([&] { store.load("../etc"); }), ErrorCode::invalid_argument);
}

TEST(FileStores, BlobsAreContentAddressed) {
    support::TempDir dir;
    FileBlobStore blobs(dir.path());
    auto h = blobs.put("hello");
    EXPECT_EQ(h, sha256_hex("hello"));
    EXPECT_EQ(blobs.put("hello"), h);
    EXPECT_EQ(blobs.get(h), "hello");
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "blobs" / h.substr(0, 2) / h));
    EXPECT_FALSE(blobs.contains(sha256_hex("other")));
    EXPECT_THROW(blobs.get(sha256_hex("other")), Error);
}

TEST(Registry, MutateCommitsOnlyOnSuccess) {
    support::MockEnv env;
    auto store = std::make_shared<MemorySessionStore>();
    SessionRegistry reg(store);
    auto s = env.sunset_session("ses-reg").session;
    reg.insert(s);
    auto before = reg.snapshot(s.id);
    EXPECT_THROW(reg.mutate(s.id, [](const Session&, const std::atomic<bool>&) -> Session {
        throw Error(ErrorCode::generator_unavailable, "down");
    }), Error);
    EXPECT_EQ(reg.snapshot(s.id), before);
    EXPECT_EQ(store->load(s.id), *before);

    auto after = reg.mutate(s.id, [&](const Session& cur, const std::atomic<bool>&) {
        return env.orch->generate(cur, {cur.axes[0].id, 0.5}, 1).session;
    });
    EXPECT_EQ(after->images.size(), 2u);
    EXPECT_EQ(store->load(s.id), *after);
    EXPECT_EQ(before->images.size(), 1u);  // old snapshot is immutable
}

TEST(Registry, PersistFailureDoesNotPublish) {
    support::MockEnv env;
    SessionRegistry reg(std::make_shared<MemorySessionStore>());
    auto s = env.sunset_session("ses-reg").session;
    reg.insert(s);
    EXPECT_THROW(reg.mutate(s.id, [](const Session& cur, const std::atomic<bool>&) {
        Session bad = cur;
        bad.primary_ref = "img-missing";
        return bad;
    }), Error);
    EXPECT_EQ(reg.snapshot(s.id)->primary_ref, s.primary_ref);
}

TEST(Registry, ReloadsFromStoreAndRemoves) {
    support::MockEnv env;
    auto store = std::make_shared<MemorySessionStore>();
    auto s = env.sunset_session("ses-reg").session;
    store->persist(s);
    SessionRegistry reg(store);
    EXPECT_EQ(*reg.snapshot(s.id), s);
    EXPECT_TRUE(reg.remove(s.id));
    EXPECT_EQ(code_of([&] { reg.snapshot(s.id); }), ErrorCode::unknown_session);
    EXPECT_FALSE(reg.remove(s.id));
}

TEST(Registry, ConcurrentMutationsSerialize) {
    support::MockEnv env;
    SessionRegistry reg(std::make_shared<MemorySessionStore>());
    auto s = env.sunset_session("ses-reg").session;
    reg.insert(s);
    std::vector<std::thread> threads;
    for (int i = 0; i < 4; ++i)
        threads.emplace_back([&, i] {
            reg.mutate(s.id, [&](const Session& cur, const std::atomic<bool>&) {
                return env.orch->generate(cur, {cur.axes[0].id, 0.1 * (i + 1)}, 1, i).session;
            });
        });
    for (auto& t : threads) t.join();
    auto final = reg.snapshot(s.id);
    EXPECT_EQ(final->images.size(), 5u);
    EXPECT_TRUE(lineage_check(*final).ok());
}

TEST(Registry, DeleteCancelsInFlightMutation) {
    support::MockEnv env;
    SessionRegistry reg(std::make_shared<MemorySessionStore>());
    auto s = env.sunset_session("ses-reg").session;
    reg.insert(s);
    EXPECT_EQ(code_of([&] {
                  reg.mutate(s.id, [&](const Session& cur, const std::atomic<bool>&) {
                      reg.remove(s.id);
                      return cur;
                  });
              }),
              ErrorCode::cancelled);
}

TEST(Registry, SweepExpired) {
    support::MockEnv env;
    SessionRegistry reg(std::make_shared<MemorySessionStore>(), std::chrono::seconds(0));
    reg.insert(env.sunset_session("ses-a").session);
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    EXPECT_EQ(reg.sweep_expired(), 1u);
}

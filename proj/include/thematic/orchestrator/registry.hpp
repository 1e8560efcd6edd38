#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "thematic/orchestrator/store.hpp"

namespace thematic::orchestrator {

/// Live sessions: immutable snapshots for readers, one writer at a time per
/// session id, durable commit before a new snapshot becomes visible.
class SessionRegistry {
public:
    using Mutation = std::function<Session(const Session&, const std::atomic<bool>& cancelled)>;

    explicit SessionRegistry(std::shared_ptr<SessionStore> store,
                             std::chrono::seconds ttl = std::chrono::hours(24))
        : store_(std::move(store)), ttl_(ttl) {}

    std::shared_ptr<const Session> snapshot(const std::string& id) {
        auto slot = find_slot(id);
        std::lock_guard lock(slot->snapshot_mu);
        return slot->snapshot;
    }

    /// Commits a brand-new session.
    std::shared_ptr<const Session> insert(Session s) {
        store_->persist(s);
        auto slot = std::make_shared<Slot>();
        slot->snapshot = std::make_shared<const Session>(std::move(s));
        slot->touched = Clock::now();
        std::lock_guard lock(map_mu_);
        slots_[slot->snapshot->id] = slot;
        return slot->snapshot;
    }

    /// Runs `f` against the current snapshot with the session's write lock
    /// held. The result is persisted and published only if `f` returns and
    /// the store accepts it; otherwise nothing changes.
    std::shared_ptr<const Session> mutate(const std::string& id, const Mutation& f) {
        auto slot = find_slot(id);
        std::lock_guard write(slot->write_mu);
        std::shared_ptr<const Session> current;
        {
            std::lock_guard lock(slot->snapshot_mu);
            current = slot->snapshot;
        }
        Session next = f(*current, slot->cancelled);
        if (slot->cancelled.load()) fail(ErrorCode::cancelled, "session " + id + " was deleted");
        store_->persist(next);
        auto published = std::make_shared<const Session>(std::move(next));
        {
            std::lock_guard lock(slot->snapshot_mu);
            slot->snapshot = published;
            slot->touched = Clock::now();
        }
        return published;
    }

    /// Deletes the session and cancels any in-flight provider calls for it.
    bool remove(const std::string& id) {
        std::shared_ptr<Slot> slot;
        {
            std::lock_guard lock(map_mu_);
            auto it = slots_.find(id);
            if (it != slots_.end()) {
                slot = it->second;
                slots_.erase(it);
            }
        }
        if (slot) slot->cancelled.store(true);
        bool stored = false;
        try {
            stored = store_->remove(id);
        } catch (const Error&) {
        }
        return slot != nullptr || stored;
    }

    /// Drops sessions idle for longer than the TTL. Returns the count removed.
    std::size_t sweep_expired() {
        std::vector<std::string> expired;
        auto now = Clock::now();
        {
            std::lock_guard lock(map_mu_);
            for (const auto& [id, slot] : slots_) {
                std::lock_guard s(slot->snapshot_mu);
                if (now - slot->touched > ttl_) expired.push_back(id);
            }
        }
        for (const auto& id : expired) remove(id);
        return expired.size();
    }

    SessionStore& store() { return *store_; }

private:
    using Clock = std::chrono::steady_clock;

    struct Slot {
        std::mutex write_mu;
        std::mutex snapshot_mu;
        std::shared_ptr<const Session> snapshot;
        std::atomic<bool> cancelled{false};
        Clock::time_point touched;
    };

    std::shared_ptr<Slot> find_slot(const std::string& id) {
        {
            std::lock_guard lock(map_mu_);
            if (auto it = slots_.find(id); it != slots_.end()) return it->second;
        }
        // Not live: try the durable store (e.g. after a restart).
        Session loaded = store_->load(id);
        auto slot = std::make_shared<Slot>();
        slot->snapshot = std::make_shared<const Session>(std::move(loaded));
        slot->touched = Clock::now();
        std::lock_guard lock(map_mu_);
        return slots_.try_emplace(id, slot).first->second;
    }

    std::shared_ptr<SessionStore> store_;
    std::chrono::seconds ttl_;
    std::mutex map_mu_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
};

}  // namespace thematic::orchestrator

#include "chr/store.hpp"

#include <algorithm>
#include <cassert>
#include <mutex>

namespace chr {

Store::Store() : Store(std::make_shared<std::atomic<ConstraintId>>(0)) {}

Store::Store(std::shared_ptr<std::atomic<ConstraintId>> id_source)
    : next_id_(std::move(id_source)) {}

Store::Entry& Store::entry(ConstraintId id) {
    return const_cast<Entry&>(static_cast<const Store*>(this)->entry(id));
}

const Store::Entry& Store::entry(ConstraintId id) const {
    ConstraintId slot;
    {
        std::shared_lock lock(mutex_);
        auto it = slot_of_.find(id);
        if (it == slot_of_.end())
            throw UnknownIdError("unknown constraint id " + std::to_string(id));
        slot = it->second;
    }
    return chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
}

void Store::require(ConstraintId id) const { (void)entry(id); }

bool Store::contains(ConstraintId id) const {
    std::shared_lock lock(mutex_);
    return slot_of_.count(id) != 0;
}

ConstraintId Store::insert(const Constraint& c) {
    std::unique_lock lock(mutex_);
    ConstraintId id = next_id_->fetch_add(1, std::memory_order_relaxed);
    ConstraintId slot = local_count_++;
    if ((slot >> kChunkBits) >= chunks_.size())
        chunks_.push_back(std::make_unique<Chunk>());
    Entry& e = chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
    e.payload = c;
    e.alive.store(true, std::memory_order_release);
    slot_of_.emplace(id, slot);

    auto [it, fresh] = index_.try_emplace(PredKey{c.symbol, c.arity()});
    PredIndex& pi = it->second;
    if (fresh)
        pi.by_arg.resize(c.arity());
    pi.all.push_back(id);
    for (std::size_t pos = 0; pos < c.arity(); ++pos)
        pi.by_arg[pos][c.args[pos]].push_back(id);

    inserted_.fetch_add(1, std::memory_order_relaxed);
    published_.fetch_add(1, std::memory_order_release);
    return id;
}

bool Store::try_kill(ConstraintId id) {
    Entry& e = entry(id);
    bool expected = true;
    if (e.alive.compare_exchange_strong(expected, false,
                                        std::memory_order_acq_rel)) {
        killed_.fetch_add(1, std::memory_order_relaxed);
        return true;
    }
    return false;
}

bool Store::alive(ConstraintId id) const {
    return entry(id).alive.load(std::memory_order_acquire);
}

const Constraint& Store::payload(ConstraintId id) const {
    return entry(id).payload;
}

std::vector<ConstraintId> Store::candidates(
    const std::string& symbol, std::size_t arity,
    const std::optional<std::pair<std::size_t, Term>>& key) const {
    std::vector<ConstraintId> out;
    std::shared_lock lock(mutex_);
    auto it = index_.find(PredKey{symbol, arity});
    if (it == index_.end())
        return out;
    const PredIndex& pi = it->second;
    const std::vector<ConstraintId>* ids = &pi.all;
    if (key) {
        assert(key->first < arity);
        auto bucket = pi.by_arg[key->first].find(key->second);
        if (bucket == pi.by_arg[key->first].end())
            return out;
        ids = &bucket->second;
    }
    out.reserve(ids->size());
    for (ConstraintId id : *ids) {
        ConstraintId slot = slot_of_.find(id)->second;
        const Entry& e = chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
        if (e.alive.load(std::memory_order_acquire))
            out.push_back(id);
    }
    return out;
}

std::vector<Store::Candidate> Store::snapshot(
    const std::string& symbol, std::size_t arity,
    const std::optional<std::pair<std::size_t, Term>>& key) const {
    std::vector<Candidate> out;
    std::shared_lock lock(mutex_);
    auto it = index_.find(PredKey{symbol, arity});
    if (it == index_.end())
        return out;
    const PredIndex& pi = it->second;
    const std::vector<ConstraintId>* ids = &pi.all;
    if (key) {
        auto bucket = pi.by_arg[key->first].find(key->second);
        if (bucket == pi.by_arg[key->first].end())
            return out;
        ids = &bucket->second;
    }
    out.reserve(ids->size());
    for (ConstraintId id : *ids) {
        ConstraintId slot = slot_of_.find(id)->second;
        const Entry& e = chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
        if (e.alive.load(std::memory_order_acquire))
            out.push_back({id, &e.payload});
    }
    return out;
}

bool Store::claim_exclusive(ConstraintId id) {
    Entry& e = entry(id);
    std::int32_t expected = 0;
    return e.claim.compare_exchange_strong(expected, -1,
                                           std::memory_order_acq_rel);
}

void Store::release_exclusive(ConstraintId id) {
    entry(id).claim.store(0, std::memory_order_release);
}

bool Store::claim_shared(ConstraintId id) {
    Entry& e = entry(id);
    std::int32_t cur = e.claim.load(std::memory_order_acquire);
    while (cur >= 0) {
        if (e.claim.compare_exchange_weak(cur, cur + 1,
                                          std::memory_order_acq_rel))
            return true;
    }
    return false;
}

void Store::release_shared(ConstraintId id) {
    entry(id).claim.fetch_sub(1, std::memory_order_acq_rel);
}

void Store::maybe_sweep() {
    std::uint64_t dead = killed_.load(std::memory_order_relaxed);
    std::uint64_t total = inserted_.load(std::memory_order_relaxed);
    if (total == 0 || dead * 2 <= total)
        return;
    std::unique_lock lock(mutex_, std::try_to_lock);
    if (lock.owns_lock())
        sweep_locked();
}

void Store::sweep() {
    std::unique_lock lock(mutex_);
    sweep_locked();
}

void Store::sweep_locked() {
    auto is_dead = [this](ConstraintId id) {
        ConstraintId slot = slot_of_.find(id)->second;
        const Entry& e = chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
        return !e.alive.load(std::memory_order_acquire);
    };
    for (auto& [key, pi] : index_) {
        std::erase_if(pi.all, is_dead);
        for (auto& bucket_map : pi.by_arg) {
            for (auto it = bucket_map.begin(); it != bucket_map.end();) {
                std::erase_if(it->second, is_dead);
                if (it->second.empty())
                    it = bucket_map.erase(it);
                else
                    ++it;
            }
        }
    }
}

std::vector<std::pair<ConstraintId, Constraint>> Store::alive_entries() const {
    std::vector<std::pair<ConstraintId, Constraint>> out;
    std::shared_lock lock(mutex_);
    std::vector<std::pair<ConstraintId, ConstraintId>> pairs(slot_of_.begin(),
                                                             slot_of_.end());
    std::sort(pairs.begin(), pairs.end());
    for (auto [id, slot] : pairs) {
        const Entry& e = chunks_[slot >> kChunkBits]->entries[slot & (kChunkSize - 1)];
        if (e.alive.load(std::memory_order_acquire))
            out.emplace_back(id, e.payload);
    }
    return out;
}

std::vector<Constraint> Store::alive_multiset() const {
    std::vector<Constraint> out;
    for (auto& [id, c] : alive_entries())
        out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
}

Store::Audit Store::audit() const {
    Audit a;
    a.inserted = inserted_.load(std::memory_order_relaxed);
    a.killed = killed_.load(std::memory_order_relaxed);
    return a;
}

} // namespace chr

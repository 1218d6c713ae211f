#ifndef CHR_STORE_HPP
#define CHR_STORE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "chr/ast.hpp"
#include "chr/errors.hpp"

namespace chr {

using ConstraintId = std::uint64_t;

/// Shared store of identified constraints. Ids are dense, monotonically
/// assigned and never reused. Deletion is logical: an alive flag makes a
/// single alive->dead transition; index entries are delinked by sweep().
///
/// Thread safety: insert/candidates/sweep synchronize on an internal
/// shared mutex; alive checks, try_kill and the claim primitives are
/// lock-free once an id exists. Payloads are immutable after insert.
class Store {
public:
    Store();
    /// Ensembles share one id sequence across per-location stores.
    explicit Store(std::shared_ptr<std::atomic<ConstraintId>> id_source);

    Store(const Store&) = delete;
    Store& operator=(const Store&) = delete;

    ConstraintId insert(const Constraint& c);

    /// True exactly once per id, for the caller that made the transition.
    bool try_kill(ConstraintId id);

    bool alive(ConstraintId id) const;
    const Constraint& payload(ConstraintId id) const;
    bool contains(ConstraintId id) const;

    /// Alive ids for a predicate, optionally narrowed to entries whose
    /// argument at `key->first` equals `key->second`. Ascending id order.
    std::vector<ConstraintId> candidates(
        const std::string& symbol, std::size_t arity,
        const std::optional<std::pair<std::size_t, Term>>& key = std::nullopt) const;

    /// Like candidates() but resolves payload pointers in the same pass.
    /// Pointers stay valid for the lifetime of the store.
    struct Candidate {
        ConstraintId id;
        const Constraint* payload;
    };
    std::vector<Candidate> snapshot(
        const std::string& symbol, std::size_t arity,
        const std::optional<std::pair<std::size_t, Term>>& key = std::nullopt) const;

    /// Exclusive claim on an id (commit-time removal reservation).
    bool claim_exclusive(ConstraintId id);
    void release_exclusive(ConstraintId id);
    /// Shared claim (commit-time liveness pin for kept constraints).
    bool claim_shared(ConstraintId id);
    void release_shared(ConstraintId id);

    /// Delink dead ids from the index when the dead fraction crosses 1/2.
    void maybe_sweep();
    void sweep();

    std::vector<std::pair<ConstraintId, Constraint>> alive_entries() const;
    std::vector<Constraint> alive_multiset() const;

    struct Audit {
        std::uint64_t inserted = 0;
        std::uint64_t killed = 0;
        std::uint64_t alive() const { return inserted - killed; }
    };
    Audit audit() const;

private:
    static constexpr std::size_t kChunkBits = 10;
    static constexpr std::size_t kChunkSize = 1u << kChunkBits;

    struct Entry {
        Constraint payload;
        std::atomic<bool> alive{false};
        // 0 free, -1 exclusively claimed, n>0 shared holders.
        std::atomic<std::int32_t> claim{0};
    };

    struct Chunk {
        std::unique_ptr<Entry[]> entries{new Entry[kChunkSize]};
    };

    struct PredIndex {
        std::vector<ConstraintId> all;
        // argument position -> ground key -> ids
        std::vector<std::unordered_map<Term, std::vector<ConstraintId>, TermHash>> by_arg;
    };

    Entry& entry(ConstraintId id);
    const Entry& entry(ConstraintId id) const;
    void require(ConstraintId id) const;
    void sweep_locked();

    std::shared_ptr<std::atomic<ConstraintId>> next_id_;
    mutable std::shared_mutex mutex_;
    std::vector<std::unique_ptr<Chunk>> chunks_;
    std::atomic<ConstraintId> published_{0}; // ids below this are readable
    std::uint64_t local_count_ = 0;          // entries owned by this store
    std::unordered_map<ConstraintId, ConstraintId> slot_of_; // id -> arena slot
    std::map<PredKey, PredIndex> index_;
    std::atomic<std::uint64_t> inserted_{0};
    std::atomic<std::uint64_t> killed_{0};
};

} // namespace chr

#endif

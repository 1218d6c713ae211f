#ifndef CHR_ENGINE_PAR_HPP
#define CHR_ENGINE_PAR_HPP

#include <atomic>
#include <map>
#include <optional>

#include "chr/match.hpp"
#include "chr/runtime.hpp"

namespace chr {

struct ParConfig {
    std::size_t workers = 2;
    GoalOrder default_order = GoalOrder::Stack;
    /// Per-predicate overrides (merge sort stacks "->" and queues "=>").
    std::map<std::string, GoalOrder> order_overrides;
    bool candidate_rotation = true;
    std::uint64_t fuel = kDefaultFuel;
    bool record_trace = true;
};

/// Atomic rule-head verification. Reserves the removed ids exclusively in
/// ascending id order, pins the kept ids with shared claims, verifies
/// every matched id is alive at one common instant and then kills the
/// removed ids. All-or-nothing: on failure no liveness changes.
bool arv_commit(Store& store, const Delta& d);

/// Engine-internal variant: assigns the commit sequence number while the
/// claims are held, so commit order is a valid serialization order.
std::optional<std::uint64_t> arv_commit_seq(Store& store, const Delta& d,
                                            std::atomic<std::uint64_t>& seq);

/// Parallel refined engine: a bounded worker pool activates goal
/// constraints concurrently over the shared store; commits go through
/// arv_commit so no two deltas overlap on removed constraints.
FinalResult run_parallel(const Program& program,
                         const std::vector<Constraint>& goal,
                         const ParConfig& cfg);

} // namespace chr

#endif

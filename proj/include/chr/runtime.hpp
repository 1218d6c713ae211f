#ifndef CHR_RUNTIME_HPP
#define CHR_RUNTIME_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/eval.hpp"
#include "chr/store.hpp"

namespace chr {

/// One rule application: the identified constraints it matched, split by
/// role, plus the matching substitution and the ground body it produced.
struct Delta {
    std::string rule;
    std::vector<std::pair<ConstraintId, Constraint>> kept;    // head order
    std::vector<std::pair<ConstraintId, Constraint>> removed; // head order
    Bindings bindings;
    std::vector<Constraint> added; // ground user constraints of the body

    std::vector<ConstraintId> kept_ids() const;
    std::vector<ConstraintId> removed_ids() const;
};

/// Trace record: a delta plus its position in the run. Parallel runs add
/// the worker and a global commit sequence number.
struct TraceEntry {
    std::uint64_t step = 0;
    Delta delta;
    int worker = -1;
    std::uint64_t commit_seq = 0;

    std::string str() const;
};

enum class GoalOrder { Stack, Queue };

struct FinalResult {
    std::vector<Constraint> alive; // sorted structurally
    std::vector<TraceEntry> trace;
    std::uint64_t steps = 0;
};

inline constexpr std::uint64_t kDefaultFuel = 10'000'000;

std::string format_multiset(const std::vector<Constraint>& cs);
/// Order-insensitive structural hash of a result multiset.
std::uint64_t result_hash(const std::vector<Constraint>& cs);

} // namespace chr

#endif

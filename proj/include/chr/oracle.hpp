#ifndef CHR_ORACLE_HPP
#define CHR_ORACLE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/eval.hpp"
#include "chr/runtime.hpp"

namespace chr::oracle {

/// Abstract state: multiset of ground user constraints, kept sorted.
using Multiset = std::vector<Constraint>;

Multiset make_multiset(std::vector<Constraint> cs);
Multiset multiset_union(const Multiset& a, const Multiset& b);
/// a minus b; every element of b must be present in a.
std::optional<Multiset> multiset_minus(const Multiset& a, const Multiset& b);
bool multiset_contains(const Multiset& a, const Multiset& b);
/// Distinct constraints of a multiset (its support set).
std::set<Constraint> support(const Multiset& s);

/// One rule application instance found by exhaustive search.
struct Instance {
    std::size_t rule_index = 0;
    std::string rule;
    Bindings bindings;
    std::vector<Constraint> kept;    // ground, head order
    std::vector<Constraint> removed; // ground, head order
    std::vector<Constraint> added;   // ground user body

    /// Identity of the instance up to which duplicate copy was matched.
    std::string key() const;
};

/// Every injective head matching with satisfied guard, deduplicated by
/// instance key. Propagation rules are enumerated like any other; history
/// is handled by the reachability search below.
std::vector<Instance> applicable(const Program& p, const Multiset& s);

/// Apply one instance to a state.
Multiset apply_instance(const Multiset& s, const Instance& inst);

struct FinalsResult {
    std::set<Multiset> finals;
    bool complete = true; // false when the state budget ran out
};

/// Exhaustive search over all Apply choices, with per-copy propagation
/// histories. `max_states` bounds the number of distinct states explored.
FinalsResult reachable_finals(const Program& p, const Multiset& s,
                              std::size_t max_states = 10'000);

/// Replay an engine trace under the abstract Apply transition: every delta
/// must be an applicable instance at its turn and the end state must equal
/// the reported result.
bool check_serializable(const Program& p, const Multiset& initial,
                        const std::vector<TraceEntry>& trace,
                        const Multiset& reported_final);

/// Adding constraints to a state must not inhibit an applicable instance.
bool check_monotonic(const Program& p, const Multiset& s, const Instance& inst,
                     const Multiset& extension);

/// Ground overlap of two rule applications: the overlap state and its two
/// one-step successors. The overlap always involves a removed constraint
/// of at least one rule.
struct CriticalPair {
    Multiset overlap_state;
    Multiset succ1;
    Multiset succ2;
    std::string rule1;
    std::string rule2;
};

/// Enumerate critical pairs over all ground instantiations of rule-head
/// variables drawn from the given finite domain. Pairs whose successors
/// already coincide are not critical and are skipped; duplicates (same
/// state and successor set) are merged.
std::vector<CriticalPair> critical_pairs(const Program& p,
                                         const std::vector<Term>& domain);

enum class Joinability { Yes, No, Unknown };

Joinability joinable(const Program& p, const CriticalPair& cp,
                     std::size_t max_states = 10'000);

} // namespace chr::oracle

#endif

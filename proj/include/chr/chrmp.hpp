#ifndef CHR_CHRMP_HPP
#define CHR_CHRMP_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/eval.hpp"

namespace chr::mp {

/// Set-based state: ground user constraints without duplicates.
using SetState = std::set<Constraint>;

SetState make_set(const std::vector<Constraint>& goal);

struct MpInstance {
    std::size_t rule_index = 0;
    std::string rule;
    Bindings bindings;
    std::vector<Constraint> kept;    // ground, head order
    std::vector<Constraint> removed; // ground, head order
    std::vector<Constraint> added;
};

using InstanceSet = std::vector<MpInstance>;

/// All rule applications possible in a state: injective matchings over
/// distinct set elements with satisfied guards.
InstanceSet collect_instances(const Program& p, const SetState& s);

/// Apply a subset of collected instances at once: remove the union of
/// removed heads, add the union of body constraints.
SetState massive_step(const SetState& s, const InstanceSet& r_sub);

/// Kept-to-removed dependency pairs over a state's instance set.
using DeletionRelation = std::set<std::pair<Constraint, Constraint>>;

DeletionRelation deletion_dependency(const SetState& s, const InstanceSet& r);
bool is_acyclic_step(const DeletionRelation& rel);

enum class MpPolicy { Exhaustive, RandomSubset };

struct MpOptions {
    MpPolicy policy = MpPolicy::Exhaustive;
    std::uint64_t seed = 0;
    std::uint64_t max_steps = 100'000;
};

struct MpResult {
    SetState final_state;
    std::uint64_t steps = 0;
    std::vector<bool> step_acyclic; // per applied step
    bool all_acyclic = true;
};

MpResult run_mp(const Program& p, const std::vector<Constraint>& goal,
                const MpOptions& opts = {});

/// Prepend one set-rule c(X1..Xn) \ c(X1..Xn) <=> true per user predicate.
/// Idempotent: predicates that already have their set-rule are skipped.
Program add_set_rules(const Program& p);

/// Predicate-level deletion graph: conservative static acyclicity lint.
/// Edge p -> q when some rule keeps a p-constraint and removes a q-constraint.
std::vector<Diagnostic> static_acyclicity_lint(const Program& p);

} // namespace chr::mp

#endif

#ifndef CHR_MATCH_HPP
#define CHR_MATCH_HPP

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chr/ast.hpp"
#include "chr/runtime.hpp"
#include "chr/store.hpp"

namespace chr {

/// Applied propagation-rule instances: (rule name, matched ids in head order).
using PropagationHistory =
    std::set<std::pair<std::string, std::vector<ConstraintId>>>;

struct MatchOptions {
    /// Candidate iteration starts at an offset derived from this value so
    /// concurrent workers walk the store in different orders.
    std::size_t rotation = 0;
    /// Fresh propagation instances only, when set.
    const PropagationHistory* history = nullptr;
    /// Pre-seeded bindings (location variables for localized matching).
    const Bindings* seed = nullptr;
};

/// Try to complete a rule head around one active constraint matched at the
/// given head position. Seeks partners in the store with join ordering
/// (most bound variables first, indexed lookup on a ground argument) and
/// evaluates guard conjuncts as soon as their variables are bound.
/// Returns the matched delta or nothing; Delta::added stays empty.
std::optional<Delta> match_occurrence(const Rule& rule, std::size_t occ_pos,
                                      const Store& store, ConstraintId active_id,
                                      const Constraint& active_payload,
                                      const MatchOptions& opts = {});

/// Ground instances of the rule body under a matching substitution.
/// User constraints are normalized; built-ins are returned as written.
std::vector<Constraint> instantiate_body(const Rule& rule, const Bindings& b);

} // namespace chr

#endif

#ifndef CHR_CHRT_HPP
#define CHR_CHRT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/oracle.hpp"
#include "chr/runtime.hpp"

namespace chr::chrt {

enum class TxnStatus { Pending, Committed, RolledBack, Stuck };

struct Transaction {
    std::vector<Constraint> body; // operation + data constraints
    TxnStatus status = TxnStatus::Pending;
    int retries = 0;
};

struct ChrtOptions {
    int max_retries = 16;
    std::uint64_t fuel = kDefaultFuel;
    bool parallel = false; // one thread per transaction when set
};

struct ChrtResult {
    std::vector<Constraint> alive; // final data (and residual) constraints
    std::vector<Transaction> transactions;
    std::uint64_t steps = 0;
};

/// Execute a goal containing atomic(...) transactions over the shared data
/// constraints. Each transaction runs on a snapshot; on success its data
/// effects are validated and merged, a transaction left with operation
/// constraints is rolled back and reported stuck. Constraints outside any
/// wrapper execute directly on the shared state first.
ChrtResult run_chrt(const Program& p, const std::vector<Constraint>& goal,
                    const ChrtOptions& opts = {});

/// The atomic(op(...)) <=> op(...) entry rule for one operation predicate.
Rule make_atomic_entry(const Program& p, const std::string& op_symbol,
                       std::size_t arity);

/// Unfold a transaction entry rule until its body is operation-free:
/// every body operation constraint is replaced by each rule defining it,
/// merging that rule's remaining heads and guard. Throws NotBoundedError
/// when operation constraints persist at the nesting bound.
std::vector<Rule> unfold_bounded(const Program& p, const Rule& txn_rule,
                                 std::size_t bound);

/// Erasure lint: wrappers of a chrt program are erasable when the bounded
/// critical-pair check over the given domain finds no non-joinable pair.
bool wrappers_erasable(const Program& p, const std::vector<Term>& domain,
                       std::size_t max_states = 10'000);

bool is_operation(const Program& p, const Constraint& c);
bool is_data(const Program& p, const Constraint& c);

} // namespace chr::chrt

#endif

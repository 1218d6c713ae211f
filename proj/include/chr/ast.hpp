#ifndef CHR_AST_HPP
#define CHR_AST_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chr/term.hpp"

namespace chr {

enum class ConstraintKind { User, Builtin };

/// A user-defined or built-in constraint. For the distributed dialect a
/// constraint may carry a location annotation [l]c.
struct Constraint {
    ConstraintKind kind = ConstraintKind::User;
    std::string symbol;
    std::vector<Term> args;
    std::optional<Term> location;

    std::size_t arity() const { return args.size(); }
    bool is_builtin() const { return kind == ConstraintKind::Builtin; }
    bool is_ground() const;
    void collect_vars(std::vector<std::string>& out) const;

    bool operator==(const Constraint& other) const;
    bool operator!=(const Constraint& other) const { return !(*this == other); }
    bool operator<(const Constraint& other) const;

    std::size_t hash() const;
    std::string str() const;
};

Constraint user_constraint(std::string symbol, std::vector<Term> args = {});
Constraint builtin_constraint(std::string symbol, std::vector<Term> args = {});

/// Reify a user constraint as a term and back; used by the atomic(...)
/// goal wrapper whose arguments are constraints written as terms.
Term reify(const Constraint& c);
Constraint unreify(const Term& t);

enum class RuleKind { Simplification, Propagation, Simpagation };

struct Rule {
    std::string name;
    std::vector<Constraint> kept;
    std::vector<Constraint> removed;
    std::vector<Constraint> guard;
    std::vector<Constraint> body;
    RuleKind kind = RuleKind::Simplification;

    /// For each guard conjunct, the variable it binds (V =:= Expr or
    /// V = Term with V fresh at that point), or empty when it is a test.
    /// Filled in by analysis; see bind_guard_binders().
    std::vector<std::string> guard_binders;

    std::size_t head_count() const { return kept.size() + removed.size(); }
    /// Head constraint by position: kept first, then removed.
    const Constraint& head_at(std::size_t pos) const;
    bool head_is_kept(std::size_t pos) const { return pos < kept.size(); }

    std::string str() const;
};

RuleKind classify_rule(const Rule& r);

enum class Dialect { Plain, Chrt, Chre };

using PredKey = std::pair<std::string, std::size_t>; // symbol, arity

struct Program {
    std::vector<Rule> rules;
    std::map<std::string, std::int64_t> constants;
    std::set<PredKey> data_preds;
    std::set<PredKey> op_preds;
    Dialect dialect = Dialect::Plain;

    const Rule* find_rule(const std::string& name) const;
    /// Every user predicate occurring in heads or bodies.
    std::set<PredKey> user_predicates() const;
    std::string str() const;
};

/// One head position an active constraint of a given predicate may try:
/// rule index plus position within that rule's head (kept-first order).
struct Occurrence {
    std::size_t rule_index;
    std::size_t head_pos;
};

/// Occurrences per predicate in program order, positions left to right.
class OccurrenceTable {
public:
    explicit OccurrenceTable(const Program& p);
    const std::vector<Occurrence>& for_predicate(const std::string& symbol,
                                                 std::size_t arity) const;

private:
    std::map<PredKey, std::vector<Occurrence>> table_;
    std::vector<Occurrence> empty_;
};

enum class Severity { Error, Info };

struct Diagnostic {
    Severity severity = Severity::Error;
    std::string rule;
    std::string message;

    std::string str() const;
};

bool has_errors(const std::vector<Diagnostic>& diags);

enum class EngineKind { Seq, Par, Mp, Chrt, Chre };

/// Guard symbols, arithmetic functors and the goal-only meta wrapper.
bool is_builtin_symbol(const std::string& symbol, std::size_t arity);
bool is_arith_functor(const std::string& symbol, std::size_t arity);
inline constexpr const char* kAtomicSymbol = "atomic";

struct ConstraintHash {
    std::size_t operator()(const Constraint& c) const { return c.hash(); }
};

} // namespace chr

#endif

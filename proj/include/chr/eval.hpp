#ifndef CHR_EVAL_HPP
#define CHR_EVAL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "chr/ast.hpp"
#include "chr/errors.hpp"

namespace chr {

/// Matching substitution: variable name to ground term.
class Bindings {
public:
    const Term* lookup(const std::string& var) const;
    void bind(const std::string& var, Term value);
    bool contains(const std::string& var) const { return lookup(var) != nullptr; }
    std::size_t size() const { return map_.size(); }
    const std::map<std::string, Term>& map() const { return map_; }
    std::string str() const;

private:
    std::map<std::string, Term> map_;
};

/// Apply bindings to a term; remaining variables are left in place.
Term substitute(const Term& t, const Bindings& b);

/// Substitute and fold arithmetic subterms whose arguments are integers.
/// Division by zero and signed overflow raise EvalError.
Term normalize(const Term& t, const Bindings& b);

/// Strict arithmetic evaluation to a 64-bit integer.
std::int64_t eval_expr(const Term& t, const Bindings& b);

/// Evaluate one built-in guard constraint. A conjunct statically marked
/// as a binder (V =:= Expr or V = Term with V unbound) extends the
/// bindings instead of testing. Returns the test result.
bool eval_guard(const Constraint& g, Bindings& b);

/// One-way matching of a pattern term against a ground term, extending b.
bool match_term(const Term& pattern, const Term& ground, Bindings& b);
bool match_constraint(const Constraint& pattern, const Constraint& ground,
                      Bindings& b);

/// First-order unification of two pattern terms (used by rule unfolding).
/// The result maps variables of both sides; occurs check included.
std::optional<Bindings> unify(const Term& a, const Term& b);
bool unify_into(const Term& a, const Term& b, Bindings& out);

} // namespace chr

#endif

#ifndef CHR_TERM_HPP
#define CHR_TERM_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace chr {

/// First-order term. At run time every term in a store is ground;
/// variables occur only inside rule patterns.
class Term {
public:
    enum class Kind { Var, Int, Atom, Compound };

    Term() : kind_(Kind::Atom), name_("[]") {}

    static Term var(std::string name);
    static Term integer(std::int64_t v);
    static Term atom(std::string name);
    static Term compound(std::string functor, std::vector<Term> args);
    /// Proper list [e1,...,en|tail]; tail defaults to the empty list atom.
    static Term list(std::vector<Term> elems, Term tail = Term());

    Kind kind() const { return kind_; }
    bool is_var() const { return kind_ == Kind::Var; }
    bool is_int() const { return kind_ == Kind::Int; }
    bool is_atom() const { return kind_ == Kind::Atom; }
    bool is_compound() const { return kind_ == Kind::Compound; }

    const std::string& name() const { return name_; }   // Var/Atom/functor
    std::int64_t value() const { return value_; }       // Int only
    const std::vector<Term>& args() const { return args_; }
    std::size_t arity() const { return args_.size(); }

    bool is_ground() const;
    void collect_vars(std::vector<std::string>& out) const;

    bool operator==(const Term& other) const;
    bool operator!=(const Term& other) const { return !(*this == other); }
    /// Total structural order: Int < Atom < Compound < Var.
    bool operator<(const Term& other) const;

    std::size_t hash() const;
    std::string str() const;

private:
    Kind kind_;
    std::string name_;
    std::int64_t value_ = 0;
    std::vector<Term> args_;
};

/// The list constructor "." and nil "[]" used by the bracket sugar.
bool is_nil(const Term& t);
bool is_cons(const Term& t);

std::string to_string(const Term& t);

struct TermHash {
    std::size_t operator()(const Term& t) const { return t.hash(); }
};

} // namespace chr

#endif

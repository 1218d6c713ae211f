#include "chr/term.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace chr {

Term Term::var(std::string name) {
    Term t;
    t.kind_ = Kind::Var;
    t.name_ = std::move(name);
    return t;
}

Term Term::integer(std::int64_t v) {
    Term t;
    t.kind_ = Kind::Int;
    t.name_.clear();
    t.value_ = v;
    return t;
}

Term Term::atom(std::string name) {
    Term t;
    t.kind_ = Kind::Atom;
    t.name_ = std::move(name);
    return t;
}

Term Term::compound(std::string functor, std::vector<Term> args) {
    if (args.empty())
        return atom(std::move(functor));
    Term t;
    t.kind_ = Kind::Compound;
    t.name_ = std::move(functor);
    t.args_ = std::move(args);
    return t;
}

Term Term::list(std::vector<Term> elems, Term tail) {
    Term acc = std::move(tail);
    for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        acc = compound(".", {std::move(*it), std::move(acc)});
    return acc;
}

bool Term::is_ground() const {
    if (kind_ == Kind::Var)
        return false;
    for (const auto& a : args_)
        if (!a.is_ground())
            return false;
    return true;
}

void Term::collect_vars(std::vector<std::string>& out) const {
    if (kind_ == Kind::Var) {
        if (std::find(out.begin(), out.end(), name_) == out.end())
            out.push_back(name_);
        return;
    }
    for (const auto& a : args_)
        a.collect_vars(out);
}

bool Term::operator==(const Term& other) const {
    if (kind_ != other.kind_)
        return false;
    switch (kind_) {
        case Kind::Var:
        case Kind::Atom: return name_ == other.name_;
        case Kind::Int: return value_ == other.value_;
        case Kind::Compound:
            return name_ == other.name_ && args_ == other.args_;
    }
    return false;
}

static int kind_rank(Term::Kind k) {
    switch (k) {
        case Term::Kind::Int: return 0;
        case Term::Kind::Atom: return 1;
        case Term::Kind::Compound: return 2;
        case Term::Kind::Var: return 3;
    }
    return 4;
}

bool Term::operator<(const Term& other) const {
    if (kind_ != other.kind_)
        return kind_rank(kind_) < kind_rank(other.kind_);
    switch (kind_) {
        case Kind::Int: return value_ < other.value_;
        case Kind::Var:
        case Kind::Atom: return name_ < other.name_;
        case Kind::Compound:
            if (name_ != other.name_)
                return name_ < other.name_;
            if (args_.size() != other.args_.size())
                return args_.size() < other.args_.size();
            return std::lexicographical_compare(args_.begin(), args_.end(),
                                                other.args_.begin(), other.args_.end());
    }
    return false;
}

std::size_t Term::hash() const {
    std::size_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::size_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(static_cast<std::size_t>(kind_rank(kind_)));
    switch (kind_) {
        case Kind::Int: mix(static_cast<std::size_t>(value_)); break;
        case Kind::Var:
        case Kind::Atom: mix(std::hash<std::string>{}(name_)); break;
        case Kind::Compound:
            mix(std::hash<std::string>{}(name_));
            mix(args_.size());
            for (const auto& a : args_)
                mix(a.hash());
            break;
    }
    return h;
}

bool is_nil(const Term& t) { return t.is_atom() && t.name() == "[]"; }

bool is_cons(const Term& t) {
    return t.is_compound() && t.name() == "." && t.arity() == 2;
}

namespace {

// Printing precedence; higher binds tighter. Mirrors the expression grammar.
int functor_prec(const std::string& f, std::size_t arity) {
    if (arity == 2) {
        if (f == "+" || f == "-") return 1;
        if (f == "*" || f == "//" || f == "mod") return 2;
    }
    if (arity == 1 && f == "-") return 3;
    return 0; // not an operator
}

void print_term(std::ostringstream& os, const Term& t, int parent_prec);

void print_list(std::ostringstream& os, const Term& t) {
    os << '[';
    const Term* cur = &t;
    bool first = true;
    while (is_cons(*cur)) {
        if (!first)
            os << ',';
        print_term(os, cur->args()[0], 0);
        first = false;
        cur = &cur->args()[1];
    }
    if (!is_nil(*cur)) {
        os << '|';
        print_term(os, *cur, 0);
    }
    os << ']';
}

void print_term(std::ostringstream& os, const Term& t, int parent_prec) {
    switch (t.kind()) {
        case Term::Kind::Var:
        case Term::Kind::Atom:
            os << (t.name().empty() ? "''" : t.name());
            return;
        case Term::Kind::Int:
            os << t.value();
            return;
        case Term::Kind::Compound: {
            if (is_cons(t)) {
                print_list(os, t);
                return;
            }
            int prec = functor_prec(t.name(), t.arity());
            if (prec > 0 && t.arity() == 2) {
                bool paren = parent_prec >= prec;
                if (paren) os << '(';
                print_term(os, t.args()[0], prec - 1);
                os << t.name();
                print_term(os, t.args()[1], prec);
                if (paren) os << ')';
                return;
            }
            if (prec > 0 && t.arity() == 1) {
                os << '-';
                print_term(os, t.args()[0], prec);
                return;
            }
            os << t.name() << '(';
            for (std::size_t i = 0; i < t.arity(); ++i) {
                if (i) os << ',';
                print_term(os, t.args()[i], 0);
            }
            os << ')';
            return;
        }
    }
}

} // namespace

std::string Term::str() const {
    std::ostringstream os;
    print_term(os, *this, 0);
    return os.str();
}

std::string to_string(const Term& t) { return t.str(); }

} // namespace chr

#include "chr/eval.hpp"

#include <sstream>

namespace chr {

const Term* Bindings::lookup(const std::string& var) const {
    auto it = map_.find(var);
    return it == map_.end() ? nullptr : &it->second;
}

void Bindings::bind(const std::string& var, Term value) {
    map_[var] = std::move(value);
}

std::string Bindings::str() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : map_) {
        if (!first)
            os << ",";
        os << k << "=" << v.str();
        first = false;
    }
    return os.str();
}

Term substitute(const Term& t, const Bindings& b) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            const Term* bound = b.lookup(t.name());
            return bound ? *bound : t;
        }
        case Term::Kind::Int:
        case Term::Kind::Atom:
            return t;
        case Term::Kind::Compound: {
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const auto& a : t.args())
                args.push_back(substitute(a, b));
            return Term::compound(t.name(), std::move(args));
        }
    }
    return t;
}

namespace {

std::int64_t checked_arith(const std::string& op, std::int64_t x, std::int64_t y) {
    std::int64_t r = 0;
    if (op == "+") {
        if (__builtin_add_overflow(x, y, &r))
            throw EvalError("integer overflow in " + std::to_string(x) + "+" +
                            std::to_string(y));
        return r;
    }
    if (op == "-") {
        if (__builtin_sub_overflow(x, y, &r))
            throw EvalError("integer overflow in " + std::to_string(x) + "-" +
                            std::to_string(y));
        return r;
    }
    if (op == "*") {
        if (__builtin_mul_overflow(x, y, &r))
            throw EvalError("integer overflow in " + std::to_string(x) + "*" +
                            std::to_string(y));
        return r;
    }
    if (op == "//") {
        if (y == 0)
            throw EvalError("division by zero");
        if (x == INT64_MIN && y == -1)
            throw EvalError("integer overflow in division");
        // Floor division, pairing with the floored mod below.
        std::int64_t q = x / y;
        if ((x % y != 0) && ((x < 0) != (y < 0)))
            --q;
        return q;
    }
    if (op == "mod") {
        if (y == 0)
            throw EvalError("modulo by zero");
        if (x == INT64_MIN && y == -1)
            return 0;
        std::int64_t m = x % y;
        if (m != 0 && ((m < 0) != (y < 0)))
            m += y;
        return m;
    }
    if (op == "min")
        return x < y ? x : y;
    if (op == "max")
        return x > y ? x : y;
    throw EvalError("unknown arithmetic operator " + op);
}

} // namespace

std::int64_t eval_expr(const Term& t, const Bindings& b) {
    switch (t.kind()) {
        case Term::Kind::Int:
            return t.value();
        case Term::Kind::Var: {
            const Term* bound = b.lookup(t.name());
            if (!bound)
                throw EvalError("unbound variable " + t.name());
            return eval_expr(*bound, b);
        }
        case Term::Kind::Atom:
            throw EvalError("non-numeric atom '" + t.name() + "' in arithmetic");
        case Term::Kind::Compound: {
            if (t.name() == "-" && t.arity() == 1)
                return checked_arith("-", 0, eval_expr(t.args()[0], b));
            if (is_arith_functor(t.name(), t.arity()))
                return checked_arith(t.name(), eval_expr(t.args()[0], b),
                                     eval_expr(t.args()[1], b));
            throw EvalError("non-arithmetic term " + t.str() + " in arithmetic");
        }
    }
    throw EvalError("unevaluable term");
}

Term normalize(const Term& t, const Bindings& b) {
    switch (t.kind()) {
        case Term::Kind::Var: {
            const Term* bound = b.lookup(t.name());
            return bound ? *bound : t;
        }
        case Term::Kind::Int:
        case Term::Kind::Atom:
            return t;
        case Term::Kind::Compound: {
            std::vector<Term> args;
            args.reserve(t.arity());
            bool all_int = true;
            for (const auto& a : t.args()) {
                args.push_back(normalize(a, b));
                all_int = all_int && args.back().is_int();
            }
            if (all_int && is_arith_functor(t.name(), t.arity())) {
                if (t.arity() == 1)
                    return Term::integer(checked_arith("-", 0, args[0].value()));
                return Term::integer(
                    checked_arith(t.name(), args[0].value(), args[1].value()));
            }
            return Term::compound(t.name(), std::move(args));
        }
    }
    return t;
}

namespace {

bool term_member(const Term& x, const Term& list) {
    const Term* cur = &list;
    while (is_cons(*cur)) {
        if (cur->args()[0] == x)
            return true;
        cur = &cur->args()[1];
    }
    return false;
}

} // namespace

bool eval_guard(const Constraint& g, Bindings& b) {
    if (!g.is_builtin())
        throw EvalError("not a built-in constraint: " + g.str());
    const std::string& s = g.symbol;
    if (s == "true")
        return true;
    if (g.arity() != 2)
        throw EvalError("built-in " + s + " expects two arguments");
    const Term& lhs = g.args[0];
    const Term& rhs = g.args[1];

    if (s == "=:=" || s == "=") {
        // Binder case: a left-hand variable still unbound here.
        if (lhs.is_var() && !b.contains(lhs.name())) {
            Term value = s == "=:=" ? Term::integer(eval_expr(rhs, b))
                                    : normalize(rhs, b);
            if (!value.is_ground())
                throw EvalError("binding " + lhs.name() +
                                " to non-ground term " + value.str());
            b.bind(lhs.name(), std::move(value));
            return true;
        }
        if (s == "=:=")
            return eval_expr(lhs, b) == eval_expr(rhs, b);
        return normalize(lhs, b) == normalize(rhs, b);
    }
    if (s == "==")
        return normalize(lhs, b) == normalize(rhs, b);
    if (s == "\\==")
        return normalize(lhs, b) != normalize(rhs, b);
    if (s == "=\\=")
        return eval_expr(lhs, b) != eval_expr(rhs, b);
    if (s == "<")
        return eval_expr(lhs, b) < eval_expr(rhs, b);
    if (s == "=<")
        return eval_expr(lhs, b) <= eval_expr(rhs, b);
    if (s == ">")
        return eval_expr(lhs, b) > eval_expr(rhs, b);
    if (s == ">=")
        return eval_expr(lhs, b) >= eval_expr(rhs, b);
    if (s == "in") {
        Term x = normalize(lhs, b);
        Term list = normalize(rhs, b);
        if (!x.is_ground() || !list.is_ground())
            throw EvalError("non-ground membership test " + g.str());
        return term_member(x, list);
    }
    throw EvalError("unknown built-in " + s);
}

bool match_term(const Term& pattern, const Term& ground, Bindings& b) {
    switch (pattern.kind()) {
        case Term::Kind::Var: {
            const Term* bound = b.lookup(pattern.name());
            if (bound)
                return *bound == ground;
            b.bind(pattern.name(), ground);
            return true;
        }
        case Term::Kind::Int:
            return ground.is_int() && ground.value() == pattern.value();
        case Term::Kind::Atom:
            return ground.is_atom() && ground.name() == pattern.name();
        case Term::Kind::Compound: {
            if (!ground.is_compound() || ground.name() != pattern.name() ||
                ground.arity() != pattern.arity())
                return false;
            for (std::size_t i = 0; i < pattern.arity(); ++i)
                if (!match_term(pattern.args()[i], ground.args()[i], b))
                    return false;
            return true;
        }
    }
    return false;
}

bool match_constraint(const Constraint& pattern, const Constraint& ground,
                      Bindings& b) {
    if (pattern.symbol != ground.symbol || pattern.arity() != ground.arity())
        return false;
    for (std::size_t i = 0; i < pattern.arity(); ++i)
        if (!match_term(pattern.args[i], ground.args[i], b))
            return false;
    return true;
}

namespace {

bool occurs(const std::string& var, const Term& t, const Bindings& b) {
    if (t.is_var()) {
        if (t.name() == var)
            return true;
        const Term* bound = b.lookup(t.name());
        return bound && occurs(var, *bound, b);
    }
    for (const auto& a : t.args())
        if (occurs(var, a, b))
            return true;
    return false;
}

Term walk(const Term& t, const Bindings& b) {
    const Term* cur = &t;
    while (cur->is_var()) {
        const Term* bound = b.lookup(cur->name());
        if (!bound)
            break;
        cur = bound;
    }
    return *cur;
}

} // namespace

bool unify_into(const Term& a, const Term& b, Bindings& out) {
    Term x = walk(a, out);
    Term y = walk(b, out);
    if (x.is_var() && y.is_var() && x.name() == y.name())
        return true;
    if (x.is_var()) {
        if (occurs(x.name(), y, out))
            return false;
        out.bind(x.name(), y);
        return true;
    }
    if (y.is_var()) {
        if (occurs(y.name(), x, out))
            return false;
        out.bind(y.name(), x);
        return true;
    }
    if (x.kind() != y.kind())
        return false;
    if (x.is_int())
        return x.value() == y.value();
    if (x.is_atom())
        return x.name() == y.name();
    if (x.name() != y.name() || x.arity() != y.arity())
        return false;
    for (std::size_t i = 0; i < x.arity(); ++i)
        if (!unify_into(x.args()[i], y.args()[i], out))
            return false;
    return true;
}

std::optional<Bindings> unify(const Term& a, const Term& b) {
    Bindings out;
    if (unify_into(a, b, out))
        return out;
    return std::nullopt;
}

} // namespace chr

#include "chr/ast.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace chr {

bool Constraint::is_ground() const {
    if (location && !location->is_ground())
        return false;
    for (const auto& a : args)
        if (!a.is_ground())
            return false;
    return true;
}

void Constraint::collect_vars(std::vector<std::string>& out) const {
    if (location)
        location->collect_vars(out);
    for (const auto& a : args)
        a.collect_vars(out);
}

bool Constraint::operator==(const Constraint& other) const {
    return kind == other.kind && symbol == other.symbol && args == other.args &&
           location == other.location;
}

bool Constraint::operator<(const Constraint& other) const {
    if (kind != other.kind)
        return kind < other.kind;
    if (symbol != other.symbol)
        return symbol < other.symbol;
    if (args.size() != other.args.size())
        return args.size() < other.args.size();
    if (args != other.args)
        return std::lexicographical_compare(args.begin(), args.end(),
                                            other.args.begin(), other.args.end());
    if (location.has_value() != other.location.has_value())
        return !location.has_value();
    if (location && *location != *other.location)
        return *location < *other.location;
    return false;
}

std::size_t Constraint::hash() const {
    std::size_t h = std::hash<std::string>{}(symbol);
    auto mix = [&h](std::size_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    };
    mix(kind == ConstraintKind::User ? 1 : 2);
    mix(args.size());
    for (const auto& a : args)
        mix(a.hash());
    if (location)
        mix(location->hash());
    return h;
}

namespace {

// Symbols printed between their two arguments.
bool infix_constraint(const std::string& s) {
    return s == "->" || s == "=>" || s == "<" || s == "=<" || s == ">" ||
           s == ">=" || s == "=:=" || s == "=\\=" || s == "==" || s == "\\==" ||
           s == "=" || s == "in";
}

} // namespace

std::string Constraint::str() const {
    std::ostringstream os;
    if (location)
        os << '[' << location->str() << ']';
    if (args.size() == 2 && infix_constraint(symbol)) {
        os << args[0].str();
        os << (symbol == "in" ? " in " : symbol);
        os << args[1].str();
        return os.str();
    }
    os << symbol;
    if (!args.empty()) {
        os << '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i) os << ',';
            os << args[i].str();
        }
        os << ')';
    }
    return os.str();
}

Constraint user_constraint(std::string symbol, std::vector<Term> args) {
    Constraint c;
    c.kind = ConstraintKind::User;
    c.symbol = std::move(symbol);
    c.args = std::move(args);
    return c;
}

Constraint builtin_constraint(std::string symbol, std::vector<Term> args) {
    Constraint c;
    c.kind = ConstraintKind::Builtin;
    c.symbol = std::move(symbol);
    c.args = std::move(args);
    return c;
}

Term reify(const Constraint& c) {
    return Term::compound(c.symbol, c.args);
}

Constraint unreify(const Term& t) {
    if (t.is_atom())
        return user_constraint(t.name());
    if (t.is_compound())
        return user_constraint(t.name(), t.args());
    throw std::invalid_argument("cannot interpret term as constraint: " + t.str());
}

const Constraint& Rule::head_at(std::size_t pos) const {
    return pos < kept.size() ? kept[pos] : removed[pos - kept.size()];
}

RuleKind classify_rule(const Rule& r) {
    if (r.removed.empty())
        return RuleKind::Propagation;
    if (r.kept.empty())
        return RuleKind::Simplification;
    return RuleKind::Simpagation;
}

namespace {

void print_constraints(std::ostringstream& os, const std::vector<Constraint>& cs) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (i) os << ", ";
        os << cs[i].str();
    }
}

} // namespace

std::string Rule::str() const {
    std::ostringstream os;
    os << name << " : ";
    if (!kept.empty()) {
        print_constraints(os, kept);
        if (!removed.empty())
            os << " \\ ";
    }
    print_constraints(os, removed);
    os << (kind == RuleKind::Propagation ? " ==> " : " <=> ");
    if (!guard.empty()) {
        print_constraints(os, guard);
        os << " | ";
    }
    if (body.empty())
        os << "true";
    else
        print_constraints(os, body);
    os << '.';
    return os.str();
}

const Rule* Program::find_rule(const std::string& name) const {
    for (const auto& r : rules)
        if (r.name == name)
            return &r;
    return nullptr;
}

std::set<PredKey> Program::user_predicates() const {
    std::set<PredKey> preds;
    auto add = [&preds](const std::vector<Constraint>& cs) {
        for (const auto& c : cs)
            if (!c.is_builtin())
                preds.insert({c.symbol, c.arity()});
    };
    for (const auto& r : rules) {
        add(r.kept);
        add(r.removed);
        add(r.body);
    }
    return preds;
}

std::string Program::str() const {
    std::ostringstream os;
    switch (dialect) {
        case Dialect::Plain: break;
        case Dialect::Chrt: os << "#dialect chrt.\n"; break;
        case Dialect::Chre: os << "#dialect chre.\n"; break;
    }
    for (const auto& [name, value] : constants)
        os << "#const " << name << " = " << value << ".\n";
    for (const auto& [sym, arity] : data_preds)
        os << "#data " << sym << "/" << arity << ".\n";
    for (const auto& [sym, arity] : op_preds)
        os << "#operation " << sym << "/" << arity << ".\n";
    for (const auto& r : rules)
        os << r.str() << '\n';
    return os.str();
}

OccurrenceTable::OccurrenceTable(const Program& p) {
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
        const Rule& r = p.rules[ri];
        for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
            const Constraint& h = r.head_at(pos);
            table_[{h.symbol, h.arity()}].push_back({ri, pos});
        }
    }
}

const std::vector<Occurrence>& OccurrenceTable::for_predicate(
    const std::string& symbol, std::size_t arity) const {
    auto it = table_.find({symbol, arity});
    return it == table_.end() ? empty_ : it->second;
}

std::string Diagnostic::str() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "error" : "info");
    if (!rule.empty())
        os << " [" << rule << "]";
    os << ": " << message;
    return os.str();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.severity == Severity::Error;
    });
}

bool is_builtin_symbol(const std::string& symbol, std::size_t arity) {
    if (arity == 0)
        return symbol == "true";
    if (arity != 2)
        return false;
    return symbol == "<" || symbol == "=<" || symbol == ">" || symbol == ">=" ||
           symbol == "=:=" || symbol == "=\\=" || symbol == "==" ||
           symbol == "\\==" || symbol == "=" || symbol == "in";
}

bool is_arith_functor(const std::string& symbol, std::size_t arity) {
    if (arity == 2)
        return symbol == "+" || symbol == "-" || symbol == "*" ||
               symbol == "//" || symbol == "mod" || symbol == "min" ||
               symbol == "max";
    if (arity == 1)
        return symbol == "-";
    return false;
}

} // namespace chr

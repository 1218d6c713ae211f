#include "chr/parser.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace chr {

namespace {

enum class Tok {
    End, Integer, Variable, Name, Directive,
    LParen, RParen, LBracket, RBracket,
    Comma, Dot, Colon, Bar, Backslash,
    SimpArrow,   // <=>
    PropArrow,   // ==>
    Arrow,       // ->
    FatArrow,    // =>
    Plus, Minus, Star, IntDiv, Slash, Eq,
    Lt, Le, Gt, Ge, ArithEq, ArithNeq, StructEq, StructNeq,
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::End: return "end of input";
        case Tok::Integer: return "integer";
        case Tok::Variable: return "variable";
        case Tok::Name: return "name";
        case Tok::Directive: return "directive";
        case Tok::LParen: return "(";
        case Tok::RParen: return ")";
        case Tok::LBracket: return "[";
        case Tok::RBracket: return "]";
        case Tok::Comma: return ",";
        case Tok::Dot: return ".";
        case Tok::Colon: return ":";
        case Tok::Bar: return "|";
        case Tok::Backslash: return "\\";
        case Tok::SimpArrow: return "<=>";
        case Tok::PropArrow: return "==>";
        case Tok::Arrow: return "->";
        case Tok::FatArrow: return "=>";
        case Tok::Plus: return "+";
        case Tok::Minus: return "-";
        case Tok::Star: return "*";
        case Tok::IntDiv: return "//";
        case Tok::Slash: return "/";
        case Tok::Eq: return "=";
        case Tok::Lt: return "<";
        case Tok::Le: return "=<";
        case Tok::Gt: return ">";
        case Tok::Ge: return ">=";
        case Tok::ArithEq: return "=:=";
        case Tok::ArithNeq: return "=\\=";
        case Tok::StructEq: return "==";
        case Tok::StructNeq: return "\\==";
    }
    return "?";
}

struct Token {
    Tok kind;
    std::string text;
    std::int64_t value = 0;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_trivia();
        current_.line = line_;
        current_.column = col_;
        if (pos_ >= src_.size()) {
            current_.kind = Tok::End;
            current_.text.clear();
            return;
        }
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            lex_integer();
            return;
        }
        if (c == '_' || std::isalpha(static_cast<unsigned char>(c))) {
            lex_word();
            return;
        }
        lex_symbol();
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n')
                    ++pos_;
            } else if (c == '\n') {
                ++pos_;
                ++line_;
                col_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                ++col_;
            } else {
                break;
            }
        }
    }

    void take(std::size_t n) {
        pos_ += n;
        col_ += static_cast<int>(n);
    }

    void lex_integer() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
            take(1);
        current_.kind = Tok::Integer;
        current_.text = src_.substr(start, pos_ - start);
        current_.value = std::stoll(current_.text);
    }

    void lex_word() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (src_[pos_] == '_' || std::isalnum(static_cast<unsigned char>(src_[pos_]))))
            take(1);
        current_.text = src_.substr(start, pos_ - start);
        char first = current_.text[0];
        current_.kind = (first == '_' || std::isupper(static_cast<unsigned char>(first)))
                            ? Tok::Variable
                            : Tok::Name;
    }

    bool match(const char* s, Tok kind) {
        std::size_t n = std::char_traits<char>::length(s);
        if (src_.compare(pos_, n, s) == 0) {
            current_.kind = kind;
            current_.text = s;
            take(n);
            return true;
        }
        return false;
    }

    void lex_symbol() {
        // Longest match first.
        if (match("<=>", Tok::SimpArrow) || match("==>", Tok::PropArrow) ||
            match("=:=", Tok::ArithEq) || match("=\\=", Tok::ArithNeq) ||
            match("\\==", Tok::StructNeq) || match("==", Tok::StructEq) ||
            match("=<", Tok::Le) || match("=>", Tok::FatArrow) ||
            match(">=", Tok::Ge) || match("->", Tok::Arrow) ||
            match("//", Tok::IntDiv) || match("/", Tok::Slash) ||
            match("#", Tok::Directive) ||
            match("(", Tok::LParen) || match(")", Tok::RParen) ||
            match("[", Tok::LBracket) || match("]", Tok::RBracket) ||
            match(",", Tok::Comma) || match(".", Tok::Dot) ||
            match(":", Tok::Colon) || match("|", Tok::Bar) ||
            match("\\", Tok::Backslash) || match("+", Tok::Plus) ||
            match("-", Tok::Minus) || match("*", Tok::Star) ||
            match("=", Tok::Eq) || match("<", Tok::Lt) || match(">", Tok::Gt))
            return;
        throw ParseError(line_, col_, std::string("unexpected character '") +
                                          src_[pos_] + "'");
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token current_;
};

class Parser {
public:
    explicit Parser(const std::string& src) : lex_(src) {}

    Program parse_program() {
        Program p;
        while (lex_.peek().kind != Tok::End) {
            if (lex_.peek().kind == Tok::Directive) {
                lex_.next();
                parse_directive(p);
            } else {
                p.rules.push_back(parse_rule(p.rules.size()));
            }
        }
        fold_constants(p);
        for (auto& r : p.rules)
            r.kind = classify_rule(r);
        check_unique_names(p);
        return p;
    }

    std::vector<Constraint> parse_goal(bool allow_atomic) {
        std::vector<Constraint> out;
        if (lex_.peek().kind == Tok::End)
            return out;
        while (true) {
            out.push_back(parse_goal_item(allow_atomic));
            if (lex_.peek().kind != Tok::Comma)
                break;
            lex_.next();
        }
        expect(Tok::End);
        return out;
    }

    Term parse_single_term() {
        Term t = parse_expr();
        expect(Tok::End);
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) {
        throw ParseError(lex_.peek().line, lex_.peek().column, msg, std::move(expected));
    }

    Token expect(Tok kind) {
        if (lex_.peek().kind != kind)
            fail(std::string("expected ") + tok_name(kind) + ", found '" +
                     (lex_.peek().kind == Tok::End ? "<eof>" : lex_.peek().text) + "'",
                 {tok_name(kind)});
        return lex_.next();
    }

    void parse_directive(Program& p) {
        Token name = expect(Tok::Name);
        if (name.text == "const") {
            Token id = expect(Tok::Name);
            expect(Tok::Eq);
            bool neg = false;
            if (lex_.peek().kind == Tok::Minus) {
                lex_.next();
                neg = true;
            }
            Token v = expect(Tok::Integer);
            p.constants[id.text] = neg ? -v.value : v.value;
        } else if (name.text == "data" || name.text == "operation") {
            Token id = expect(Tok::Name);
            expect(Tok::Slash);
            Token a = expect(Tok::Integer);
            auto key = PredKey{id.text, static_cast<std::size_t>(a.value)};
            auto& target = name.text == "data" ? p.data_preds : p.op_preds;
            auto& other = name.text == "data" ? p.op_preds : p.data_preds;
            if (other.count(key))
                fail("predicate " + id.text + "/" + a.text +
                     " declared both data and operation");
            target.insert(key);
        } else if (name.text == "dialect") {
            Token id = expect(Tok::Name);
            if (id.text == "plain")
                p.dialect = Dialect::Plain;
            else if (id.text == "chrt")
                p.dialect = Dialect::Chrt;
            else if (id.text == "chre")
                p.dialect = Dialect::Chre;
            else
                fail("unknown dialect '" + id.text + "'",
                     {"plain", "chrt", "chre"});
        } else {
            fail("unknown directive '" + name.text + "'",
                 {"const", "data", "operation", "dialect"});
        }
        expect(Tok::Dot);
    }

    Rule parse_rule(std::size_t index) {
        Rule r;
        r.name = "r" + std::to_string(index);
        // Optional "name :" prefix needs one token of lookahead.
        if (lex_.peek().kind == Tok::Name) {
            Lexer probe = lex_;
            probe.next();
            if (probe.peek().kind == Tok::Colon) {
                r.name = lex_.next().text;
                lex_.next(); // ':'
            }
        }
        std::vector<Constraint> first = parse_constraint_list();
        if (lex_.peek().kind == Tok::Backslash) {
            lex_.next();
            r.kept = std::move(first);
            r.removed = parse_constraint_list();
            expect(Tok::SimpArrow);
        } else if (lex_.peek().kind == Tok::SimpArrow) {
            lex_.next();
            r.removed = std::move(first);
        } else if (lex_.peek().kind == Tok::PropArrow) {
            lex_.next();
            r.kept = std::move(first);
        } else {
            fail("expected rule arrow", {"\\", "<=>", "==>"});
        }
        for (const auto& h : r.kept)
            check_head(h);
        for (const auto& h : r.removed)
            check_head(h);

        std::vector<Constraint> second = parse_constraint_list();
        if (lex_.peek().kind == Tok::Bar) {
            lex_.next();
            r.guard = std::move(second);
            for (const auto& g : r.guard)
                if (!g.is_builtin())
                    fail("guard must contain built-in constraints only, found " +
                         g.str());
            r.body = parse_constraint_list();
        } else {
            r.body = std::move(second);
        }
        // "true" as the whole body stands for the empty body.
        if (r.body.size() == 1 && r.body[0].is_builtin() &&
            r.body[0].symbol == "true")
            r.body.clear();
        expect(Tok::Dot);
        if (r.kept.empty() && r.removed.empty())
            fail("rule head must be non-empty");
        return r;
    }

    void check_head(const Constraint& c) {
        if (c.is_builtin())
            fail("built-in constraint " + c.str() + " cannot occur in a rule head");
        if (c.symbol == kAtomicSymbol)
            fail("atomic(...) is only allowed in goals");
    }

    std::vector<Constraint> parse_constraint_list() {
        std::vector<Constraint> out;
        out.push_back(parse_constraint());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.next();
            out.push_back(parse_constraint());
        }
        return out;
    }

    Constraint parse_goal_item(bool allow_atomic) {
        Constraint c = parse_constraint();
        if (c.symbol == kAtomicSymbol && !c.is_builtin()) {
            if (!allow_atomic)
                fail("atomic(...) goals require the chrt dialect");
            for (const auto& a : c.args)
                unreify(a); // must denote constraints
        }
        return c;
    }

    Constraint parse_constraint() {
        std::optional<Term> location;
        if (lex_.peek().kind == Tok::LBracket) {
            // Could be a location tag [l]c or a list-valued expression.
            Lexer probe = lex_;
            if (looks_like_location(probe)) {
                lex_.next();
                location = parse_expr();
                expect(Tok::RBracket);
            }
        }
        Term lhs = parse_expr();
        Constraint c;
        switch (lex_.peek().kind) {
            case Tok::Arrow: c = finish_infix("->", lhs, ConstraintKind::User); break;
            case Tok::FatArrow: c = finish_infix("=>", lhs, ConstraintKind::User); break;
            case Tok::Lt: c = finish_infix("<", lhs, ConstraintKind::Builtin); break;
            case Tok::Le: c = finish_infix("=<", lhs, ConstraintKind::Builtin); break;
            case Tok::Gt: c = finish_infix(">", lhs, ConstraintKind::Builtin); break;
            case Tok::Ge: c = finish_infix(">=", lhs, ConstraintKind::Builtin); break;
            case Tok::ArithEq: c = finish_infix("=:=", lhs, ConstraintKind::Builtin); break;
            case Tok::ArithNeq: c = finish_infix("=\\=", lhs, ConstraintKind::Builtin); break;
            case Tok::StructEq: c = finish_infix("==", lhs, ConstraintKind::Builtin); break;
            case Tok::StructNeq: c = finish_infix("\\==", lhs, ConstraintKind::Builtin); break;
            case Tok::Eq: c = finish_infix("=", lhs, ConstraintKind::Builtin); break;
            case Tok::Name:
                if (lex_.peek().text == "in") {
                    lex_.next();
                    Term rhs = parse_expr();
                    c = builtin_constraint("in", {lhs, rhs});
                    break;
                }
                fail("unexpected name after term");
            default:
                c = plain_constraint(lhs);
                break;
        }
        c.location = location;
        return c;
    }

    Constraint finish_infix(const char* symbol, Term lhs, ConstraintKind kind) {
        lex_.next();
        Term rhs = parse_expr();
        Constraint c;
        c.kind = kind;
        c.symbol = symbol;
        c.args = {std::move(lhs), std::move(rhs)};
        return c;
    }

    Constraint plain_constraint(Term t) {
        if (t.is_atom()) {
            if (t.name() == "true")
                return builtin_constraint("true");
            return user_constraint(t.name());
        }
        if (t.is_compound() && t.name() != ".")
            return user_constraint(t.name(), t.args());
        fail("expected a constraint, found term " + t.str());
    }

    // A '[' starts a location tag only when the bracketed term is followed
    // by a constraint (name or variable), as in [X]arc(Y,D).
    static bool looks_like_location(Lexer& probe) {
        probe.next(); // '['
        int depth = 1;
        while (depth > 0) {
            Tok k = probe.peek().kind;
            if (k == Tok::End)
                return false;
            if (k == Tok::LBracket)
                ++depth;
            if (k == Tok::RBracket)
                --depth;
            probe.next();
        }
        Tok after = probe.peek().kind;
        if (after == Tok::Name)
            return probe.peek().text != "in" && probe.peek().text != "mod";
        return after == Tok::Variable;
    }

    Term parse_expr() {
        Term lhs = parse_mul();
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::Plus || k == Tok::Minus) {
                std::string op = lex_.next().text;
                Term rhs = parse_mul();
                lhs = Term::compound(op, {std::move(lhs), std::move(rhs)});
            } else {
                return lhs;
            }
        }
    }

    Term parse_mul() {
        Term lhs = parse_unary();
        while (true) {
            Tok k = lex_.peek().kind;
            if (k == Tok::Star || k == Tok::IntDiv ||
                (k == Tok::Name && lex_.peek().text == "mod")) {
                std::string op = lex_.next().text;
                Term rhs = parse_unary();
                lhs = Term::compound(op, {std::move(lhs), std::move(rhs)});
            } else {
                return lhs;
            }
        }
    }

    Term parse_unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.next();
            if (lex_.peek().kind == Tok::Integer) {
                Token v = lex_.next();
                return Term::integer(-v.value);
            }
            Term t = parse_unary();
            return Term::compound("-", {std::move(t)});
        }
        return parse_primary();
    }

    Term parse_primary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Tok::Integer: {
                Token v = lex_.next();
                return Term::integer(v.value);
            }
            case Tok::Variable: {
                Token v = lex_.next();
                if (v.text == "_")
                    return Term::var("_A" + std::to_string(anon_counter_++));
                return Term::var(v.text);
            }
            case Tok::Name: {
                Token n = lex_.next();
                if (lex_.peek().kind == Tok::LParen) {
                    lex_.next();
                    std::vector<Term> args;
                    args.push_back(parse_expr());
                    while (lex_.peek().kind == Tok::Comma) {
                        lex_.next();
                        args.push_back(parse_expr());
                    }
                    expect(Tok::RParen);
                    return Term::compound(n.text, std::move(args));
                }
                return Term::atom(n.text);
            }
            case Tok::LParen: {
                lex_.next();
                Term inner = parse_expr();
                expect(Tok::RParen);
                return inner;
            }
            case Tok::LBracket:
                return parse_list();
            default:
                fail("expected a term",
                     {"integer", "variable", "name", "(", "["});
        }
    }

    Term parse_list() {
        expect(Tok::LBracket);
        if (lex_.peek().kind == Tok::RBracket) {
            lex_.next();
            return Term::atom("[]");
        }
        std::vector<Term> elems;
        elems.push_back(parse_expr());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.next();
            elems.push_back(parse_expr());
        }
        Term tail = Term::atom("[]");
        if (lex_.peek().kind == Tok::Bar) {
            lex_.next();
            tail = parse_expr();
        }
        expect(Tok::RBracket);
        return Term::list(std::move(elems), std::move(tail));
    }

    static Term fold_term(const Term& t, const std::map<std::string, std::int64_t>& consts) {
        if (t.is_atom()) {
            auto it = consts.find(t.name());
            if (it != consts.end())
                return Term::integer(it->second);
            return t;
        }
        if (t.is_compound()) {
            std::vector<Term> args;
            args.reserve(t.arity());
            for (const auto& a : t.args())
                args.push_back(fold_term(a, consts));
            return Term::compound(t.name(), std::move(args));
        }
        return t;
    }

    static void fold_constants(Program& p) {
        if (p.constants.empty())
            return;
        auto fold_all = [&p](std::vector<Constraint>& cs) {
            for (auto& c : cs) {
                for (auto& a : c.args)
                    a = fold_term(a, p.constants);
                if (c.location)
                    c.location = fold_term(*c.location, p.constants);
            }
        };
        for (auto& r : p.rules) {
            fold_all(r.kept);
            fold_all(r.removed);
            fold_all(r.guard);
            fold_all(r.body);
        }
    }

    void check_unique_names(const Program& p) {
        std::map<std::string, int> seen;
        for (const auto& r : p.rules)
            if (++seen[r.name] > 1)
                fail("duplicate rule name '" + r.name + "'");
    }

    Lexer lex_;
    int anon_counter_ = 0;
};

} // namespace

Program parse_program(const std::string& text) {
    Parser p(text);
    return p.parse_program();
}

std::vector<Constraint> parse_goal(const std::string& text, bool allow_atomic) {
    Parser p(text);
    return p.parse_goal(allow_atomic);
}

Term parse_term(const std::string& text) {
    Parser p(text);
    return p.parse_single_term();
}

} // namespace chr

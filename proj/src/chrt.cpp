#include "chr/chrt.hpp"

#include <algorithm>
#include <future>
#include <mutex>

#include "chr/analysis.hpp"
#include "chr/engine_seq.hpp"
#include "chr/errors.hpp"

namespace chr::chrt {

bool is_operation(const Program& p, const Constraint& c) {
    return p.op_preds.count({c.symbol, c.arity()}) != 0;
}

bool is_data(const Program& p, const Constraint& c) {
    return p.data_preds.count({c.symbol, c.arity()}) != 0;
}

namespace {

using oracle::Multiset;

struct TxnOutcome {
    bool stuck = false;
    Multiset reads_removed; // snapshot constraints the run consumed
    Multiset added;         // fresh data constraints it produced
    std::uint64_t steps = 0;
};

// Run one transaction body against a snapshot of the shared data store.
// The snapshot is seeded directly into the store; transaction constraints
// enter through the goal and drive all rule firings.
TxnOutcome run_on_snapshot(const SeqEngine& engine, const Multiset& snapshot,
                           const std::vector<Constraint>& body) {
    ExecState st;
    for (const auto& c : snapshot)
        st.store.insert(c);
    std::vector<std::pair<ConstraintId, Constraint>> seeded = st.store.alive_entries();
    engine.seed(st, body);
    engine.run_state(st);

    TxnOutcome out;
    out.steps = st.steps;
    std::vector<Constraint> consumed;
    for (const auto& [id, c] : seeded)
        if (!st.store.alive(id))
            consumed.push_back(c);
    out.reads_removed = oracle::make_multiset(std::move(consumed));
    std::vector<Constraint> added;
    for (const auto& [id, c] : st.store.alive_entries()) {
        bool was_seeded =
            std::any_of(seeded.begin(), seeded.end(),
                        [id = id](const auto& e) { return e.first == id; });
        if (was_seeded)
            continue;
        if (is_operation(engine.program(), c)) {
            out.stuck = true;
            continue;
        }
        added.push_back(c);
    }
    out.added = oracle::make_multiset(std::move(added));
    return out;
}

} // namespace

ChrtResult run_chrt(const Program& p, const std::vector<Constraint>& goal,
                    const ChrtOptions& opts) {
    auto diags = check_fragment(p, EngineKind::Chrt);
    if (has_errors(diags))
        throw std::invalid_argument("not a valid chrt program: " +
                                    diags.front().str());

    std::vector<Constraint> ambient;
    std::vector<Transaction> txns;
    for (const auto& c : goal) {
        if (!c.is_builtin() && c.symbol == kAtomicSymbol) {
            Transaction t;
            for (const auto& arg : c.args)
                t.body.push_back(unreify(arg));
            txns.push_back(std::move(t));
        } else {
            ambient.push_back(c);
        }
    }

    ChrtResult result;
    SeqOptions seq_opts;
    seq_opts.fuel = opts.fuel;
    seq_opts.record_trace = false;
    SeqEngine engine(p, seq_opts);

    // Unwrapped goal constraints run directly on the shared state; their
    // leftovers stay visible (a stuck plain goal is observable).
    Multiset shared;
    Multiset residual;
    {
        FinalResult ambient_run = engine.run(ambient);
        result.steps += ambient_run.steps;
        std::vector<Constraint> data, rest;
        for (const auto& c : ambient_run.alive)
            (is_data(p, c) ? data : rest).push_back(c);
        shared = oracle::make_multiset(std::move(data));
        residual = oracle::make_multiset(std::move(rest));
    }

    std::mutex commit_mutex;
    auto run_txn = [&](Transaction& txn) {
        while (true) {
            Multiset snapshot;
            {
                std::lock_guard lock(commit_mutex);
                snapshot = shared;
            }
            TxnOutcome out = run_on_snapshot(engine, snapshot, txn.body);
            if (out.stuck) {
                txn.status = TxnStatus::Stuck; // rolled back, no effects
                return;
            }
            std::lock_guard lock(commit_mutex);
            auto rest = oracle::multiset_minus(shared, out.reads_removed);
            if (rest) {
                shared = oracle::multiset_union(*rest, out.added);
                txn.status = TxnStatus::Committed;
                result.steps += out.steps;
                return;
            }
            // Validation failed: another transaction consumed our reads.
            if (++txn.retries > opts.max_retries)
                throw RetryExhaustedError("transaction exceeded " +
                                          std::to_string(opts.max_retries) +
                                          " retries");
        }
    };

    if (opts.parallel && txns.size() > 1) {
        std::vector<std::future<void>> futures;
        futures.reserve(txns.size());
        for (auto& txn : txns)
            futures.push_back(
                std::async(std::launch::async, [&run_txn, &txn] { run_txn(txn); }));
        for (auto& f : futures)
            f.get();
    } else {
        for (auto& txn : txns)
            run_txn(txn);
    }

    result.alive = oracle::multiset_union(shared, residual);
    result.transactions = std::move(txns);
    return result;
}

Rule make_atomic_entry(const Program& p, const std::string& op_symbol,
                       std::size_t arity) {
    if (!p.op_preds.count({op_symbol, arity}))
        throw std::invalid_argument(op_symbol + "/" + std::to_string(arity) +
                                    " is not a declared operation");
    std::vector<Term> args;
    for (std::size_t i = 0; i < arity; ++i)
        args.push_back(Term::var("A" + std::to_string(i + 1)));
    Rule r;
    r.name = "atomic_" + op_symbol;
    Constraint op = user_constraint(op_symbol, args);
    r.removed.push_back(user_constraint(kAtomicSymbol, {reify(op)}));
    r.body.push_back(op);
    r.kind = RuleKind::Simplification;
    return r;
}

namespace {

// Uniform variable renaming keeping the rest of the rule intact.
Rule rename_apart(const Rule& r, int stamp) {
    std::vector<std::string> vars;
    auto collect = [&vars](const std::vector<Constraint>& cs) {
        for (const auto& c : cs)
            c.collect_vars(vars);
    };
    collect(r.kept);
    collect(r.removed);
    collect(r.guard);
    collect(r.body);
    Bindings renaming;
    for (const auto& v : vars)
        renaming.bind(v, Term::var(v + "_u" + std::to_string(stamp)));
    Rule out = r;
    auto apply = [&renaming](std::vector<Constraint>& cs) {
        for (auto& c : cs)
            for (auto& a : c.args)
                a = substitute(a, renaming);
    };
    apply(out.kept);
    apply(out.removed);
    apply(out.guard);
    apply(out.body);
    return out;
}

// Unifiers are triangular (a binding's value may mention further bound
// variables), so resolution must chase bindings to a fixpoint.
Term deep_substitute(const Term& t, const Bindings& b) {
    if (t.is_var()) {
        const Term* bound = b.lookup(t.name());
        return bound ? deep_substitute(*bound, b) : t;
    }
    if (t.is_compound()) {
        std::vector<Term> args;
        args.reserve(t.arity());
        for (const auto& a : t.args())
            args.push_back(deep_substitute(a, b));
        return Term::compound(t.name(), std::move(args));
    }
    return t;
}

void apply_bindings(Rule& r, const Bindings& b) {
    auto apply = [&b](std::vector<Constraint>& cs) {
        for (auto& c : cs)
            for (auto& a : c.args)
                a = deep_substitute(a, b);
    };
    apply(r.kept);
    apply(r.removed);
    apply(r.guard);
    apply(r.body);
}

std::optional<std::size_t> first_operation(const Program& p,
                                           const std::vector<Constraint>& body) {
    for (std::size_t i = 0; i < body.size(); ++i)
        if (!body[i].is_builtin() && is_operation(p, body[i]))
            return i;
    return std::nullopt;
}

// The head operation constraint of a defining rule.
std::optional<std::size_t> head_operation(const Program& p, const Rule& r) {
    for (std::size_t pos = 0; pos < r.head_count(); ++pos)
        if (is_operation(p, r.head_at(pos)))
            return pos;
    return std::nullopt;
}

} // namespace

std::vector<Rule> unfold_bounded(const Program& p, const Rule& txn_rule,
                                 std::size_t bound) {
    std::vector<Rule> finished;
    std::vector<std::pair<Rule, std::size_t>> work{{txn_rule, 0}};
    int stamp = 0;
    while (!work.empty()) {
        auto [rule, depth] = std::move(work.back());
        work.pop_back();
        auto op_index = first_operation(p, rule.body);
        if (!op_index) {
            rule.kind = classify_rule(rule);
            finished.push_back(std::move(rule));
            continue;
        }
        if (depth >= bound)
            throw NotBoundedError("operation constraints persist in " +
                                  rule.name + " after " + std::to_string(bound) +
                                  " unfolding steps");
        const Constraint op = rule.body[*op_index];
        bool unfolded = false;
        for (const auto& defining : p.rules) {
            auto head_op = head_operation(p, defining);
            if (!head_op)
                continue;
            const Constraint& head = defining.head_at(*head_op);
            if (head.symbol != op.symbol || head.arity() != op.arity())
                continue;
            Rule variant = rename_apart(defining, ++stamp);
            const Constraint& vhead = variant.head_at(*head_op);
            Bindings mgu;
            if (!unify_into(reify(vhead), reify(op), mgu))
                continue;
            Rule merged = rule;
            merged.body.erase(merged.body.begin() +
                              static_cast<std::ptrdiff_t>(*op_index));
            // The defining rule's partner heads join the unfolded head,
            // its guard joins the guard, its body replaces the operation.
            for (std::size_t pos = 0; pos < variant.head_count(); ++pos) {
                if (pos == *head_op)
                    continue;
                if (variant.head_is_kept(pos))
                    merged.kept.push_back(variant.head_at(pos));
                else
                    merged.removed.push_back(variant.head_at(pos));
            }
            merged.guard.insert(merged.guard.end(), variant.guard.begin(),
                                variant.guard.end());
            merged.body.insert(merged.body.begin() +
                                   static_cast<std::ptrdiff_t>(*op_index),
                               variant.body.begin(), variant.body.end());
            apply_bindings(merged, mgu);
            merged.name = rule.name + "_" + defining.name;
            work.push_back({std::move(merged), depth + 1});
            unfolded = true;
        }
        if (!unfolded)
            throw NotBoundedError("no rule defines operation " + op.str());
    }
    return finished;
}

bool wrappers_erasable(const Program& p, const std::vector<Term>& domain,
                       std::size_t max_states) {
    for (const auto& cp : oracle::critical_pairs(p, domain))
        if (oracle::joinable(p, cp, max_states) != oracle::Joinability::Yes)
            return false;
    return true;
}

} // namespace chr::chrt

#include "chr/engine_seq.hpp"

#include <algorithm>

namespace chr {

SeqEngine::SeqEngine(const Program& program, SeqOptions opts)
    : program_(program), opts_(opts), occurrences_(program) {}

void SeqEngine::seed(ExecState& st, const std::vector<Constraint>& goal) const {
    for (const auto& c : goal) {
        GoalItem item;
        item.kind = c.is_builtin() ? GoalItem::Kind::Builtin : GoalItem::Kind::User;
        item.constraint = c;
        st.goals.push_back(std::move(item));
    }
}

void SeqEngine::push_body(ExecState& st, const std::vector<Constraint>& body) const {
    auto to_item = [](const Constraint& c) {
        GoalItem item;
        item.kind = c.is_builtin() ? GoalItem::Kind::Builtin : GoalItem::Kind::User;
        item.constraint = c;
        return item;
    };
    if (opts_.order == GoalOrder::Stack) {
        for (auto it = body.rbegin(); it != body.rend(); ++it)
            st.goals.push_front(to_item(*it));
    } else {
        for (const auto& c : body)
            st.goals.push_back(to_item(c));
    }
}

void SeqEngine::apply_delta(ExecState& st, Delta& d, const Rule& rule,
                            bool active_removed,
                            const std::vector<ConstraintId>& history_ids) const {
    if (rule.kind == RuleKind::Propagation)
        st.history.insert({rule.name, history_ids});
    for (const auto& [id, c] : d.removed) {
        bool killed = st.store.try_kill(id);
        (void)killed;
    }
    std::vector<Constraint> body = instantiate_body(rule, d.bindings);
    for (const auto& c : body)
        if (!c.is_builtin())
            d.added.push_back(c);
    if (active_removed)
        st.goals.pop_front();
    push_body(st, body);
    ++st.applies;
    if (opts_.record_trace) {
        TraceEntry e;
        e.step = st.applies;
        e.delta = d;
        st.trace.push_back(std::move(e));
    }
}

StepResult SeqEngine::step(ExecState& st) const {
    StepResult result;
    if (st.goals.empty()) {
        result.done = true;
        return result;
    }
    ++st.steps;
    GoalItem& front = st.goals.front();
    switch (front.kind) {
        case GoalItem::Kind::Builtin: {
            Constraint c = front.constraint;
            st.goals.pop_front();
            Bindings b;
            if (!eval_guard(c, b))
                throw StuckBuiltinError("body built-in failed: " + c.str());
            return result;
        }
        case GoalItem::Kind::User: {
            ConstraintId id = st.store.insert(front.constraint);
            front.kind = GoalItem::Kind::Active;
            front.id = id;
            front.occurrence = 0;
            return result;
        }
        case GoalItem::Kind::Active: {
            ConstraintId id = front.id;
            if (!st.store.alive(id)) {
                st.goals.pop_front();
                return result;
            }
            const Constraint& payload = st.store.payload(id);
            const auto& occs =
                occurrences_.for_predicate(payload.symbol, payload.arity());
            if (front.occurrence >= occs.size()) {
                st.goals.pop_front(); // drop; stays suspended in the store
                return result;
            }
            const Occurrence occ = occs[front.occurrence];
            const Rule& rule = program_.rules[occ.rule_index];
            MatchOptions mo;
            if (rule.kind == RuleKind::Propagation)
                mo.history = &st.history;
            auto delta = match_occurrence(rule, occ.head_pos, st.store, id,
                                          payload, mo);
            if (!delta) {
                ++front.occurrence; // suspend: try the next occurrence
                return result;
            }
            std::vector<ConstraintId> history_ids;
            if (rule.kind == RuleKind::Propagation) {
                for (std::size_t pos = 0; pos < rule.head_count(); ++pos)
                    history_ids.push_back(
                        rule.head_is_kept(pos)
                            ? delta->kept[pos].first
                            : delta->removed[pos - rule.kept.size()].first);
            }
            bool active_removed = !rule.head_is_kept(occ.head_pos);
            apply_delta(st, *delta, rule, active_removed, history_ids);
            result.delta = std::move(delta);
            return result;
        }
    }
    return result;
}

void SeqEngine::run_state(ExecState& st) const {
    while (true) {
        if (st.steps > opts_.fuel)
            throw NonTerminationError("fuel exhausted after " +
                                      std::to_string(st.steps) + " transitions");
        StepResult r = step(st);
        if (r.done)
            return;
    }
}

FinalResult SeqEngine::run(const std::vector<Constraint>& goal) const {
    ExecState st;
    seed(st, goal);
    run_state(st);
    FinalResult out;
    out.alive = st.store.alive_multiset();
    out.trace = std::move(st.trace);
    out.steps = st.applies;
    return out;
}

FinalResult run_seq(const Program& program, const std::vector<Constraint>& goal,
                    SeqOptions opts) {
    return SeqEngine(program, opts).run(goal);
}

} // namespace chr

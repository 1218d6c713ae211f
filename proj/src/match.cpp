#include "chr/match.hpp"

#include <algorithm>

namespace chr {

namespace {

struct Searcher {
    const Rule& rule;
    const Store& store;
    ConstraintId active_id;
    const MatchOptions& opts;

    std::vector<char> head_done;
    std::vector<char> guard_done;
    std::vector<std::pair<ConstraintId, Constraint>> matched; // by head pos
    std::vector<std::set<std::string>> head_vars;
    std::vector<std::set<std::string>> guard_vars;

    bool ready(std::size_t gi, const Bindings& b) const {
        const std::string& binder =
            gi < rule.guard_binders.size() ? rule.guard_binders[gi] : std::string();
        for (const auto& v : guard_vars[gi]) {
            if (!binder.empty() && v == binder && !b.contains(v))
                continue;
            if (!b.contains(v))
                return false;
        }
        return true;
    }

    // Evaluate every guard conjunct whose variables are available. Binder
    // conjuncts may bind more variables, so iterate to a fixpoint.
    bool flush_guards(Bindings& b) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t gi = 0; gi < rule.guard.size(); ++gi) {
                if (guard_done[gi] || !ready(gi, b))
                    continue;
                guard_done[gi] = 1;
                progress = true;
                if (!eval_guard(rule.guard[gi], b))
                    return false;
            }
        }
        return true;
    }

    std::optional<std::size_t> pick_next_head(const Bindings& b) const {
        std::optional<std::size_t> best;
        std::size_t best_bound = 0;
        for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
            if (head_done[pos])
                continue;
            std::size_t bound = 0;
            for (const auto& v : head_vars[pos])
                if (b.contains(v))
                    ++bound;
            if (!best || bound > best_bound) {
                best = pos;
                best_bound = bound;
            }
        }
        return best;
    }

    std::optional<std::pair<std::size_t, Term>> index_key(const Constraint& pattern,
                                                          const Bindings& b) const {
        for (std::size_t i = 0; i < pattern.arity(); ++i) {
            Term t = substitute(pattern.args[i], b);
            if (t.is_ground())
                return std::make_pair(i, std::move(t));
        }
        return std::nullopt;
    }

    bool id_used(ConstraintId id) const {
        if (id == active_id)
            return true;
        for (std::size_t pos = 0; pos < matched.size(); ++pos)
            if (head_done[pos] && matched[pos].first == id)
                return true;
        return false;
    }

    bool history_blocks() const {
        if (!opts.history)
            return false;
        std::vector<ConstraintId> ids;
        ids.reserve(matched.size());
        for (const auto& [id, c] : matched)
            ids.push_back(id);
        return opts.history->count({rule.name, std::move(ids)}) != 0;
    }

    bool search(Bindings& b) {
        if (!flush_guards(b))
            return false;
        auto next = pick_next_head(b);
        if (!next) {
            // Unevaluated guards here would mean unbound variables in a
            // validated rule; flush once more to surface genuine errors.
            for (std::size_t gi = 0; gi < rule.guard.size(); ++gi)
                if (!guard_done[gi]) {
                    guard_done[gi] = 1;
                    if (!eval_guard(rule.guard[gi], b))
                        return false;
                }
            return !history_blocks();
        }
        std::size_t pos = *next;
        const Constraint& pattern = rule.head_at(pos);
        auto key = index_key(pattern, b);
        auto cands = store.snapshot(pattern.symbol, pattern.arity(), key);
        if (cands.empty())
            return false;
        std::size_t n = cands.size();
        std::size_t offset =
            opts.rotation == 0 ? 0 : (opts.rotation * 0x9e3779b9u) % n;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& cand = cands[(k + offset) % n];
            if (id_used(cand.id))
                continue;
            Bindings b2 = b;
            if (!match_constraint(pattern, *cand.payload, b2))
                continue;
            std::vector<char> guard_snapshot = guard_done;
            head_done[pos] = 1;
            matched[pos] = {cand.id, *cand.payload};
            if (search(b2)) {
                b = std::move(b2);
                return true;
            }
            head_done[pos] = 0;
            guard_done = std::move(guard_snapshot);
        }
        return false;
    }
};

} // namespace

std::optional<Delta> match_occurrence(const Rule& rule, std::size_t occ_pos,
                                      const Store& store, ConstraintId active_id,
                                      const Constraint& active_payload,
                                      const MatchOptions& opts) {
    Bindings b;
    if (opts.seed)
        b = *opts.seed;
    const Constraint& active_pattern = rule.head_at(occ_pos);
    if (!match_constraint(active_pattern, active_payload, b))
        return std::nullopt;

    Searcher s{rule, store, active_id, opts, {}, {}, {}, {}, {}};
    s.head_done.assign(rule.head_count(), 0);
    s.guard_done.assign(rule.guard.size(), 0);
    s.matched.resize(rule.head_count());
    s.head_done[occ_pos] = 1;
    s.matched[occ_pos] = {active_id, active_payload};
    for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
        std::vector<std::string> vs;
        rule.head_at(pos).collect_vars(vs);
        s.head_vars.emplace_back(vs.begin(), vs.end());
    }
    for (const auto& g : rule.guard) {
        std::vector<std::string> vs;
        g.collect_vars(vs);
        s.guard_vars.emplace_back(vs.begin(), vs.end());
    }

    if (!s.search(b))
        return std::nullopt;

    Delta d;
    d.rule = rule.name;
    for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
        if (rule.head_is_kept(pos))
            d.kept.push_back(s.matched[pos]);
        else
            d.removed.push_back(s.matched[pos]);
    }
    d.bindings = std::move(b);
    return d;
}

std::vector<Constraint> instantiate_body(const Rule& rule, const Bindings& b) {
    std::vector<Constraint> out;
    out.reserve(rule.body.size());
    for (const auto& c : rule.body) {
        Constraint g;
        g.kind = c.kind;
        g.symbol = c.symbol;
        g.args.reserve(c.args.size());
        for (const auto& a : c.args)
            g.args.push_back(c.is_builtin() ? substitute(a, b) : normalize(a, b));
        if (c.location)
            g.location = normalize(*c.location, b);
        out.push_back(std::move(g));
    }
    return out;
}

} // namespace chr

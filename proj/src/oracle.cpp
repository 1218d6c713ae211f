#include "chr/oracle.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "chr/match.hpp"

namespace chr::oracle {

Multiset make_multiset(std::vector<Constraint> cs) {
    std::sort(cs.begin(), cs.end());
    return cs;
}

Multiset multiset_union(const Multiset& a, const Multiset& b) {
    Multiset out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

std::optional<Multiset> multiset_minus(const Multiset& a, const Multiset& b) {
    Multiset out = a;
    for (const auto& c : b) {
        auto it = std::lower_bound(out.begin(), out.end(), c);
        if (it == out.end() || !(*it == c))
            return std::nullopt;
        out.erase(it);
    }
    return out;
}

bool multiset_contains(const Multiset& a, const Multiset& b) {
    return multiset_minus(a, b).has_value();
}

std::set<Constraint> support(const Multiset& s) {
    return {s.begin(), s.end()};
}

std::string Instance::key() const {
    std::ostringstream os;
    os << rule_index << '|' << bindings.str();
    return os.str();
}

namespace {

// State elements carry stable ids so propagation histories can tell
// duplicate copies apart during exhaustive search.
struct IdState {
    std::vector<std::pair<std::uint64_t, Constraint>> elems;
    PropagationHistory history;
    std::uint64_t next_id = 0;

    static IdState from(const Multiset& s) {
        IdState st;
        for (const auto& c : s)
            st.elems.emplace_back(st.next_id++, c);
        return st;
    }

    Multiset multiset() const {
        std::vector<Constraint> cs;
        cs.reserve(elems.size());
        for (const auto& [id, c] : elems)
            cs.push_back(c);
        return make_multiset(std::move(cs));
    }

    /// Canonical encoding up to id renaming: sort elements structurally,
    /// remap ids by sorted position, remap and sort the history.
    std::string canonical() const {
        std::vector<std::pair<Constraint, std::uint64_t>> sorted;
        sorted.reserve(elems.size());
        for (const auto& [id, c] : elems)
            sorted.emplace_back(c, id);
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) {
                      if (!(a.first == b.first))
                          return a.first < b.first;
                      return a.second < b.second;
                  });
        std::map<std::uint64_t, std::uint64_t> remap;
        std::ostringstream os;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            remap[sorted[i].second] = i;
            os << sorted[i].first.str() << ';';
        }
        std::vector<std::string> hist;
        for (const auto& [rule, ids] : history) {
            std::ostringstream h;
            h << rule << ':';
            bool usable = true;
            for (auto id : ids) {
                auto it = remap.find(id);
                if (it == remap.end()) {
                    usable = false; // entry references a removed copy
                    break;
                }
                h << it->second << ',';
            }
            if (usable)
                hist.push_back(h.str());
        }
        std::sort(hist.begin(), hist.end());
        os << '#';
        for (const auto& h : hist)
            os << h << '|';
        return os.str();
    }
};

struct IdInstance {
    std::size_t rule_index = 0;
    Bindings bindings;
    std::vector<std::uint64_t> matched_ids; // head order
    std::vector<Constraint> added;
};

struct Enumerator {
    const Program& p;
    const IdState& st;
    std::vector<IdInstance> out;

    void run() {
        for (std::size_t ri = 0; ri < p.rules.size(); ++ri) {
            const Rule& r = p.rules[ri];
            Bindings b;
            std::vector<std::size_t> chosen;
            descend(ri, r, 0, b, chosen);
        }
    }

    void descend(std::size_t ri, const Rule& r, std::size_t pos, Bindings& b,
                 std::vector<std::size_t>& chosen) {
        if (pos == r.head_count()) {
            finish(ri, r, b, chosen);
            return;
        }
        const Constraint& pattern = r.head_at(pos);
        for (std::size_t ei = 0; ei < st.elems.size(); ++ei) {
            if (std::find(chosen.begin(), chosen.end(), ei) != chosen.end())
                continue;
            Bindings b2 = b;
            if (!match_constraint(pattern, st.elems[ei].second, b2))
                continue;
            chosen.push_back(ei);
            descend(ri, r, pos + 1, b2, chosen);
            chosen.pop_back();
        }
    }

    void finish(std::size_t ri, const Rule& r, Bindings b,
                std::vector<std::size_t>& chosen) {
        for (const auto& g : r.guard)
            if (!eval_guard(g, b))
                return;
        IdInstance inst;
        inst.rule_index = ri;
        inst.bindings = std::move(b);
        for (std::size_t ei : chosen)
            inst.matched_ids.push_back(st.elems[ei].first);
        if (r.kind == RuleKind::Propagation &&
            st.history.count({r.name, inst.matched_ids}))
            return;
        for (const auto& c : instantiate_body(r, inst.bindings))
            if (!c.is_builtin())
                inst.added.push_back(c);
        out.push_back(std::move(inst));
    }
};

std::vector<IdInstance> applicable_ids(const Program& p, const IdState& st) {
    Enumerator e{p, st, {}};
    e.run();
    return e.out;
}

IdState apply_id_instance(const Program& p, const IdState& st,
                          const IdInstance& inst) {
    const Rule& r = p.rules[inst.rule_index];
    IdState next;
    next.next_id = st.next_id;
    next.history = st.history;
    std::set<std::uint64_t> removed;
    for (std::size_t pos = 0; pos < r.head_count(); ++pos)
        if (!r.head_is_kept(pos))
            removed.insert(inst.matched_ids[pos]);
    for (const auto& [id, c] : st.elems)
        if (!removed.count(id))
            next.elems.emplace_back(id, c);
    for (const auto& c : inst.added)
        next.elems.emplace_back(next.next_id++, c);
    if (r.kind == RuleKind::Propagation)
        next.history.insert({r.name, inst.matched_ids});
    return next;
}

Instance to_instance(const Program& p, const IdState& st, const IdInstance& ii) {
    const Rule& r = p.rules[ii.rule_index];
    Instance inst;
    inst.rule_index = ii.rule_index;
    inst.rule = r.name;
    inst.bindings = ii.bindings;
    inst.added = ii.added;
    auto payload_of = [&st](std::uint64_t id) {
        for (const auto& [eid, c] : st.elems)
            if (eid == id)
                return c;
        return Constraint{};
    };
    for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
        Constraint c = payload_of(ii.matched_ids[pos]);
        if (r.head_is_kept(pos))
            inst.kept.push_back(std::move(c));
        else
            inst.removed.push_back(std::move(c));
    }
    return inst;
}

} // namespace

std::vector<Instance> applicable(const Program& p, const Multiset& s) {
    IdState st = IdState::from(s);
    std::vector<Instance> out;
    std::set<std::string> seen;
    for (const auto& ii : applicable_ids(p, st)) {
        Instance inst = to_instance(p, st, ii);
        if (seen.insert(inst.key()).second)
            out.push_back(std::move(inst));
    }
    return out;
}

Multiset apply_instance(const Multiset& s, const Instance& inst) {
    std::vector<Constraint> heads = inst.removed;
    auto rest = multiset_minus(s, make_multiset(std::move(heads)));
    if (!rest)
        throw std::invalid_argument("instance does not apply to state");
    return multiset_union(*rest, make_multiset(inst.added));
}

FinalsResult reachable_finals(const Program& p, const Multiset& s,
                              std::size_t max_states) {
    FinalsResult result;
    std::set<std::string> visited;
    std::deque<IdState> frontier;
    frontier.push_back(IdState::from(s));
    visited.insert(frontier.back().canonical());
    while (!frontier.empty()) {
        if (visited.size() > max_states) {
            result.complete = false;
            return result;
        }
        IdState st = std::move(frontier.front());
        frontier.pop_front();
        auto insts = applicable_ids(p, st);
        if (insts.empty()) {
            result.finals.insert(st.multiset());
            continue;
        }
        for (const auto& inst : insts) {
            IdState next = apply_id_instance(p, st, inst);
            if (visited.insert(next.canonical()).second)
                frontier.push_back(std::move(next));
        }
    }
    return result;
}

bool check_serializable(const Program& p, const Multiset& initial,
                        const std::vector<TraceEntry>& trace,
                        const Multiset& reported_final) {
    Multiset state = initial;
    for (const auto& entry : trace) {
        const Delta& d = entry.delta;
        const Rule* rule = p.find_rule(d.rule);
        if (!rule)
            return false;
        if (d.kept.size() != rule->kept.size() ||
            d.removed.size() != rule->removed.size())
            return false;
        // Re-derive the matching substitution from the recorded payloads,
        // then re-check guard and body. Traces read back from disk carry
        // no bindings, so nothing below relies on them.
        Bindings b;
        bool matched = true;
        for (std::size_t i = 0; matched && i < rule->kept.size(); ++i)
            matched = match_constraint(rule->kept[i], d.kept[i].second, b);
        for (std::size_t i = 0; matched && i < rule->removed.size(); ++i)
            matched = match_constraint(rule->removed[i], d.removed[i].second, b);
        if (!matched)
            return false;
        try {
            for (const auto& g : rule->guard)
                if (!eval_guard(g, b))
                    return false;
        } catch (const EvalError&) {
            return false;
        }
        std::vector<Constraint> added;
        for (const auto& c : instantiate_body(*rule, b))
            if (!c.is_builtin())
                added.push_back(c);
        if (make_multiset(added) != make_multiset(d.added))
            return false;
        // All matched constraints must be present together at this turn.
        std::vector<Constraint> needed;
        for (const auto& [id, c] : d.kept)
            needed.push_back(c);
        for (const auto& [id, c] : d.removed)
            needed.push_back(c);
        if (!multiset_contains(state, make_multiset(std::move(needed))))
            return false;
        std::vector<Constraint> removed;
        for (const auto& [id, c] : d.removed)
            removed.push_back(c);
        auto rest = multiset_minus(state, make_multiset(std::move(removed)));
        if (!rest)
            return false;
        state = multiset_union(*rest, make_multiset(std::move(added)));
    }
    return state == reported_final;
}

bool check_monotonic(const Program& p, const Multiset& s, const Instance& inst,
                     const Multiset& extension) {
    Multiset extended = multiset_union(s, extension);
    for (const auto& cand : applicable(p, extended))
        if (cand.key() == inst.key())
            return true;
    return false;
}

namespace {

struct GroundApp {
    std::size_t rule_index;
    std::vector<Constraint> heads; // head order
    std::vector<char> removed_at;  // per head position
    std::vector<Constraint> added;
    Bindings bindings;
};

// All guard-satisfying ground instantiations of a rule's head variables.
std::vector<GroundApp> ground_apps(const Program& p, std::size_t ri,
                                   const std::vector<Term>& domain) {
    const Rule& r = p.rules[ri];
    std::vector<std::string> vars;
    for (std::size_t pos = 0; pos < r.head_count(); ++pos)
        r.head_at(pos).collect_vars(vars);
    std::vector<GroundApp> out;
    std::vector<std::size_t> pick(vars.size(), 0);
    while (true) {
        Bindings b;
        for (std::size_t i = 0; i < vars.size(); ++i)
            b.bind(vars[i], domain[pick[i]]);
        bool ok = true;
        for (const auto& g : r.guard) {
            try {
                if (!eval_guard(g, b)) {
                    ok = false;
                    break;
                }
            } catch (const EvalError&) {
                ok = false; // e.g. comparing non-numeric domain atoms
                break;
            }
        }
        if (ok) {
            GroundApp app;
            app.rule_index = ri;
            app.bindings = b;
            for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
                Constraint h = r.head_at(pos);
                for (auto& a : h.args)
                    a = substitute(a, b);
                h.location.reset();
                app.heads.push_back(std::move(h));
                app.removed_at.push_back(!r.head_is_kept(pos));
            }
            try {
                for (const auto& c : instantiate_body(r, b))
                    if (!c.is_builtin())
                        app.added.push_back(c);
                out.push_back(std::move(app));
            } catch (const EvalError&) {
            }
        }
        // next assignment
        std::size_t i = 0;
        for (; i < pick.size(); ++i) {
            if (++pick[i] < domain.size())
                break;
            pick[i] = 0;
        }
        if (i == pick.size() || vars.empty())
            break;
    }
    if (vars.empty() && out.size() > 1)
        out.resize(1);
    return out;
}

std::string multiset_key(const Multiset& m) {
    std::ostringstream os;
    for (const auto& c : m)
        os << c.str() << ';';
    return os.str();
}

// Pairings (i, j) of equal head constraints across the two applications,
// injective on both sides, touching at least one removed head. Each valid
// pairing yields one overlap state with two one-step successors.
struct OverlapSearch {
    const Program& p;
    const GroundApp& a1;
    const GroundApp& a2;
    bool same_rule;
    std::set<std::string>& seen;
    std::vector<CriticalPair>& out;

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    std::vector<std::pair<std::size_t, std::size_t>> chosen;

    void run() {
        for (std::size_t i = 0; i < a1.heads.size(); ++i)
            for (std::size_t j = 0; j < a2.heads.size(); ++j)
                if (a1.heads[i] == a2.heads[j])
                    candidates.emplace_back(i, j);
        descend(0);
    }

    void descend(std::size_t k) {
        if (k == candidates.size()) {
            if (!chosen.empty())
                emit();
            return;
        }
        descend(k + 1);
        auto [i, j] = candidates[k];
        for (auto [ci, cj] : chosen)
            if (ci == i || cj == j)
                return; // injectivity
        chosen.push_back(candidates[k]);
        descend(k + 1);
        chosen.pop_back();
    }

    void emit() {
        bool touches_removed = false;
        for (auto [i, j] : chosen)
            if (a1.removed_at[i] || a2.removed_at[j])
                touches_removed = true;
        if (!touches_removed)
            return;

        // Element identities: a1 heads get 0..n1-1, unmerged a2 heads get
        // fresh ids after that.
        std::size_t n1 = a1.heads.size();
        std::vector<std::size_t> a2_id(a2.heads.size());
        std::vector<char> merged(a2.heads.size(), 0);
        for (auto [i, j] : chosen) {
            a2_id[j] = i;
            merged[j] = 1;
        }
        std::size_t fresh = n1;
        for (std::size_t j = 0; j < a2.heads.size(); ++j)
            if (!merged[j])
                a2_id[j] = fresh++;

        if (same_rule) {
            bool identical = a2.heads.size() == n1;
            for (std::size_t j = 0; identical && j < a2.heads.size(); ++j)
                identical = a2_id[j] == j;
            if (identical)
                return; // the two applications coincide
        }

        std::vector<Constraint> elems(fresh);
        for (std::size_t i = 0; i < n1; ++i)
            elems[i] = a1.heads[i];
        for (std::size_t j = 0; j < a2.heads.size(); ++j)
            elems[a2_id[j]] = a2.heads[j];

        std::vector<char> removed1(fresh, 0), removed2(fresh, 0);
        for (std::size_t i = 0; i < n1; ++i)
            if (a1.removed_at[i])
                removed1[i] = 1;
        for (std::size_t j = 0; j < a2.heads.size(); ++j)
            if (a2.removed_at[j])
                removed2[a2_id[j]] = 1;

        auto successor = [&elems, fresh](const std::vector<char>& removed,
                                         const std::vector<Constraint>& added) {
            std::vector<Constraint> cs;
            for (std::size_t e = 0; e < fresh; ++e)
                if (!removed[e])
                    cs.push_back(elems[e]);
            cs.insert(cs.end(), added.begin(), added.end());
            return make_multiset(std::move(cs));
        };

        CriticalPair cp;
        cp.overlap_state = make_multiset(elems);
        cp.succ1 = successor(removed1, a1.added);
        cp.succ2 = successor(removed2, a2.added);
        cp.rule1 = p.rules[a1.rule_index].name;
        cp.rule2 = p.rules[a2.rule_index].name;
        if (cp.succ1 == cp.succ2)
            return; // no divergence
        std::string k1 = multiset_key(cp.succ1);
        std::string k2 = multiset_key(cp.succ2);
        if (k2 < k1)
            std::swap(k1, k2);
        std::string key = multiset_key(cp.overlap_state) + '#' + k1 + '#' + k2;
        if (seen.insert(std::move(key)).second)
            out.push_back(std::move(cp));
    }
};

void overlap_pairs(const Program& p, const GroundApp& a1, const GroundApp& a2,
                   bool same_rule, std::set<std::string>& seen,
                   std::vector<CriticalPair>& out) {
    OverlapSearch s{p, a1, a2, same_rule, seen, out, {}, {}};
    s.run();
}

} // namespace

std::vector<CriticalPair> critical_pairs(const Program& p,
                                         const std::vector<Term>& domain) {
    std::vector<CriticalPair> out;
    std::set<std::string> seen;
    if (domain.empty())
        return out;

    std::vector<std::vector<GroundApp>> apps;
    apps.reserve(p.rules.size());
    for (std::size_t ri = 0; ri < p.rules.size(); ++ri)
        apps.push_back(ground_apps(p, ri, domain));

    for (std::size_t r1 = 0; r1 < p.rules.size(); ++r1) {
        for (std::size_t r2 = r1; r2 < p.rules.size(); ++r2) {
            for (const auto& a1 : apps[r1]) {
                for (const auto& a2 : apps[r2]) {
                    overlap_pairs(p, a1, a2, r1 == r2, seen, out);
                }
            }
        }
    }
    return out;
}

Joinability joinable(const Program& p, const CriticalPair& cp,
                     std::size_t max_states) {
    FinalsResult f1 = reachable_finals(p, cp.succ1, max_states);
    FinalsResult f2 = reachable_finals(p, cp.succ2, max_states);
    std::vector<Multiset> common;
    std::set_intersection(f1.finals.begin(), f1.finals.end(), f2.finals.begin(),
                          f2.finals.end(), std::back_inserter(common));
    if (!common.empty())
        return Joinability::Yes;
    if (f1.complete && f2.complete)
        return Joinability::No;
    return Joinability::Unknown;
}

} // namespace chr::oracle

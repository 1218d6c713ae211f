#include "chr/chrmp.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "chr/analysis.hpp"
#include "chr/errors.hpp"
#include "chr/match.hpp"

namespace chr::mp {

SetState make_set(const std::vector<Constraint>& goal) {
    SetState s;
    for (const auto& c : goal)
        if (!c.is_builtin())
            s.insert(c);
    return s;
}

namespace {

struct SetEnumerator {
    const Program& p;
    const std::vector<Constraint>& elems;
    InstanceSet out;

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
        for (std::size_t ei = 0; ei < elems.size(); ++ei) {
            if (std::find(chosen.begin(), chosen.end(), ei) != chosen.end())
                continue;
            Bindings b2 = b;
            if (!match_constraint(pattern, elems[ei], b2))
                continue;
            chosen.push_back(ei);
            descend(ri, r, pos + 1, b2, chosen);
            chosen.pop_back();
        }
    }

    void finish(std::size_t ri, const Rule& r, Bindings b,
                const std::vector<std::size_t>& chosen) {
        for (const auto& g : r.guard)
            if (!eval_guard(g, b))
                return;
        MpInstance inst;
        inst.rule_index = ri;
        inst.rule = r.name;
        for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
            const Constraint& c = elems[chosen[pos]];
            if (r.head_is_kept(pos))
                inst.kept.push_back(c);
            else
                inst.removed.push_back(c);
        }
        for (const auto& c : instantiate_body(r, b)) {
            if (c.is_builtin()) {
                Bindings dummy;
                Constraint ground = c;
                if (!eval_guard(ground, dummy))
                    throw StuckBuiltinError("body built-in failed: " + c.str());
            } else {
                inst.added.push_back(c);
            }
        }
        inst.bindings = std::move(b);
        out.push_back(std::move(inst));
    }
};

} // namespace

InstanceSet collect_instances(const Program& p, const SetState& s) {
    std::vector<Constraint> elems(s.begin(), s.end());
    SetEnumerator e{p, elems, {}};
    e.run();
    return e.out;
}

SetState massive_step(const SetState& s, const InstanceSet& r_sub) {
    SetState next = s;
    for (const auto& inst : r_sub)
        for (const auto& c : inst.removed)
            next.erase(c);
    for (const auto& inst : r_sub)
        for (const auto& c : inst.added)
            next.insert(c);
    return next;
}

DeletionRelation deletion_dependency(const SetState&, const InstanceSet& r) {
    DeletionRelation rel;
    for (const auto& inst : r)
        for (const auto& kept : inst.kept)
            for (const auto& removed : inst.removed)
                rel.insert({kept, removed});
    return rel;
}

bool is_acyclic_step(const DeletionRelation& rel) {
    std::map<Constraint, std::vector<Constraint>> adj;
    std::set<Constraint> nodes;
    for (const auto& [c, d] : rel) {
        adj[c].push_back(d);
        nodes.insert(c);
        nodes.insert(d);
    }
    // Cycle detection by coloring.
    std::map<Constraint, int> color; // 0 new, 1 open, 2 done
    struct Frame {
        Constraint node;
        std::size_t next = 0;
    };
    for (const auto& start : nodes) {
        if (color[start])
            continue;
        std::vector<Frame> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty()) {
            Frame& f = stack.back();
            auto& outs = adj[f.node];
            if (f.next < outs.size()) {
                const Constraint& n = outs[f.next++];
                int c = color[n];
                if (c == 1)
                    return false;
                if (c == 0) {
                    color[n] = 1;
                    stack.push_back({n, 0});
                }
            } else {
                color[f.node] = 2;
                stack.pop_back();
            }
        }
    }
    return true;
}

MpResult run_mp(const Program& p, const std::vector<Constraint>& goal,
                const MpOptions& opts) {
    auto diags = check_fragment(p, EngineKind::Mp);
    if (has_errors(diags))
        throw std::invalid_argument("program not in the mp fragment: " +
                                    diags.front().str());
    std::mt19937_64 rng(opts.seed);
    MpResult result;
    result.final_state = make_set(goal);
    while (true) {
        InstanceSet all = collect_instances(p, result.final_state);
        if (all.empty())
            return result;
        if (result.steps >= opts.max_steps)
            throw NonTerminationError("mp step budget exhausted");
        InstanceSet chosen;
        if (opts.policy == MpPolicy::Exhaustive) {
            chosen = all;
        } else {
            while (chosen.empty())
                for (const auto& inst : all)
                    if (rng() & 1)
                        chosen.push_back(inst);
        }
        DeletionRelation rel = deletion_dependency(result.final_state, all);
        bool acyclic = is_acyclic_step(rel);
        result.step_acyclic.push_back(acyclic);
        result.all_acyclic = result.all_acyclic && acyclic;
        result.final_state = massive_step(result.final_state, chosen);
        ++result.steps;
    }
}

Program add_set_rules(const Program& p) {
    Program out = p;
    std::set<std::string> existing;
    for (const auto& r : out.rules)
        existing.insert(r.name);
    std::vector<Rule> prefix;
    for (const auto& [symbol, arity] : p.user_predicates()) {
        std::string name = "set_" + symbol + "_" + std::to_string(arity);
        if (existing.count(name))
            continue;
        Rule r;
        r.name = name;
        std::vector<Term> args;
        for (std::size_t i = 0; i < arity; ++i)
            args.push_back(Term::var("X" + std::to_string(i + 1)));
        r.kept.push_back(user_constraint(symbol, args));
        r.removed.push_back(user_constraint(symbol, args));
        r.kind = RuleKind::Simpagation;
        r.guard_binders.clear();
        prefix.push_back(std::move(r));
    }
    out.rules.insert(out.rules.begin(), prefix.begin(), prefix.end());
    return out;
}

std::vector<Diagnostic> static_acyclicity_lint(const Program& p) {
    std::vector<Diagnostic> diags;
    std::set<std::pair<PredKey, PredKey>> edges;
    for (const auto& r : p.rules)
        for (const auto& k : r.kept)
            for (const auto& d : r.removed)
                edges.insert({{k.symbol, k.arity()}, {d.symbol, d.arity()}});
    // Reflexive or mutual predicate-level edges may allow removal cycles.
    for (const auto& [a, b] : edges) {
        if (a == b)
            diags.push_back({Severity::Info, "",
                             "predicate " + a.first + "/" +
                                 std::to_string(a.second) +
                                 " may keep-remove itself; per-state acyclicity "
                                 "check applies"});
        else if (edges.count({b, a}))
            diags.push_back({Severity::Info, "",
                             "predicates " + a.first + "/" +
                                 std::to_string(a.second) + " and " + b.first +
                                 "/" + std::to_string(b.second) +
                                 " may remove each other; per-state acyclicity "
                                 "check applies"});
    }
    return diags;
}

} // namespace chr::mp

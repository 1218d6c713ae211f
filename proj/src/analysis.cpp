#include "chr/analysis.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace chr {

namespace {

std::set<std::string> vars_of(const Constraint& c) {
    std::vector<std::string> vs;
    c.collect_vars(vs);
    return {vs.begin(), vs.end()};
}

std::set<std::string> vars_of_term(const Term& t) {
    std::vector<std::string> vs;
    t.collect_vars(vs);
    return {vs.begin(), vs.end()};
}

bool subset(const std::set<std::string>& a, const std::set<std::string>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace

std::vector<Diagnostic> validate_ground(Program& p) {
    std::vector<Diagnostic> diags;
    for (auto& r : p.rules) {
        std::set<std::string> bound;
        for (const auto& h : r.kept)
            for (const auto& v : vars_of(h))
                bound.insert(v);
        for (const auto& h : r.removed)
            for (const auto& v : vars_of(h))
                bound.insert(v);

        r.guard_binders.assign(r.guard.size(), "");
        for (std::size_t gi = 0; gi < r.guard.size(); ++gi) {
            const Constraint& g = r.guard[gi];
            bool binder_shape = (g.symbol == "=:=" || g.symbol == "=") &&
                                g.arity() == 2 && g.args[0].is_var() &&
                                !bound.count(g.args[0].name());
            if (binder_shape) {
                auto rhs_vars = vars_of_term(g.args[1]);
                if (!subset(rhs_vars, bound)) {
                    for (const auto& v : rhs_vars)
                        if (!bound.count(v))
                            diags.push_back({Severity::Error, r.name,
                                             "variable " + v +
                                                 " unbound in guard " + g.str()});
                    continue;
                }
                r.guard_binders[gi] = g.args[0].name();
                bound.insert(g.args[0].name());
            } else {
                for (const auto& v : vars_of(g))
                    if (!bound.count(v))
                        diags.push_back({Severity::Error, r.name,
                                         "variable " + v + " unbound in guard " +
                                             g.str()});
            }
        }
        for (const auto& bc : r.body)
            for (const auto& v : vars_of(bc))
                if (!bound.count(v))
                    diags.push_back({Severity::Error, r.name,
                                     "variable " + v + " unbound in body " +
                                         bc.str()});
    }
    return diags;
}

bool MatchingGraph::connected() const {
    if (vertices <= 1)
        return true;
    std::vector<std::vector<std::size_t>> adj(vertices);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<bool> seen(vertices, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t w : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
    }
    return count == vertices;
}

MatchingGraph matching_graph(const Rule& r) {
    MatchingGraph g;
    g.vertices = r.head_count();
    std::vector<std::set<std::string>> vars;
    vars.reserve(g.vertices);
    for (std::size_t i = 0; i < g.vertices; ++i)
        vars.push_back(vars_of(r.head_at(i)));
    for (std::size_t i = 0; i < g.vertices; ++i)
        for (std::size_t j = i + 1; j < g.vertices; ++j) {
            std::vector<std::string> common;
            std::set_intersection(vars[i].begin(), vars[i].end(),
                                  vars[j].begin(), vars[j].end(),
                                  std::back_inserter(common));
            if (!common.empty())
                g.edges.emplace_back(i, j);
        }
    return g;
}

bool is_direct_indexed(const Rule& r) { return matching_graph(r).connected(); }

namespace {

// Variables occurring in the constraints placed at one location,
// including the location term itself.
struct LocatedGroup {
    Term location;
    std::set<std::string> vars;
    std::vector<std::size_t> head_positions;
};

std::vector<LocatedGroup> group_by_location(const Rule& r) {
    std::vector<LocatedGroup> groups;
    for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
        const Constraint& h = r.head_at(pos);
        Term loc = h.location ? *h.location : Term::atom("<none>");
        auto it = std::find_if(groups.begin(), groups.end(),
                               [&loc](const LocatedGroup& g) { return g.location == loc; });
        if (it == groups.end()) {
            groups.push_back({loc, {}, {}});
            it = std::prev(groups.end());
        }
        for (const auto& v : vars_of(h))
            it->vars.insert(v);
        it->head_positions.push_back(pos);
    }
    return groups;
}

} // namespace

std::optional<NeighborInfo> neighbor_info(const Rule& r) {
    auto groups = group_by_location(r);
    bool located = std::all_of(groups.begin(), groups.end(), [](const LocatedGroup& g) {
        return !(g.location.is_atom() && g.location.name() == "<none>");
    });
    if (!located)
        return std::nullopt;

    if (groups.size() == 1) {
        NeighborInfo info;
        info.rule = r.name;
        info.primary = groups[0].location.str();
        info.n = 0;
        return info;
    }

    for (const auto& candidate : groups) {
        // (1) the primary is directly connected to every neighbor: each
        // neighbor's location term appears inside a primary constraint.
        bool connected = true;
        for (const auto& other : groups) {
            if (other.location == candidate.location)
                continue;
            auto loc_vars = vars_of_term(other.location);
            bool reachable = !loc_vars.empty() &&
                             subset(loc_vars, candidate.vars);
            if (!reachable) {
                connected = false;
                break;
            }
        }
        if (!connected)
            continue;
        // (2) a variable shared between different locations occurs at the
        // primary as well.
        bool sharing_ok = true;
        for (std::size_t i = 0; i < groups.size() && sharing_ok; ++i)
            for (std::size_t j = i + 1; j < groups.size() && sharing_ok; ++j) {
                std::vector<std::string> shared;
                std::set_intersection(groups[i].vars.begin(), groups[i].vars.end(),
                                      groups[j].vars.begin(), groups[j].vars.end(),
                                      std::back_inserter(shared));
                for (const auto& v : shared)
                    if (!candidate.vars.count(v)) {
                        sharing_ok = false;
                        break;
                    }
            }
        if (!sharing_ok)
            continue;
        // (3) each guard conjunct touches at most one neighbor location.
        bool guards_ok = true;
        for (const auto& g : r.guard) {
            std::size_t touched = 0;
            auto gv = vars_of(g);
            for (const auto& other : groups) {
                if (other.location == candidate.location)
                    continue;
                std::set<std::string> exclusive;
                for (const auto& v : other.vars)
                    if (!candidate.vars.count(v))
                        exclusive.insert(v);
                std::vector<std::string> common;
                std::set_intersection(gv.begin(), gv.end(), exclusive.begin(),
                                      exclusive.end(), std::back_inserter(common));
                if (!common.empty())
                    ++touched;
            }
            if (touched > 1) {
                guards_ok = false;
                break;
            }
        }
        if (!guards_ok)
            continue;

        NeighborInfo info;
        info.rule = r.name;
        info.primary = candidate.location.str();
        info.n = groups.size() - 1;
        return info;
    }
    NeighborInfo info;
    info.rule = r.name;
    return info; // located but not star-shaped
}

std::vector<NeighborInfo> neighbor_summary(const Program& p) {
    std::vector<NeighborInfo> out;
    for (const auto& r : p.rules) {
        auto info = neighbor_info(r);
        if (info)
            out.push_back(*info);
        else
            out.push_back({r.name, std::nullopt, 0});
    }
    return out;
}

namespace {

void check_size_increase(const Program& p, std::vector<Diagnostic>& diags) {
    for (const auto& r : p.rules) {
        std::size_t added = 0;
        for (const auto& c : r.body)
            if (!c.is_builtin())
                ++added;
        if (added > r.removed.size())
            diags.push_back({Severity::Info, r.name,
                             "size-increasing rule: adds " + std::to_string(added) +
                                 " constraints, removes " +
                                 std::to_string(r.removed.size())});
    }
}

void check_chrt(const Program& p, std::vector<Diagnostic>& diags) {
    if (p.dialect != Dialect::Chrt)
        diags.push_back({Severity::Error, "", "program does not declare #dialect chrt"});
    for (const auto& r : p.rules) {
        std::size_t ops = 0;
        for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
            const Constraint& h = r.head_at(pos);
            PredKey key{h.symbol, h.arity()};
            if (p.op_preds.count(key))
                ++ops;
            else if (!p.data_preds.count(key) && h.symbol != kAtomicSymbol)
                diags.push_back({Severity::Error, r.name,
                                 "head predicate " + h.symbol + "/" +
                                     std::to_string(h.arity()) +
                                     " is neither #data nor #operation"});
        }
        if (ops != 1)
            diags.push_back({Severity::Error, r.name,
                             "rule head must contain exactly one operation constraint, found " +
                                 std::to_string(ops)});
    }
}

void check_chre(const Program& p, std::vector<Diagnostic>& diags) {
    if (p.dialect != Dialect::Chre)
        diags.push_back({Severity::Error, "", "program does not declare #dialect chre"});
    for (const auto& r : p.rules) {
        auto info = neighbor_info(r);
        if (!info || !info->primary) {
            diags.push_back({Severity::Error, r.name,
                             "rule is not n-neighbor restricted"});
            continue;
        }
        if (info->n > 1)
            diags.push_back({Severity::Error, r.name,
                             "rule spans " + std::to_string(info->n) +
                                 " neighbor locations; only 0- and 1-neighbor "
                                 "rules are supported"});
    }
}

} // namespace

std::vector<Diagnostic> check_fragment(const Program& p, EngineKind engine) {
    std::vector<Diagnostic> diags;
    switch (engine) {
        case EngineKind::Seq:
            check_size_increase(p, diags);
            break;
        case EngineKind::Par:
        case EngineKind::Mp:
            for (const auto& r : p.rules)
                if (r.kind == RuleKind::Propagation)
                    diags.push_back({Severity::Error, r.name,
                                     "propagation rules are not supported by this engine"});
            check_size_increase(p, diags);
            break;
        case EngineKind::Chrt:
            check_chrt(p, diags);
            break;
        case EngineKind::Chre:
            check_chre(p, diags);
            break;
    }
    return diags;
}

} // namespace chr

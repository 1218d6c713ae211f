#include "chr/chre.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <condition_variable>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "chr/analysis.hpp"
#include "chr/errors.hpp"
#include "chr/parser.hpp"

namespace chr::chre {

std::vector<Term> locations_of_goal(const std::vector<Constraint>& goal) {
    std::set<Term> locs;
    for (const auto& c : goal) {
        if (c.location)
            locs.insert(*c.location);
        for (const auto& a : c.args)
            if (a.is_atom() && !is_nil(a))
                locs.insert(a);
    }
    return {locs.begin(), locs.end()};
}

Ensemble::Ensemble(const Program& p, const std::vector<Constraint>& localized_goal,
                   const std::vector<Term>& extra_locations)
    : program_(p), occurrences_(p),
      ids_(std::make_shared<std::atomic<ConstraintId>>(0)) {
    std::set<Term> locs;
    for (const auto& t : locations_of_goal(localized_goal))
        locs.insert(t);
    for (const auto& t : extra_locations)
        locs.insert(t);
    for (const auto& t : locs) {
        by_location_[t] = locations_.size();
        locations_.push_back(std::make_unique<LocalizedState>(t, ids_));
    }
    for (const auto& c : localized_goal) {
        if (!c.location)
            throw UnknownLocationError("goal constraint " + c.str() +
                                       " has no location");
        auto idx = index_of(*c.location);
        LocalGoalItem item;
        item.kind = c.is_builtin() ? LocalGoalItem::Kind::Builtin
                                   : LocalGoalItem::Kind::User;
        item.constraint = c;
        item.constraint.location.reset();
        locations_[*idx]->goals.push_back(std::move(item));
    }
}

std::optional<std::size_t> Ensemble::index_of(const Term& location) const {
    auto it = by_location_.find(location);
    if (it == by_location_.end())
        return std::nullopt;
    return it->second;
}

bool Ensemble::has_local_work(std::size_t loc_index) const {
    const LocalizedState& loc = *locations_[loc_index];
    return !loc.goals.empty() || !loc.buffer.empty();
}

bool Ensemble::quiescent() const {
    for (std::size_t i = 0; i < locations_.size(); ++i)
        if (has_local_work(i))
            return false;
    return true;
}

void Ensemble::deliver(std::size_t from, const Term& dest, const Constraint& c) {
    auto idx = index_of(dest);
    if (!idx)
        throw UnknownLocationError("no location " + dest.str() +
                                   " in the ensemble");
    if (transport_mutex_) {
        std::lock_guard lock(*transport_mutex_);
        locations_[*idx]->buffer.push_back(c);
    } else {
        locations_[*idx]->buffer.push_back(c);
    }
    ++locations_[from]->sent;
}

namespace {

// Next partner head to complete: prefer heads whose location is already
// ground, then most bound variables.
std::optional<std::size_t> pick_head(const Rule& rule,
                                     const std::vector<char>& done,
                                     const Bindings& b) {
    std::optional<std::size_t> best;
    long best_score = -1;
    for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
        if (done[pos])
            continue;
        const Constraint& h = rule.head_at(pos);
        long score = 0;
        if (h.location && substitute(*h.location, b).is_ground())
            score += 1000;
        std::vector<std::string> vs;
        h.collect_vars(vs);
        for (const auto& v : vs)
            if (b.contains(v))
                ++score;
        if (score > best_score) {
            best = pos;
            best_score = score;
        }
    }
    return best;
}

} // namespace

std::optional<Ensemble::MatchResult> Ensemble::match_local(
    std::size_t loc_index, ConstraintId active_id, const Constraint& payload,
    const Occurrence& occ) {
    const Rule& rule = program_.rules[occ.rule_index];
    const Constraint& active_pattern = rule.head_at(occ.head_pos);
    Bindings b;
    if (active_pattern.location &&
        !match_term(*active_pattern.location, locations_[loc_index]->location, b))
        return std::nullopt;
    if (!match_constraint(active_pattern, payload, b))
        return std::nullopt;

    struct Partial {
        Bindings b;
        std::vector<char> done;
        std::vector<std::pair<ConstraintId, std::size_t>> ids; // per head pos
        std::vector<char> guard_done;
    };

    std::vector<std::pair<ConstraintId, std::size_t>> matched(rule.head_count(),
                                                              {0, 0});
    std::vector<char> done(rule.head_count(), 0);
    done[occ.head_pos] = 1;
    matched[occ.head_pos] = {active_id, loc_index};

    // Guard conjuncts evaluate as soon as their variables are bound.
    std::vector<char> guard_done(rule.guard.size(), 0);
    auto flush_guards = [&rule](Bindings& bind, std::vector<char>& gdone) {
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t gi = 0; gi < rule.guard.size(); ++gi) {
                if (gdone[gi])
                    continue;
                std::vector<std::string> vs;
                rule.guard[gi].collect_vars(vs);
                const std::string& binder = gi < rule.guard_binders.size()
                                                ? rule.guard_binders[gi]
                                                : std::string();
                bool ready = true;
                for (const auto& v : vs) {
                    if (!binder.empty() && v == binder && !bind.contains(v))
                        continue;
                    if (!bind.contains(v)) {
                        ready = false;
                        break;
                    }
                }
                if (!ready)
                    continue;
                gdone[gi] = 1;
                progress = true;
                if (!eval_guard(rule.guard[gi], bind))
                    return false;
            }
        }
        return true;
    };

    // Depth-first partner completion over the ensemble's stores.
    std::function<bool(Bindings&, std::vector<char>&)> search =
        [&](Bindings& bind, std::vector<char>& gdone) -> bool {
        if (!flush_guards(bind, gdone))
            return false;
        auto next = pick_head(rule, done, bind);
        if (!next) {
            for (std::size_t gi = 0; gi < rule.guard.size(); ++gi)
                if (!gdone[gi]) {
                    gdone[gi] = 1;
                    if (!eval_guard(rule.guard[gi], bind))
                        return false;
                }
            if (rule.kind == RuleKind::Propagation) {
                // The instance's history entry lives at the location of the
                // first head's constraint, so a rule spanning two locations
                // cannot fire once from each side.
                std::vector<ConstraintId> ids;
                for (const auto& [id, li] : matched)
                    ids.push_back(id);
                if (locations_[matched[0].second]->history.count(
                        {rule.name, ids}))
                    return false;
            }
            return true;
        }
        std::size_t pos = *next;
        const Constraint& pattern = rule.head_at(pos);
        std::vector<std::size_t> stores;
        if (pattern.location) {
            Term loc = substitute(*pattern.location, bind);
            if (loc.is_ground()) {
                auto idx = index_of(loc);
                if (!idx)
                    return false;
                stores.push_back(*idx);
            }
        }
        if (stores.empty())
            for (std::size_t i = 0; i < locations_.size(); ++i)
                stores.push_back(i);

        for (std::size_t si : stores) {
            std::optional<std::pair<std::size_t, Term>> key;
            for (std::size_t ai = 0; ai < pattern.arity(); ++ai) {
                Term t = substitute(pattern.args[ai], bind);
                if (t.is_ground()) {
                    key = {ai, std::move(t)};
                    break;
                }
            }
            auto cands = locations_[si]->store.snapshot(pattern.symbol,
                                                        pattern.arity(), key);
            for (const auto& cand : cands) {
                bool used = false;
                for (std::size_t q = 0; q < rule.head_count(); ++q)
                    if (done[q] && matched[q].first == cand.id) {
                        used = true;
                        break;
                    }
                if (used)
                    continue;
                Bindings b2 = bind;
                if (pattern.location &&
                    !match_term(*pattern.location, locations_[si]->location, b2))
                    continue;
                if (!match_constraint(pattern, *cand.payload, b2))
                    continue;
                std::vector<char> g2 = gdone;
                done[pos] = 1;
                matched[pos] = {cand.id, si};
                if (search(b2, g2)) {
                    bind = std::move(b2);
                    gdone = std::move(g2);
                    return true;
                }
                done[pos] = 0;
            }
        }
        return false;
    };

    if (!search(b, guard_done))
        return std::nullopt;

    MatchResult result;
    result.rule = &rule;
    result.delta.rule = rule.name;
    result.delta.bindings = b;
    for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
        auto [id, li] = matched[pos];
        const Constraint& c = locations_[li]->store.payload(id);
        if (rule.head_is_kept(pos))
            result.delta.kept.emplace_back(id, c);
        else
            result.delta.removed.emplace_back(id, c);
        result.id_locations.emplace_back(id, li);
    }
    return result;
}

void Ensemble::push_body(LocalizedState& loc, const Rule& rule,
                         const Bindings& b, Delta& delta) {
    std::vector<Constraint> body = instantiate_body(rule, b);
    for (const auto& c : body)
        if (!c.is_builtin())
            delta.added.push_back(c);
    for (auto it = body.rbegin(); it != body.rend(); ++it) {
        LocalGoalItem item;
        if (it->is_builtin()) {
            item.kind = LocalGoalItem::Kind::Builtin;
            item.constraint = *it;
        } else {
            item.kind = LocalGoalItem::Kind::Located;
            item.constraint = *it;
            if (!item.constraint.location)
                item.constraint.location = loc.location;
        }
        loc.goals.push_front(std::move(item));
    }
}

StepKind Ensemble::local_step(std::size_t loc_index) {
    LocalizedState& loc = *locations_[loc_index];
    if (loc.goals.empty()) {
        std::deque<Constraint> drained;
        if (transport_mutex_) {
            std::lock_guard lock(*transport_mutex_);
            drained.swap(loc.buffer);
        } else {
            drained.swap(loc.buffer);
        }
        if (drained.empty())
            return StepKind::None;
        // Flush: the buffered constraints become the goal stack.
        for (auto& c : drained) {
            LocalGoalItem item;
            item.kind = LocalGoalItem::Kind::User;
            item.constraint = std::move(c);
            loc.goals.push_back(std::move(item));
            ++loc.flushed;
        }
        return StepKind::Flush;
    }
    LocalGoalItem& front = loc.goals.front();
    switch (front.kind) {
        case LocalGoalItem::Kind::Located: {
            Constraint c = front.constraint;
            Term dest = *c.location;
            if (dest == loc.location) {
                front.kind = LocalGoalItem::Kind::User;
                front.constraint.location.reset();
                return StepKind::DropLoc;
            }
            loc.goals.pop_front();
            c.location.reset();
            deliver(loc_index, dest, c);
            return StepKind::MoveLoc;
        }
        case LocalGoalItem::Kind::Builtin: {
            Constraint c = front.constraint;
            loc.goals.pop_front();
            Bindings b;
            if (!eval_guard(c, b))
                throw StuckBuiltinError("body built-in failed: " + c.str());
            return StepKind::Builtin;
        }
        case LocalGoalItem::Kind::User: {
            ConstraintId id = loc.store.insert(front.constraint);
            front.kind = LocalGoalItem::Kind::Active;
            front.id = id;
            front.occurrence = 0;
            return StepKind::Activate;
        }
        case LocalGoalItem::Kind::Active: {
            ConstraintId id = front.id;
            if (!loc.store.alive(id)) {
                loc.goals.pop_front();
                return StepKind::Discard;
            }
            const Constraint payload = loc.store.payload(id);
            const auto& occs =
                occurrences_.for_predicate(payload.symbol, payload.arity());
            if (front.occurrence >= occs.size()) {
                loc.goals.pop_front();
                return StepKind::Drop;
            }
            const Occurrence occ = occs[front.occurrence];
            auto m = match_local(loc_index, id, payload, occ);
            if (!m) {
                ++front.occurrence;
                return StepKind::Suspend;
            }
            const Rule& rule = *m->rule;
            if (rule.kind == RuleKind::Propagation) {
                std::vector<ConstraintId> ids;
                for (const auto& [mid, li] : m->id_locations)
                    ids.push_back(mid);
                std::size_t owner = m->id_locations[0].second;
                locations_[owner]->history.insert({rule.name, std::move(ids)});
            }
            bool active_removed = false;
            for (std::size_t pos = 0; pos < rule.head_count(); ++pos) {
                if (rule.head_is_kept(pos))
                    continue;
                auto [mid, li] = m->id_locations[pos];
                locations_[li]->store.try_kill(mid);
                if (mid == id)
                    active_removed = true;
            }
            if (active_removed)
                loc.goals.pop_front();
            push_body(loc, rule, m->delta.bindings, m->delta);
            return active_removed ? StepKind::Remove : StepKind::Keep;
        }
    }
    return StepKind::None;
}

std::map<Term, std::vector<Constraint>> Ensemble::dump() const {
    std::map<Term, std::vector<Constraint>> out;
    for (const auto& loc : locations_)
        out[loc->location] = loc->store.alive_multiset();
    return out;
}

std::uint64_t Ensemble::total_sent() const {
    std::uint64_t n = 0;
    for (const auto& loc : locations_)
        n += loc->sent;
    return n;
}

std::uint64_t Ensemble::total_flushed() const {
    std::uint64_t n = 0;
    for (const auto& loc : locations_)
        n += loc->flushed;
    return n;
}

std::string ChreResult::str() const {
    std::ostringstream os;
    for (const auto& [loc, cs] : stores) {
        os << "location " << loc.str() << ":\n";
        for (const auto& c : cs)
            os << "  " << c.str() << '\n';
    }
    return os.str();
}

// One worker per location. Goal stacks and stores stay thread-confined;
// buffers are the only cross-worker channel, guarded by the transport
// mutex, which doubles as the sleep/wake lock for idle workers.
struct ParallelDriver {
    Ensemble& ens;
    std::uint64_t fuel;
    std::mutex transport;
    std::condition_variable cv;
    std::uint64_t idle = 0;
    bool stop = false;
    std::exception_ptr error;
    std::atomic<std::uint64_t> steps{0};

    ParallelDriver(Ensemble& e, std::uint64_t f) : ens(e), fuel(f) {
        ens.set_transport_mutex(&transport);
    }
    ~ParallelDriver() { ens.set_transport_mutex(nullptr); }

    void worker(std::size_t loc) {
        try {
            while (true) {
                StepKind k = ens.local_step(loc);
                if (k == StepKind::MoveLoc)
                    cv.notify_all();
                if (k != StepKind::None) {
                    if (steps.fetch_add(1, std::memory_order_relaxed) > fuel)
                        throw NonTerminationError("ensemble fuel exhausted");
                    continue;
                }
                std::unique_lock lock(transport);
                if (!ens.at(loc).buffer.empty())
                    continue;
                ++idle;
                if (idle == ens.size()) {
                    stop = true;
                    cv.notify_all();
                    return;
                }
                cv.wait(lock, [this, loc] {
                    return stop || !ens.at(loc).buffer.empty();
                });
                --idle;
                if (stop)
                    return;
            }
        } catch (...) {
            std::lock_guard lock(transport);
            if (!error)
                error = std::current_exception();
            stop = true;
            cv.notify_all();
        }
    }

    std::uint64_t run() {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < ens.size(); ++i)
            threads.emplace_back(&ParallelDriver::worker, this, i);
        for (auto& t : threads)
            t.join();
        if (error)
            std::rethrow_exception(error);
        return steps.load();
    }
};

std::uint64_t run_parallel_ensemble(Ensemble& ens, const ChreOptions& opts) {
    ParallelDriver driver(ens, opts.fuel);
    return driver.run();
}

namespace {

std::uint64_t drive_sequential(Ensemble& ens, const ChreOptions& opts,
                               std::uint64_t budget) {
    std::uint64_t steps = 0;
    std::mt19937_64 rng(opts.seed);
    while (true) {
        std::vector<std::size_t> ready;
        for (std::size_t i = 0; i < ens.size(); ++i)
            if (ens.has_local_work(i))
                ready.push_back(i);
        if (ready.empty())
            return steps;
        if (opts.schedule == Schedule::Random) {
            std::size_t pick = ready[rng() % ready.size()];
            if (ens.local_step(pick) != StepKind::None)
                ++steps;
        } else {
            for (std::size_t i : ready)
                if (ens.local_step(i) != StepKind::None)
                    ++steps;
        }
        if (steps > budget)
            throw NonTerminationError("ensemble fuel exhausted");
    }
}

} // namespace

ChreResult run_ensemble(const Program& p,
                        const std::vector<Constraint>& localized_goal,
                        const ChreOptions& opts,
                        const std::vector<Term>& extra_locations) {
    auto diags = check_fragment(p, EngineKind::Chre);
    if (has_errors(diags))
        throw std::invalid_argument("not a valid chre program: " +
                                    diags.front().str());
    if (opts.schedule == Schedule::Parallel) {
        auto infos = neighbor_summary(p);
        for (const auto& info : infos)
            if (info.n > 0)
                throw std::invalid_argument(
                    "parallel schedule requires 0-neighbor rules; encode rule " +
                    info.rule + " first");
    }

    Ensemble ens(p, localized_goal, extra_locations);
    ChreResult result;
    if (opts.schedule == Schedule::Parallel)
        result.steps = run_parallel_ensemble(ens, opts);
    else
        result.steps = drive_sequential(ens, opts, opts.fuel);

    if (opts.gc_trigger) {
        std::vector<Constraint> triggers;
        for (std::size_t i = 0; i < ens.size(); ++i) {
            Constraint t = user_constraint(*opts.gc_trigger);
            t.location = ens.at(i).location;
            triggers.push_back(std::move(t));
        }
        for (const auto& t : triggers) {
            auto idx = ens.index_of(*t.location);
            LocalGoalItem item;
            item.kind = LocalGoalItem::Kind::User;
            item.constraint = t;
            item.constraint.location.reset();
            ens.at(*idx).goals.push_back(std::move(item));
        }
        ChreOptions sweep = opts;
        sweep.schedule = opts.schedule == Schedule::Parallel
                             ? Schedule::RoundRobin
                             : opts.schedule;
        result.steps += drive_sequential(ens, sweep, opts.fuel);
    }

    result.quiescent = ens.quiescent();
    result.stores = ens.dump();
    result.sent = ens.total_sent();
    result.flushed = ens.total_flushed();
    return result;
}

namespace {

constexpr const char* kGcTrigger = "chre_gc";

bool persistent(const Program& p, const Constraint& c) {
    for (const auto& r : p.rules)
        for (const auto& rem : r.removed)
            if (rem.symbol == c.symbol && rem.arity() == c.arity())
                return false;
    return true;
}

void add_vars(const Constraint& c, std::vector<std::string>& out) {
    std::vector<std::string> vs;
    c.collect_vars(vs);
    for (auto& v : vs)
        if (std::find(out.begin(), out.end(), v) == out.end())
            out.push_back(std::move(v));
}

std::vector<Term> as_args(const std::vector<std::string>& vars) {
    std::vector<Term> out;
    out.reserve(vars.size());
    for (const auto& v : vars)
        out.push_back(Term::var(v));
    return out;
}

Constraint located(Constraint c, Term loc) {
    c.location = std::move(loc);
    return c;
}

} // namespace

std::vector<Rule> encode_1neighbor(const Rule& r, const Program& p) {
    auto info = neighbor_info(r);
    if (!info || !info->primary)
        throw NotOneNeighborError("rule " + r.name +
                                  " is not n-neighbor restricted");
    if (info->n == 0)
        return {r};
    if (info->n > 1)
        throw NotOneNeighborError("rule " + r.name + " spans " +
                                  std::to_string(info->n) +
                                  " neighbors; only 1-neighbor rules are encoded");

    Term primary = parse_term(*info->primary);
    Term neighbor;
    std::vector<Constraint> px, px_prime, sx, py, sy;
    for (std::size_t pos = 0; pos < r.head_count(); ++pos) {
        Constraint h = r.head_at(pos);
        bool at_primary = *h.location == primary;
        if (!at_primary)
            neighbor = *h.location;
        h.location.reset();
        if (r.head_is_kept(pos)) {
            if (at_primary)
                (persistent(p, h) ? px : px_prime).push_back(h);
            else
                py.push_back(h);
        } else {
            (at_primary ? sx : sy).push_back(h);
        }
    }

    // Guard split: conjuncts touching neighbor-side variables go to the
    // vote rule, the rest to the request rule.
    std::vector<std::string> x_vars, y_vars;
    {
        std::vector<std::string> pv;
        primary.collect_vars(pv);
        x_vars.insert(x_vars.end(), pv.begin(), pv.end());
    }
    for (const auto& c : px) add_vars(c, x_vars);
    for (const auto& c : px_prime) add_vars(c, x_vars);
    for (const auto& c : sx) add_vars(c, x_vars);
    std::vector<std::string> all_vars = x_vars;
    {
        std::vector<std::string> nv;
        neighbor.collect_vars(nv);
        for (auto& v : nv)
            if (std::find(all_vars.begin(), all_vars.end(), v) == all_vars.end())
                all_vars.push_back(std::move(v));
    }
    for (const auto& c : py) add_vars(c, all_vars);
    for (const auto& c : sy) add_vars(c, all_vars);

    std::vector<Constraint> gx, gy;
    for (const auto& g : r.guard) {
        std::vector<std::string> gv;
        g.collect_vars(gv);
        bool touches_y = std::any_of(gv.begin(), gv.end(), [&](const std::string& v) {
            return std::find(x_vars.begin(), x_vars.end(), v) == x_vars.end();
        });
        (touches_y ? gy : gx).push_back(g);
    }

    const std::string req = r.name + "_req";
    const std::string vcom = r.name + "_vcom";
    const std::string commit = r.name + "_commit";
    Constraint req_c = user_constraint(req, as_args(x_vars));
    Constraint vcom_c = user_constraint(vcom, as_args(all_vars));
    Constraint commit_c = user_constraint(commit, as_args(all_vars));

    std::vector<Rule> out;
    {
        Rule request;
        request.name = r.name + "_request";
        for (const auto& c : px) request.kept.push_back(located(c, primary));
        for (const auto& c : px_prime) request.kept.push_back(located(c, primary));
        for (const auto& c : sx) request.kept.push_back(located(c, primary));
        request.guard = gx;
        request.body.push_back(located(req_c, neighbor));
        request.kind = RuleKind::Propagation;
        out.push_back(std::move(request));
    }
    {
        // One vote per request when the primary removes constraints;
        // otherwise the request stays and may serve several removals.
        Rule vote;
        vote.name = r.name + "_vote";
        for (const auto& c : py) vote.kept.push_back(located(c, neighbor));
        for (const auto& c : sy) vote.kept.push_back(located(c, neighbor));
        if (sx.empty()) {
            vote.kept.push_back(located(req_c, neighbor));
            vote.kind = RuleKind::Propagation;
        } else {
            vote.removed.push_back(located(req_c, neighbor));
            vote.kind = RuleKind::Simpagation;
        }
        vote.guard = gy;
        vote.body.push_back(located(vcom_c, primary));
        out.push_back(std::move(vote));
    }
    {
        Rule commit_rule;
        commit_rule.name = r.name + "_commit";
        for (const auto& c : px) commit_rule.kept.push_back(located(c, primary));
        for (const auto& c : px_prime)
            commit_rule.removed.push_back(located(c, primary));
        for (const auto& c : sx) commit_rule.removed.push_back(located(c, primary));
        commit_rule.removed.push_back(located(vcom_c, primary));
        commit_rule.body.push_back(located(commit_c, neighbor));
        commit_rule.kind = classify_rule(commit_rule);
        out.push_back(std::move(commit_rule));
    }
    {
        Rule act;
        act.name = r.name + "_act";
        for (const auto& c : py) act.kept.push_back(located(c, neighbor));
        for (const auto& c : sy) act.removed.push_back(located(c, neighbor));
        act.removed.push_back(located(commit_c, neighbor));
        for (const auto& c : px_prime)
            act.body.push_back(located(c, primary)); // re-emission
        act.body.insert(act.body.end(), r.body.begin(), r.body.end());
        act.kind = classify_rule(act);
        out.push_back(std::move(act));
    }
    // Garbage collection for protocol constraints that can be left behind
    // when their consumer rule can no longer fire.
    bool vcom_can_linger = !px_prime.empty() || !sx.empty() ||
                           std::any_of(px.begin(), px.end(), [&](const Constraint& c) {
                               return !persistent(p, c);
                           });
    bool commit_can_linger =
        !sy.empty() || std::any_of(py.begin(), py.end(), [&](const Constraint& c) {
            return !persistent(p, c);
        });
    Term gc_loc = Term::var("GcLoc");
    if (vcom_can_linger) {
        Rule gc;
        gc.name = r.name + "_gc_vcom";
        gc.kept.push_back(located(user_constraint(kGcTrigger), gc_loc));
        gc.removed.push_back(located(vcom_c, gc_loc));
        gc.kind = RuleKind::Simpagation;
        out.push_back(std::move(gc));
    }
    if (commit_can_linger) {
        Rule gc;
        gc.name = r.name + "_gc_commit";
        gc.kept.push_back(located(user_constraint(kGcTrigger), gc_loc));
        gc.removed.push_back(located(commit_c, gc_loc));
        gc.kind = RuleKind::Simpagation;
        out.push_back(std::move(gc));
    }
    return out;
}

EncodedProgram encode_program(const Program& p) {
    EncodedProgram out;
    out.program.constants = p.constants;
    out.program.dialect = p.dialect;
    std::vector<Rule> gc_rules;
    bool any_encoded = false;
    for (const auto& r : p.rules) {
        auto rules = encode_1neighbor(r, p);
        if (rules.size() == 1 && rules[0].name == r.name) {
            out.program.rules.push_back(rules[0]);
            continue;
        }
        any_encoded = true;
        for (auto& nr : rules) {
            if (nr.name.find("_gc_") != std::string::npos) {
                gc_rules.push_back(std::move(nr));
                continue;
            }
            out.program.rules.push_back(std::move(nr));
        }
        out.protocol_symbols.push_back(r.name + "_req");
        out.protocol_symbols.push_back(r.name + "_vcom");
        out.protocol_symbols.push_back(r.name + "_commit");
    }
    if (any_encoded && !gc_rules.empty()) {
        // All rescue rules come after every act rule; the trigger removes
        // itself last.
        for (auto& gr : gc_rules)
            out.program.rules.push_back(std::move(gr));
        Rule done;
        done.name = "chre_gc_done";
        done.removed.push_back(
            located(user_constraint(kGcTrigger), Term::var("GcLoc")));
        done.kind = RuleKind::Simplification;
        out.program.rules.push_back(std::move(done));
        out.gc_trigger = kGcTrigger;
        out.protocol_symbols.push_back(kGcTrigger);
    }
    return out;
}

} // namespace chr::chre

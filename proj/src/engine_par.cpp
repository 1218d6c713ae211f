#include "chr/engine_par.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "chr/analysis.hpp"

namespace chr {

namespace {

struct ClaimEntry {
    ConstraintId id;
    bool exclusive;
};

void release_claims(Store& store, const std::vector<ClaimEntry>& held,
                    std::size_t count) {
    for (std::size_t i = count; i > 0; --i) {
        const ClaimEntry& e = held[i - 1];
        if (e.exclusive)
            store.release_exclusive(e.id);
        else
            store.release_shared(e.id);
    }
}

std::optional<std::uint64_t> commit_impl(Store& store, const Delta& d,
                                         std::atomic<std::uint64_t>* seq) {
    std::vector<ClaimEntry> order;
    order.reserve(d.kept.size() + d.removed.size());
    for (const auto& [id, c] : d.removed)
        order.push_back({id, true});
    for (const auto& [id, c] : d.kept)
        order.push_back({id, false});
    std::sort(order.begin(), order.end(),
              [](const ClaimEntry& a, const ClaimEntry& b) { return a.id < b.id; });

    for (std::size_t i = 0; i < order.size(); ++i) {
        bool ok = order[i].exclusive ? store.claim_exclusive(order[i].id)
                                     : store.claim_shared(order[i].id);
        if (!ok) {
            release_claims(store, order, i);
            return std::nullopt;
        }
    }
    for (const auto& e : order) {
        if (!store.alive(e.id)) {
            release_claims(store, order, order.size());
            return std::nullopt;
        }
    }
    std::uint64_t stamp = seq ? seq->fetch_add(1, std::memory_order_acq_rel) : 0;
    for (const auto& [id, c] : d.removed) {
        bool killed = store.try_kill(id);
        if (!killed) {
            // Unreachable while all removals go through claims.
            release_claims(store, order, order.size());
            throw std::logic_error("claimed constraint died outside commit");
        }
    }
    release_claims(store, order, order.size());
    return stamp;
}

} // namespace

bool arv_commit(Store& store, const Delta& d) {
    return commit_impl(store, d, nullptr).has_value();
}

std::optional<std::uint64_t> arv_commit_seq(Store& store, const Delta& d,
                                            std::atomic<std::uint64_t>& seq) {
    return commit_impl(store, d, &seq);
}

namespace {

class GoalPool {
public:
    GoalPool(const ParConfig& cfg) : cfg_(cfg) {}

    void seed(const std::vector<Constraint>& goal) {
        std::lock_guard lock(mutex_);
        for (const auto& c : goal)
            items_.push_back(c);
        pending_ += goal.size();
    }

    void push_body(const std::vector<Constraint>& body) {
        std::lock_guard lock(mutex_);
        pending_ += body.size();
        std::vector<const Constraint*> stacked;
        for (const auto& c : body) {
            if (order_of(c) == GoalOrder::Stack)
                stacked.push_back(&c);
            else
                items_.push_back(c);
        }
        for (auto it = stacked.rbegin(); it != stacked.rend(); ++it)
            items_.push_front(**it);
        cv_.notify_all();
    }

    std::optional<Constraint> pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] {
            return !items_.empty() || pending_ == 0 || aborted_;
        });
        if (aborted_ || items_.empty())
            return std::nullopt;
        Constraint c = std::move(items_.front());
        items_.pop_front();
        return c;
    }

    void finish_item() {
        std::lock_guard lock(mutex_);
        if (--pending_ == 0)
            cv_.notify_all();
    }

    void abort(std::exception_ptr e) {
        std::lock_guard lock(mutex_);
        if (!error_)
            error_ = e;
        aborted_ = true;
        cv_.notify_all();
    }

    std::exception_ptr error() {
        std::lock_guard lock(mutex_);
        return error_;
    }

private:
    GoalOrder order_of(const Constraint& c) const {
        auto it = cfg_.order_overrides.find(c.symbol);
        return it == cfg_.order_overrides.end() ? cfg_.default_order : it->second;
    }

    const ParConfig& cfg_;
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Constraint> items_;
    std::uint64_t pending_ = 0;
    bool aborted_ = false;
    std::exception_ptr error_;
};

struct SharedRun {
    const Program& program;
    const ParConfig& cfg;
    OccurrenceTable occurrences;
    Store store;
    GoalPool pool;
    std::atomic<std::uint64_t> commit_seq{0};
    std::atomic<std::uint64_t> fuel_used{0};
    std::mutex trace_mutex;
    std::vector<TraceEntry> trace;
    std::unordered_set<ConstraintId> removed_audit;

    SharedRun(const Program& p, const ParConfig& c)
        : program(p), cfg(c), occurrences(p), pool(c) {}

    void log_commit(Delta d, int worker, std::uint64_t seq) {
        std::lock_guard lock(trace_mutex);
        for (const auto& [id, c] : d.removed)
            if (!removed_audit.insert(id).second)
                throw std::logic_error("constraint id " + std::to_string(id) +
                                       " removed by two commits");
        if (cfg.record_trace) {
            TraceEntry e;
            e.step = seq + 1;
            e.delta = std::move(d);
            e.worker = worker;
            e.commit_seq = seq;
            trace.push_back(std::move(e));
        }
    }

    void burn_fuel() {
        if (fuel_used.fetch_add(1, std::memory_order_relaxed) > cfg.fuel)
            throw NonTerminationError("fuel exhausted in parallel run");
    }
};

void worker_loop(SharedRun& run, int worker_id) {
    try {
        while (auto item = run.pool.pop()) {
            const Constraint& c = *item;
            if (c.is_builtin()) {
                Bindings b;
                if (!eval_guard(c, b))
                    throw StuckBuiltinError("body built-in failed: " + c.str());
                run.pool.finish_item();
                continue;
            }
            ConstraintId id = run.store.insert(c);
            const auto& occs = run.occurrences.for_predicate(c.symbol, c.arity());
            std::size_t j = 0;
            while (j < occs.size() && run.store.alive(id)) {
                run.burn_fuel();
                const Occurrence occ = occs[j];
                const Rule& rule = run.program.rules[occ.rule_index];
                MatchOptions mo;
                if (run.cfg.candidate_rotation)
                    mo.rotation = static_cast<std::size_t>(worker_id) + 1;
                auto delta = match_occurrence(rule, occ.head_pos, run.store, id,
                                              run.store.payload(id), mo);
                if (!delta) {
                    ++j; // no match: try the next occurrence
                    continue;
                }
                auto seq = arv_commit_seq(run.store, *delta, run.commit_seq);
                if (!seq)
                    continue; // commit failed: re-search this occurrence
                std::vector<Constraint> body = instantiate_body(rule, delta->bindings);
                for (const auto& bc : body)
                    if (!bc.is_builtin())
                        delta->added.push_back(bc);
                bool active_removed = !rule.head_is_kept(occ.head_pos);
                run.log_commit(std::move(*delta), worker_id, *seq);
                run.pool.push_body(body);
                if (active_removed)
                    break;
                // Apply-Keep: stay on this occurrence for further partners.
            }
            run.store.maybe_sweep();
            run.pool.finish_item();
        }
    } catch (...) {
        run.pool.abort(std::current_exception());
    }
}

} // namespace

FinalResult run_parallel(const Program& program,
                         const std::vector<Constraint>& goal,
                         const ParConfig& cfg) {
    if (cfg.workers == 0)
        throw std::invalid_argument("worker count must be at least 1");
    auto diags = check_fragment(program, EngineKind::Par);
    if (has_errors(diags))
        throw std::invalid_argument("program not in the parallel fragment: " +
                                    diags.front().str());

    SharedRun run(program, cfg);
    run.pool.seed(goal);
    std::vector<std::thread> threads;
    threads.reserve(cfg.workers);
    for (std::size_t w = 0; w < cfg.workers; ++w)
        threads.emplace_back(worker_loop, std::ref(run), static_cast<int>(w));
    for (auto& t : threads)
        t.join();
    if (auto err = run.pool.error())
        std::rethrow_exception(err);

    FinalResult out;
    out.alive = run.store.alive_multiset();
    out.trace = std::move(run.trace);
    std::sort(out.trace.begin(), out.trace.end(),
              [](const TraceEntry& a, const TraceEntry& b) {
                  return a.commit_seq < b.commit_seq;
              });
    out.steps = run.commit_seq.load();
    return out;
}

} // namespace chr

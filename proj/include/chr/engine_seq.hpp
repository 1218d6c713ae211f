#ifndef CHR_ENGINE_SEQ_HPP
#define CHR_ENGINE_SEQ_HPP

#include <deque>
#include <memory>
#include <optional>

#include "chr/analysis.hpp"
#include "chr/match.hpp"
#include "chr/runtime.hpp"

namespace chr {

struct SeqOptions {
    GoalOrder order = GoalOrder::Stack;
    std::uint64_t fuel = kDefaultFuel;
    bool record_trace = true;
};

struct GoalItem {
    enum class Kind { User, Builtin, Active };
    Kind kind;
    Constraint constraint; // User/Builtin payload
    ConstraintId id = 0;   // Active
    std::size_t occurrence = 0;
};

/// Goal-based execution state: pending goal items, the store of suspended
/// constraints, and the propagation history.
struct ExecState {
    std::deque<GoalItem> goals;
    Store store;
    PropagationHistory history;
    std::vector<TraceEntry> trace;
    std::uint64_t steps = 0;
    std::uint64_t applies = 0;

    ExecState() = default;
    explicit ExecState(std::shared_ptr<std::atomic<ConstraintId>> id_source)
        : store(std::move(id_source)) {}
};

struct StepResult {
    bool done = false;
    std::optional<Delta> delta;
};

/// Sequential refined engine: activate goal constraints one at a time,
/// try occurrences in program order, apply or suspend.
class SeqEngine {
public:
    SeqEngine(const Program& program, SeqOptions opts = {});

    void seed(ExecState& st, const std::vector<Constraint>& goal) const;

    /// Apply exactly one transition. Returns done when no goal item remains.
    StepResult step(ExecState& st) const;

    /// Run a state to quiescence (used with pre-seeded stores).
    void run_state(ExecState& st) const;

    FinalResult run(const std::vector<Constraint>& goal) const;

    const Program& program() const { return program_; }
    const SeqOptions& options() const { return opts_; }

private:
    void push_body(ExecState& st, const std::vector<Constraint>& body) const;
    void apply_delta(ExecState& st, Delta& d, const Rule& rule, bool active_removed,
                     const std::vector<ConstraintId>& history_ids) const;

    const Program& program_;
    SeqOptions opts_;
    OccurrenceTable occurrences_;
};

FinalResult run_seq(const Program& program, const std::vector<Constraint>& goal,
                    SeqOptions opts = {});

} // namespace chr

#endif

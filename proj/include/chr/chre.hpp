#ifndef CHR_CHRE_HPP
#define CHR_CHRE_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chr/ast.hpp"
#include "chr/match.hpp"
#include "chr/runtime.hpp"

namespace chr::chre {

struct LocalGoalItem {
    enum class Kind { Located, User, Builtin, Active };
    Kind kind;
    Constraint constraint; // Located/User/Builtin payload
    ConstraintId id = 0;   // Active
    std::size_t occurrence = 0;
};

/// One location's state: inbound message buffer, goal stack, local store
/// and propagation history.
struct LocalizedState {
    Term location;
    std::deque<Constraint> buffer; // FIFO, fed by MoveLoc
    std::deque<LocalGoalItem> goals;
    Store store;
    PropagationHistory history;
    std::uint64_t sent = 0;
    std::uint64_t flushed = 0;

    LocalizedState(Term loc, std::shared_ptr<std::atomic<ConstraintId>> ids)
        : location(std::move(loc)), store(std::move(ids)) {}
};

enum class StepKind {
    None, // no local transition applies
    Flush,
    MoveLoc,
    DropLoc,
    Activate,
    Remove,
    Keep,
    Suspend,
    Drop,
    Discard,
    Builtin,
};

/// The ensemble: a fixed set of localized states over one id sequence.
class Ensemble {
public:
    Ensemble(const Program& p, const std::vector<Constraint>& localized_goal,
             const std::vector<Term>& extra_locations = {});

    std::size_t size() const { return locations_.size(); }
    LocalizedState& at(std::size_t i) { return *locations_[i]; }
    const LocalizedState& at(std::size_t i) const { return *locations_[i]; }
    std::optional<std::size_t> index_of(const Term& location) const;

    /// Apply exactly one localized transition at the given location.
    StepKind local_step(std::size_t loc_index);

    bool has_local_work(std::size_t loc_index) const;
    bool quiescent() const;

    /// Parallel schedules guard buffer access with this mutex; goal stacks
    /// and stores stay confined to their location's worker.
    void set_transport_mutex(std::mutex* m) { transport_mutex_ = m; }

    /// Alive store contents per location, each multiset sorted.
    std::map<Term, std::vector<Constraint>> dump() const;
    std::uint64_t total_sent() const;
    std::uint64_t total_flushed() const;

private:
    struct MatchResult {
        Delta delta;
        std::vector<std::pair<ConstraintId, std::size_t>> id_locations;
        const Rule* rule;
    };

    std::optional<MatchResult> match_local(std::size_t loc_index,
                                           ConstraintId active_id,
                                           const Constraint& payload,
                                           const Occurrence& occ);
    void deliver(std::size_t from, const Term& dest, const Constraint& c);
    void push_body(LocalizedState& loc, const Rule& rule, const Bindings& b,
                   Delta& delta);

    const Program& program_;
    OccurrenceTable occurrences_;
    std::shared_ptr<std::atomic<ConstraintId>> ids_;
    std::vector<std::unique_ptr<LocalizedState>> locations_;
    std::map<Term, std::size_t> by_location_;
    std::mutex* transport_mutex_ = nullptr;

    friend struct ParallelDriver;
};

enum class Schedule { RoundRobin, Random, Parallel };

struct ChreOptions {
    Schedule schedule = Schedule::RoundRobin;
    std::uint64_t seed = 0;
    std::uint64_t fuel = kDefaultFuel;
    /// Extra goal injected at every location once the ensemble first
    /// quiesces (protocol garbage collection for encoded programs).
    std::optional<std::string> gc_trigger;
};

struct ChreResult {
    std::map<Term, std::vector<Constraint>> stores; // per-location, sorted
    bool quiescent = false;
    std::uint64_t steps = 0;
    std::uint64_t sent = 0;
    std::uint64_t flushed = 0;

    std::string str() const; // one section per location
};

/// Locations mentioned in a localized goal: every tag plus every atom
/// argument (a conservative superset; extra locations stay inert).
std::vector<Term> locations_of_goal(const std::vector<Constraint>& goal);

ChreResult run_ensemble(const Program& p,
                        const std::vector<Constraint>& localized_goal,
                        const ChreOptions& opts = {},
                        const std::vector<Term>& extra_locations = {});

struct EncodedProgram {
    Program program;
    std::vector<std::string> protocol_symbols;
    std::optional<std::string> gc_trigger;
};

/// Two-phase-commit encoding of one 1-neighbor rule into 0-neighbor rules
/// (request/vote/commit/act plus garbage collection for protocol
/// constraints that can be left behind). 0-neighbor rules are returned
/// unchanged. Throws NotOneNeighborError for rules spanning more.
std::vector<Rule> encode_1neighbor(const Rule& r, const Program& p);

EncodedProgram encode_program(const Program& p);

} // namespace chr::chre

#endif

#ifndef CHR_ANALYSIS_HPP
#define CHR_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "chr/ast.hpp"

namespace chr {

/// Range-restriction check: every rule variable occurs in the head or is
/// bound by a guard equation over already-bound variables. Also fills in
/// Rule::guard_binders as a side effect of the same scan.
std::vector<Diagnostic> validate_ground(Program& p);

/// Undirected graph over a rule's head constraints; edge when two heads
/// share a variable.
struct MatchingGraph {
    std::size_t vertices = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    bool connected() const;
};

MatchingGraph matching_graph(const Rule& r);
bool is_direct_indexed(const Rule& r);

/// Star-shape classification of a located rule head: the primary location
/// plus the number of distinct neighbor locations.
struct NeighborInfo {
    std::string rule;
    std::optional<std::string> primary; // unset when not n-neighbor restricted
    std::size_t n = 0;
};

std::optional<NeighborInfo> neighbor_info(const Rule& r);

/// Engine-specific syntactic checks. Par and Mp reject propagation rules;
/// size-increasing rules are reported as informational; Chre requires
/// n-neighbor restricted heads; Chrt requires declared data/operation
/// predicates and exactly one operation constraint per head.
std::vector<Diagnostic> check_fragment(const Program& p, EngineKind engine);

/// Neighbor classification for every rule of a chre program.
std::vector<NeighborInfo> neighbor_summary(const Program& p);

} // namespace chr

#endif

#ifndef CHR_CORPUS_HPP
#define CHR_CORPUS_HPP

#include <optional>
#include <string>
#include <vector>

namespace chr::corpus {

/// Program source by corpus name; empty optional when unknown.
std::optional<std::string> source(const std::string& name);

std::vector<std::string> names();

/// Dining philosophers with #const n bound to the table size.
std::string philosophers_source(int n);

/// Goal text generators (see expand_goal for the gen: forms).
std::string primes_goal(int n);
std::string gcd_goal(int count, std::uint64_t seed);
std::string philosophers_goal(int n, int meals);
std::string fw_cycle_goal(int n, bool localized);
std::string merge_sort_goal(int count, std::uint64_t seed);

/// Expand "gen:primes:30"-style goal specs; plain goal text passes through.
std::string expand_goal(const std::string& spec, std::uint64_t seed);

} // namespace chr::corpus

#endif

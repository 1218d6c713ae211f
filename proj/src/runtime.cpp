#include "chr/runtime.hpp"

#include <sstream>

namespace chr {

std::vector<ConstraintId> Delta::kept_ids() const {
    std::vector<ConstraintId> out;
    out.reserve(kept.size());
    for (const auto& [id, c] : kept)
        out.push_back(id);
    return out;
}

std::vector<ConstraintId> Delta::removed_ids() const {
    std::vector<ConstraintId> out;
    out.reserve(removed.size());
    for (const auto& [id, c] : removed)
        out.push_back(id);
    return out;
}

std::string TraceEntry::str() const {
    std::ostringstream os;
    os << "step=" << step << " rule=" << delta.rule << " kept=[";
    for (std::size_t i = 0; i < delta.kept.size(); ++i) {
        if (i) os << ',';
        os << delta.kept[i].first;
    }
    os << "] removed=[";
    for (std::size_t i = 0; i < delta.removed.size(); ++i) {
        if (i) os << ',';
        os << delta.removed[i].first;
    }
    os << "] added=[";
    for (std::size_t i = 0; i < delta.added.size(); ++i) {
        if (i) os << ',';
        os << delta.added[i].str();
    }
    os << ']';
    if (worker >= 0)
        os << " worker=" << worker << " seq=" << commit_seq;
    return os.str();
}

std::string format_multiset(const std::vector<Constraint>& cs) {
    std::ostringstream os;
    for (const auto& c : cs)
        os << c.str() << '\n';
    return os.str();
}

std::uint64_t result_hash(const std::vector<Constraint>& cs) {
    std::uint64_t h = 0;
    for (const auto& c : cs)
        h += static_cast<std::uint64_t>(c.hash()) * 0x9e3779b97f4a7c15ULL + 1;
    return h;
}

} // namespace chr

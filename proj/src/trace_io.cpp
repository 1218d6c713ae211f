#include "chr/trace_io.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "chr/parser.hpp"

namespace chr {

void write_trace(std::ostream& os, const std::vector<TraceEntry>& trace) {
    std::map<ConstraintId, Constraint> ids;
    for (const auto& e : trace) {
        for (const auto& [id, c] : e.delta.kept)
            ids.emplace(id, c);
        for (const auto& [id, c] : e.delta.removed)
            ids.emplace(id, c);
    }
    for (const auto& [id, c] : ids)
        os << "activate id=" << id << " constraint=" << c.str() << '\n';
    for (const auto& e : trace)
        os << e.str() << '\n';
}

namespace {

std::string field(const std::string& line, const std::string& name) {
    std::string tag = name + "=";
    auto pos = line.find(tag);
    if (pos == std::string::npos)
        throw std::invalid_argument("missing field " + name + " in trace line: " +
                                    line);
    pos += tag.size();
    std::size_t end;
    if (pos < line.size() && line[pos] == '[') {
        end = line.find(']', pos);
        if (end == std::string::npos)
            throw std::invalid_argument("unterminated list in trace line");
        return line.substr(pos + 1, end - pos - 1);
    }
    end = line.find(' ', pos);
    return line.substr(pos, end == std::string::npos ? std::string::npos
                                                     : end - pos);
}

std::vector<ConstraintId> parse_ids(const std::string& text) {
    std::vector<ConstraintId> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stoull(item));
    return out;
}

} // namespace

void write_trace_file(std::ostream& os, const std::vector<TraceEntry>& trace,
                      const std::vector<Constraint>& final_state) {
    write_trace(os, trace);
    for (const auto& c : final_state)
        os << "final constraint=" << c.str() << '\n';
}

TraceFile read_trace_file(std::istream& is) {
    std::ostringstream deltas;
    TraceFile out;
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) {
        if (line.rfind("final ", 0) == 0) {
            std::string text = line.substr(line.find("constraint=") + 11);
            auto goal = parse_goal(text);
            out.final_state.push_back(goal.at(0));
        } else {
            deltas << line << '\n';
        }
    }
    std::istringstream rest(deltas.str());
    out.trace = read_trace(rest);
    std::sort(out.final_state.begin(), out.final_state.end());
    return out;
}

std::vector<TraceEntry> read_trace(std::istream& is) {
    std::map<ConstraintId, Constraint> ids;
    std::vector<TraceEntry> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        if (line.rfind("activate ", 0) == 0) {
            ConstraintId id = std::stoull(field(line, "id"));
            std::string text = line.substr(line.find("constraint=") + 11);
            auto goal = parse_goal(text);
            if (goal.size() != 1)
                throw std::invalid_argument("bad activation line: " + line);
            ids.emplace(id, goal[0]);
            continue;
        }
        TraceEntry e;
        e.step = std::stoull(field(line, "step"));
        e.delta.rule = field(line, "rule");
        for (ConstraintId id : parse_ids(field(line, "kept")))
            e.delta.kept.emplace_back(id, ids.at(id));
        for (ConstraintId id : parse_ids(field(line, "removed")))
            e.delta.removed.emplace_back(id, ids.at(id));
        std::string added = field(line, "added");
        if (!added.empty())
            for (auto& c : parse_goal(added))
                e.delta.added.push_back(std::move(c));
        if (line.find("worker=") != std::string::npos) {
            e.worker = std::stoi(field(line, "worker"));
            e.commit_seq = std::stoull(field(line, "seq"));
        }
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace chr

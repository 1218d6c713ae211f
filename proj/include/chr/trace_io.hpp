#ifndef CHR_TRACE_IO_HPP
#define CHR_TRACE_IO_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "chr/runtime.hpp"

namespace chr {

/// Write a run's trace: one `activate id=<i> constraint=<c>` line per
/// identified constraint, then one delta line per rule application.
void write_trace(std::ostream& os, const std::vector<TraceEntry>& trace);

/// Read a trace written by write_trace. The activation lines rebuild the
/// id-to-constraint map the delta lines reference.
std::vector<TraceEntry> read_trace(std::istream& is);

struct TraceFile {
    std::vector<TraceEntry> trace;
    std::vector<Constraint> final_state;
};

/// Trace plus the run's reported final multiset (trailer lines
/// `final constraint=<c>`), enough to replay against the oracle.
void write_trace_file(std::ostream& os, const std::vector<TraceEntry>& trace,
                      const std::vector<Constraint>& final_state);
TraceFile read_trace_file(std::istream& is);

} // namespace chr

#endif

#pragma once

#include <string>

#include "hifi/simulator.hpp"

namespace hifi {

/// Column layout shared by the writer and the reader. Estimation error
/// columns satisfy e = [x1..x4]' - E*x_hat row by row.
inline constexpr const char* kTraceHeader =
    "t,x1,x2,x3,x4,rdot,xh1,xh2,xh3,xh4,xh5,e1,e2,e3,e4,y01,y02,y03,y1,w,tau";

/// Writes the trace as CSV using shortest round-trip decimal formatting,
/// so re-reading reproduces every double bit for bit. Throws ParseError
/// on I/O failure.
void write_trace_csv(const std::string& path, const SimTrace& trace);

/// Reads a CSV produced by write_trace_csv, verifying the header and
/// per-row column count. Throws ParseError on malformed input.
SimTrace read_trace_csv(const std::string& path);

}  // namespace hifi

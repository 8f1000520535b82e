#pragma once

#include <string>

#include "hifi/simulator.hpp"

namespace hifi {

/// Renders two stacked panels comparing the true suspension deflection
/// and unsprung velocity against their estimates (x - e, taken column
/// by column from the trace). Long traces are stride-downsampled so the
/// file stays small. Throws ParseError on I/O failure.
void write_trace_svg(const std::string& path, const SimTrace& trace);

}  // namespace hifi

#pragma once

#include <string>
#include <vector>

#include "timegate/clicks.hpp"
#include "timegate/homodyne.hpp"

namespace timegate {

// Binary trace-set container (.tgt): fixed little-endian header, then one
// float32 qualifier delay per window, then the contiguous float32 samples
// of every window.
void write_trace_set(const std::string& path, const TraceSet& set);
TraceSet read_trace_set(const std::string& path);

// clicks as CSV: pulse_index,delay_ns
void write_clicks_csv(const std::string& path, const std::vector<ClickRecord>& clicks);
std::vector<ClickRecord> read_clicks_csv(const std::string& path);

// histogram as CSV: bin_start_ns,count,normalized
void write_histogram_csv(const std::string& path, const DelayHistogram& hist);

}  // namespace timegate

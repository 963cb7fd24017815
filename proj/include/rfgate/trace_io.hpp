#pragma once

#include "rfgate/simulator.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rfgate {

/// Trace format: header line `tag_id,t,rssi`, then one read per line with
/// timestamps printed to 6 fractional digits and RSSI to 2, LF endings.
/// Doubles as the replay ingestion format for real captures.
void write_trace(std::ostream& os, const std::vector<TagRead>& reads);
void write_trace_file(const std::string& path, const std::vector<TagRead>& reads);

std::vector<TagRead> read_trace(std::istream& is);
std::vector<TagRead> read_trace_file(const std::string& path);

} // namespace rfgate

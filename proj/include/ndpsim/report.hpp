#pragma once

#include <string>
#include <vector>

#include "ndpsim/engine.hpp"

namespace ndpsim {

/// Serializes a report as pretty JSON with a stable key order, so identical
/// runs produce byte-identical files.
std::string report_to_json(const StatsReport& r);

/// Parses a report produced by report_to_json.
StatsReport report_from_json(const std::string& text);

/// Header of the experiment summary table.
std::string csv_header();

/// One summary row:
/// policy,profile,total_time_ns,p99_ns,p9999_ns,energy_compute_pj,
/// energy_dm_pj,frac_isp,frac_pud,frac_ifp
std::string csv_row(const StatsReport& r);

/// Audit log as line-delimited JSON.
std::string event_log_to_jsonl(const std::vector<EventLogEntry>& log);

}  // namespace ndpsim

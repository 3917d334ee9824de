#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ndpsim/config.hpp"
#include "ndpsim/offloader.hpp"
#include "ndpsim/resources.hpp"
#include "ndpsim/trace.hpp"
#include "ndpsim/types.hpp"

namespace ndpsim {

/// One line of the run's audit log. Energy-bearing events carry the exact
/// picojoules charged so the ledger can be recomputed from the log.
struct EventLogEntry {
  Ns t = 0;
  std::string kind;      ///< decision_ready|transfer_start|transfer_done|
                         ///< compute_start|compute_done|coherence_sync
  std::int64_t id = -1;  ///< instruction id or move index
  Pj energy_pj = 0;
  std::string energy_category;  ///< "compute_isp"|"compute_pud"|"compute_ifp"|"dm"|""
};

/// Aggregated results of one simulation run.
struct StatsReport {
  std::string policy;
  std::string profile;
  std::uint64_t seed = 0;

  std::int64_t n_instructions = 0;
  std::int64_t n_vector = 0;
  std::int64_t n_scalar = 0;

  Ns total_time_ns = 0;
  Ns mean_latency_ns = 0;
  Ns p50_ns = 0;
  Ns p99_ns = 0;
  Ns p9999_ns = 0;
  Ns max_latency_ns = 0;

  Pj energy_compute_pj = 0;
  Pj energy_dm_pj = 0;
  Pj energy_total_pj = 0;
  std::array<Pj, kNumResources> energy_compute_by_resource{};

  /// Vector-instruction routing counts per resource (scalars excluded).
  std::array<std::int64_t, kNumResources> decisions{};
  double frac_isp = 0.0;
  double frac_pud = 0.0;
  double frac_ifp = 0.0;

  Ns mean_overhead_ns = 0;  ///< dispatcher bookkeeping per vector decision
  Ns max_overhead_ns = 0;

  std::int64_t n_transfers = 0;
  std::int64_t bytes_moved = 0;
  std::int64_t relocations = 0;  ///< operand staging copies inside flash
  std::int64_t coherence_syncs = 0;

  /// One char per instruction in trace order: I (cores), P (DRAM), F (flash),
  /// S (scalar on cores).
  std::string timeline;
};

/// Nearest-rank percentile of an unsorted sample; the percentile is given as
/// the exact rational num/den in percent (99.99% -> 9999/100). Returns 0 for
/// an empty sample.
Ns percentile_ns(std::vector<Ns> sample, std::int64_t num, std::int64_t den);

struct RunOptions {
  Policy policy = Policy::CostMin;
  std::uint64_t seed = 0;       ///< recorded in the report only
  bool keep_event_log = false;  ///< retain the audit log in the result
  bool flush_dirty_at_end = false;  ///< commit all dirty pages after the trace
  /// When set, page contents are carried through every instruction
  /// (functional mode) starting from this image.
  const PageStore* initial_pages = nullptr;
};

struct RunResult {
  StatsReport report;
  std::vector<EventLogEntry> event_log;
  PageStore pages{4096};          ///< final contents (functional mode only)
  std::vector<Ns> latencies_ns;   ///< per-instruction completion latencies
};

/// Runs the trace through the event-driven device model and returns the
/// aggregate report. Deterministic: identical inputs give identical results.
RunResult run_simulation(const Trace& trace, const SimConfig& cfg,
                         const RunOptions& opt);

}  // namespace ndpsim

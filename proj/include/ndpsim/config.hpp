#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ndpsim/types.hpp"

namespace ndpsim {

/// Geometry of the simulated flash back-end.
struct SsdTopology {
  int channels = 8;           ///< independent flash channels
  int dies_per_channel = 8;   ///< dies sharing one channel bus
  int planes_per_die = 2;     ///< planes per die
  int blocks_per_plane = 2048;///< erase blocks per plane
  int pages_per_block = 196;  ///< pages per erase block
  std::int64_t page_size = 4096;            ///< bytes per flash page
  std::int64_t channel_bandwidth = 1'200'000'000; ///< bytes/s per channel

  std::int64_t capacity_pages() const;
  std::int64_t capacity_bytes() const { return capacity_pages() * page_size; }
};

/// Flash array timing parameters (SLC mode), in nanoseconds.
struct FlashTiming {
  Ns t_read_slc = 22'500;      ///< page sense (also the multi-wordline sense)
  Ns t_prog_slc = 400'000;     ///< page program
  Ns t_bers = 3'500'000;       ///< block erase
  Ns t_and_or = 20;            ///< in-latch AND/OR combine
  Ns t_xor = 30;               ///< in-latch XOR combine
  Ns t_latch_transfer = 20;    ///< latch-to-latch move inside a plane
  Ns t_dma = 3'300;            ///< fixed channel DMA setup per transfer
};

/// In-SSD DRAM with bulk bitwise row operations.
struct DramConfig {
  std::int64_t capacity = 2LL * 1024 * 1024 * 1024; ///< bytes
  int banks = 8;                 ///< banks usable in parallel
  std::int64_t row_size = 8192;  ///< bytes per row (bulk-op granule)
  Ns t_bbop = 49;                ///< one in-DRAM bulk row operation
  std::int64_t bus_bandwidth = 3'700'000'000; ///< DRAM<->controller bytes/s
};

/// Controller core complex used for on-controller SIMD execution. Embedded
/// SSD cores expose only their 32-bit register datapath to bulk loops, which
/// is what keeps them unattractive for large vectors.
struct CoreConfig {
  int n_cores = 5;               ///< cores on the controller
  std::int64_t clock_hz = 500'000'000; ///< core clock
  int simd_width_bits = 32;      ///< effective datapath width per core op
  /// Operand loads and the result store issued per micro-op through the
  /// single load/store port; bulk loops pay this on every element batch.
  int mem_cycles_per_op = 3;
  int compute_cores = 1;         ///< cores dedicated to offloaded compute
};

/// Per-event energy costs, in picojoules.
struct EnergyTable {
  Pj e_read_per_channel = 20'500'000; ///< one flash sense (per channel)
  Pj e_and_or_per_kb = 10'000;        ///< latch AND/OR per KiB combined
  Pj e_xor_per_kb = 20'000;           ///< latch XOR per KiB combined
  Pj e_latch_per_kb = 10'000;         ///< latch transfer per KiB moved
  Pj e_dma_per_channel = 7'656'000;   ///< one channel DMA transfer
  Pj e_bbop = 864;                    ///< one in-DRAM bulk row op
  Pj e_isp_per_op = 333;              ///< one core SIMD micro-op
};

/// Fixed bookkeeping charges paid by the dispatcher for every routing
/// decision. The mapping-table probe and the queue scan overlap, so the
/// charged total is max(mapping, scan) + table lookups + transformation.
struct OverheadConfig {
  Ns l2p_dram_ns = 100;        ///< one mapping entry probe, entry cached in DRAM
  Ns l2p_flash_ns = 30'000;    ///< mapping-page fetch when an entry is not cached
  Ns queue_scan_ns = 1'000;    ///< one pass over one resource queue
  Ns dm_table_ns = 100;        ///< movement-cost table lookup
  Ns comp_table_ns = 150;      ///< compute-latency table lookup
  Ns transform_ns = 300;       ///< instruction transformation to native form
  /// Fraction (0..1) of mapping entries resident in DRAM; the rest cost a
  /// mapping-page fetch on first touch of a decision.
  double l2p_resident_fraction = 1.0;
};

/// Offloading policy selection and tuning knobs.
struct OffloaderConfig {
  std::string policy = "costmin";  ///< costmin|bw|dm|ideal|isp|pud|ifp
  Ns bw_window_ns = 100'000;       ///< sliding window for the bandwidth policy
  /// When true, queue/dependence/movement features are forced to zero so the
  /// cost model degenerates to pure compute-latency comparison.
  bool zero_contention_features = false;
  /// Row-op multipliers per vector op (bulk bitwise ops are 1; arithmetic is
  /// synthesized from many bitwise passes).
  std::map<std::string, int> dram_op_rows;
  /// SIMD cycles per native micro-op, per vector op (default 1).
  std::map<std::string, int> core_op_cycles;

  int dram_rows_for(const std::string& op) const;
  int core_cycles_for(const std::string& op) const;
};

/// Engine-level switches.
struct EngineConfig {
  bool colocate_flash_operands = true; ///< cluster multi-operand groups per block
  bool record_event_log = false;       ///< retain the per-event audit log
  bool functional = false;             ///< carry page contents through ops
};

/// Complete simulation configuration.
struct SimConfig {
  SsdTopology topology;
  FlashTiming flash;
  DramConfig dram;
  CoreConfig cores;
  EnergyTable energy;
  OverheadConfig overheads;
  OffloaderConfig offloader;
  EngineConfig engine;

  /// Serializes to a JSON object string (stable key order).
  std::string to_json() const;
  /// Parses a JSON object produced by to_json (unknown keys rejected).
  static SimConfig from_json(const std::string& text);
};

/// Returns the full-size default configuration.
SimConfig default_config();

/// Shrinks the flash geometry so whole-corpus experiments finish on a
/// desktop: 2 channels, 2 dies/channel, 64 blocks/plane. Timing, energy and
/// DRAM parameters are unchanged.
SimConfig desk_scale(SimConfig cfg);

/// Physical location of one flash page.
struct FlashAddress {
  int channel = 0;
  int die = 0;
  int plane = 0;
  int block = 0;
  int page = 0;

  bool operator==(const FlashAddress&) const = default;
};

/// Bijection FlashAddress -> [0, capacity_pages); throws std::out_of_range
/// on any out-of-range field.
std::int64_t linear_page_index(const FlashAddress& a, const SsdTopology& t);

/// Inverse of linear_page_index.
FlashAddress address_of(std::int64_t linear, const SsdTopology& t);

}  // namespace ndpsim

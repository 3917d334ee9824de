#include "ndpsim/config.hpp"

#include <stdexcept>

#include "json.hpp"

namespace ndpsim {

using ordered_json = nlohmann::ordered_json;

std::int64_t SsdTopology::capacity_pages() const {
  return static_cast<std::int64_t>(channels) * dies_per_channel *
         planes_per_die * blocks_per_plane * pages_per_block;
}

namespace {

// Row-op counts for synthesizing each vector op out of bulk DRAM row
// operations. Bitwise ops map 1:1; multi-pass arithmetic is derived from
// bit-serial majority/shift schedules over 32-bit elements.
const std::map<std::string, int> kDefaultDramRows = {
    {"AND", 1},    {"OR", 1},      {"XOR", 1},    {"NOT", 1},
    {"SHL", 1},    {"SHR", 1},     {"COPY", 1},   {"SHUFFLE", 2},
    {"ADD", 64},   {"SUB", 64},    {"MUL", 1536}, {"CMP_GT", 66},
    {"CMP_EQ", 66},{"SELECT", 3},  {"REDUCE_ADD", 768},
};

const std::map<std::string, int> kDefaultCoreCycles = {
    {"MUL", 3},
};

}  // namespace

int OffloaderConfig::dram_rows_for(const std::string& op) const {
  auto it = dram_op_rows.find(op);
  if (it != dram_op_rows.end()) return it->second;
  auto d = kDefaultDramRows.find(op);
  return d != kDefaultDramRows.end() ? d->second : 1;
}

int OffloaderConfig::core_cycles_for(const std::string& op) const {
  auto it = core_op_cycles.find(op);
  if (it != core_op_cycles.end()) return it->second;
  auto d = kDefaultCoreCycles.find(op);
  return d != kDefaultCoreCycles.end() ? d->second : 1;
}

SimConfig default_config() { return SimConfig{}; }

SimConfig desk_scale(SimConfig cfg) {
  cfg.topology.channels = 2;
  cfg.topology.dies_per_channel = 2;
  cfg.topology.blocks_per_plane = 64;
  return cfg;
}

std::int64_t linear_page_index(const FlashAddress& a, const SsdTopology& t) {
  auto check = [](int v, int limit, const char* name) {
    if (v < 0 || v >= limit)
      throw std::out_of_range(std::string("flash address field out of range: ") + name);
  };
  check(a.channel, t.channels, "channel");
  check(a.die, t.dies_per_channel, "die");
  check(a.plane, t.planes_per_die, "plane");
  check(a.block, t.blocks_per_plane, "block");
  check(a.page, t.pages_per_block, "page");
  std::int64_t idx = a.channel;
  idx = idx * t.dies_per_channel + a.die;
  idx = idx * t.planes_per_die + a.plane;
  idx = idx * t.blocks_per_plane + a.block;
  idx = idx * t.pages_per_block + a.page;
  return idx;
}

FlashAddress address_of(std::int64_t linear, const SsdTopology& t) {
  if (linear < 0 || linear >= t.capacity_pages())
    throw std::out_of_range("linear page index out of range");
  FlashAddress a;
  a.page = static_cast<int>(linear % t.pages_per_block);
  linear /= t.pages_per_block;
  a.block = static_cast<int>(linear % t.blocks_per_plane);
  linear /= t.blocks_per_plane;
  a.plane = static_cast<int>(linear % t.planes_per_die);
  linear /= t.planes_per_die;
  a.die = static_cast<int>(linear % t.dies_per_channel);
  linear /= t.dies_per_channel;
  a.channel = static_cast<int>(linear);
  return a;
}

namespace {

ordered_json topology_json(const SsdTopology& t) {
  return ordered_json{{"channels", t.channels},
                      {"dies_per_channel", t.dies_per_channel},
                      {"planes_per_die", t.planes_per_die},
                      {"blocks_per_plane", t.blocks_per_plane},
                      {"pages_per_block", t.pages_per_block},
                      {"page_size", t.page_size},
                      {"channel_bandwidth", t.channel_bandwidth}};
}

ordered_json flash_json(const FlashTiming& f) {
  return ordered_json{{"t_read_slc", f.t_read_slc},
                      {"t_prog_slc", f.t_prog_slc},
                      {"t_bers", f.t_bers},
                      {"t_and_or", f.t_and_or},
                      {"t_xor", f.t_xor},
                      {"t_latch_transfer", f.t_latch_transfer},
                      {"t_dma", f.t_dma}};
}

ordered_json dram_json(const DramConfig& d) {
  return ordered_json{{"capacity", d.capacity},
                      {"banks", d.banks},
                      {"row_size", d.row_size},
                      {"t_bbop", d.t_bbop},
                      {"bus_bandwidth", d.bus_bandwidth}};
}

ordered_json cores_json(const CoreConfig& c) {
  return ordered_json{{"n_cores", c.n_cores},
                      {"clock_hz", c.clock_hz},
                      {"simd_width_bits", c.simd_width_bits},
                      {"mem_cycles_per_op", c.mem_cycles_per_op},
                      {"compute_cores", c.compute_cores}};
}

ordered_json energy_json(const EnergyTable& e) {
  return ordered_json{{"e_read_per_channel", e.e_read_per_channel},
                      {"e_and_or_per_kb", e.e_and_or_per_kb},
                      {"e_xor_per_kb", e.e_xor_per_kb},
                      {"e_latch_per_kb", e.e_latch_per_kb},
                      {"e_dma_per_channel", e.e_dma_per_channel},
                      {"e_bbop", e.e_bbop},
                      {"e_isp_per_op", e.e_isp_per_op}};
}

ordered_json overheads_json(const OverheadConfig& o) {
  return ordered_json{{"l2p_dram_ns", o.l2p_dram_ns},
                      {"l2p_flash_ns", o.l2p_flash_ns},
                      {"queue_scan_ns", o.queue_scan_ns},
                      {"dm_table_ns", o.dm_table_ns},
                      {"comp_table_ns", o.comp_table_ns},
                      {"transform_ns", o.transform_ns},
                      {"l2p_resident_fraction", o.l2p_resident_fraction}};
}

ordered_json offloader_json(const OffloaderConfig& o) {
  return ordered_json{{"policy", o.policy},
                      {"bw_window_ns", o.bw_window_ns},
                      {"zero_contention_features", o.zero_contention_features},
                      {"dram_op_rows", o.dram_op_rows},
                      {"core_op_cycles", o.core_op_cycles}};
}

ordered_json engine_json(const EngineConfig& e) {
  return ordered_json{{"colocate_flash_operands", e.colocate_flash_operands},
                      {"record_event_log", e.record_event_log},
                      {"functional", e.functional}};
}

// Assigns fields from `src` into the section object, rejecting unknown keys.
template <typename Fn>
void parse_section(const ordered_json& root, const char* name, Fn&& fn) {
  if (!root.contains(name)) return;
  const auto& sec = root.at(name);
  if (!sec.is_object())
    throw std::invalid_argument(std::string("config section is not an object: ") + name);
  fn(sec);
}

template <typename T>
void take(const ordered_json& sec, std::map<std::string, bool>& seen,
          const char* key, T& out) {
  seen[key] = true;
  if (sec.contains(key)) out = sec.at(key).get<T>();
}

void reject_unknown(const ordered_json& sec, const std::map<std::string, bool>& seen,
                    const char* section) {
  for (auto it = sec.begin(); it != sec.end(); ++it) {
    if (!seen.count(it.key()))
      throw std::invalid_argument("unknown config key: " + std::string(section) +
                                  "." + it.key());
  }
}

}  // namespace

std::string SimConfig::to_json() const {
  ordered_json j{{"topology", topology_json(topology)},
                 {"flash_timing", flash_json(flash)},
                 {"dram", dram_json(dram)},
                 {"cores", cores_json(cores)},
                 {"energy", energy_json(energy)},
                 {"overheads", overheads_json(overheads)},
                 {"offloader", offloader_json(offloader)},
                 {"engine", engine_json(engine)}};
  return j.dump(2);
}

SimConfig SimConfig::from_json(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config root must be an object");
  static const char* kSections[] = {"topology", "flash_timing", "dram", "cores",
                                    "energy", "overheads", "offloader", "engine"};
  for (auto it = root.begin(); it != root.end(); ++it) {
    bool known = false;
    for (const char* s : kSections) known |= (it.key() == s);
    if (!known) throw std::invalid_argument("unknown config section: " + it.key());
  }

  SimConfig cfg;
  parse_section(root, "topology", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "channels", cfg.topology.channels);
    take(s, seen, "dies_per_channel", cfg.topology.dies_per_channel);
    take(s, seen, "planes_per_die", cfg.topology.planes_per_die);
    take(s, seen, "blocks_per_plane", cfg.topology.blocks_per_plane);
    take(s, seen, "pages_per_block", cfg.topology.pages_per_block);
    take(s, seen, "page_size", cfg.topology.page_size);
    take(s, seen, "channel_bandwidth", cfg.topology.channel_bandwidth);
    reject_unknown(s, seen, "topology");
  });
  parse_section(root, "flash_timing", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "t_read_slc", cfg.flash.t_read_slc);
    take(s, seen, "t_prog_slc", cfg.flash.t_prog_slc);
    take(s, seen, "t_bers", cfg.flash.t_bers);
    take(s, seen, "t_and_or", cfg.flash.t_and_or);
    take(s, seen, "t_xor", cfg.flash.t_xor);
    take(s, seen, "t_latch_transfer", cfg.flash.t_latch_transfer);
    take(s, seen, "t_dma", cfg.flash.t_dma);
    reject_unknown(s, seen, "flash_timing");
  });
  parse_section(root, "dram", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "capacity", cfg.dram.capacity);
    take(s, seen, "banks", cfg.dram.banks);
    take(s, seen, "row_size", cfg.dram.row_size);
    take(s, seen, "t_bbop", cfg.dram.t_bbop);
    take(s, seen, "bus_bandwidth", cfg.dram.bus_bandwidth);
    reject_unknown(s, seen, "dram");
  });
  parse_section(root, "cores", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "n_cores", cfg.cores.n_cores);
    take(s, seen, "clock_hz", cfg.cores.clock_hz);
    take(s, seen, "simd_width_bits", cfg.cores.simd_width_bits);
    take(s, seen, "mem_cycles_per_op", cfg.cores.mem_cycles_per_op);
    take(s, seen, "compute_cores", cfg.cores.compute_cores);
    reject_unknown(s, seen, "cores");
  });
  parse_section(root, "energy", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "e_read_per_channel", cfg.energy.e_read_per_channel);
    take(s, seen, "e_and_or_per_kb", cfg.energy.e_and_or_per_kb);
    take(s, seen, "e_xor_per_kb", cfg.energy.e_xor_per_kb);
    take(s, seen, "e_latch_per_kb", cfg.energy.e_latch_per_kb);
    take(s, seen, "e_dma_per_channel", cfg.energy.e_dma_per_channel);
    take(s, seen, "e_bbop", cfg.energy.e_bbop);
    take(s, seen, "e_isp_per_op", cfg.energy.e_isp_per_op);
    reject_unknown(s, seen, "energy");
  });
  parse_section(root, "overheads", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "l2p_dram_ns", cfg.overheads.l2p_dram_ns);
    take(s, seen, "l2p_flash_ns", cfg.overheads.l2p_flash_ns);
    take(s, seen, "queue_scan_ns", cfg.overheads.queue_scan_ns);
    take(s, seen, "dm_table_ns", cfg.overheads.dm_table_ns);
    take(s, seen, "comp_table_ns", cfg.overheads.comp_table_ns);
    take(s, seen, "transform_ns", cfg.overheads.transform_ns);
    take(s, seen, "l2p_resident_fraction", cfg.overheads.l2p_resident_fraction);
    reject_unknown(s, seen, "overheads");
  });
  parse_section(root, "offloader", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "policy", cfg.offloader.policy);
    take(s, seen, "bw_window_ns", cfg.offloader.bw_window_ns);
    take(s, seen, "zero_contention_features", cfg.offloader.zero_contention_features);
    take(s, seen, "dram_op_rows", cfg.offloader.dram_op_rows);
    take(s, seen, "core_op_cycles", cfg.offloader.core_op_cycles);
    reject_unknown(s, seen, "offloader");
  });
  parse_section(root, "engine", [&](const ordered_json& s) {
    std::map<std::string, bool> seen;
    take(s, seen, "colocate_flash_operands", cfg.engine.colocate_flash_operands);
    take(s, seen, "record_event_log", cfg.engine.record_event_log);
    take(s, seen, "functional", cfg.engine.functional);
    reject_unknown(s, seen, "engine");
  });

  auto positive = [](std::int64_t v, const char* what) {
    if (v <= 0) throw std::invalid_argument(std::string("config value must be positive: ") + what);
  };
  positive(cfg.topology.channels, "topology.channels");
  positive(cfg.topology.dies_per_channel, "topology.dies_per_channel");
  positive(cfg.topology.planes_per_die, "topology.planes_per_die");
  positive(cfg.topology.blocks_per_plane, "topology.blocks_per_plane");
  positive(cfg.topology.pages_per_block, "topology.pages_per_block");
  positive(cfg.topology.page_size, "topology.page_size");
  positive(cfg.topology.channel_bandwidth, "topology.channel_bandwidth");
  positive(cfg.dram.capacity, "dram.capacity");
  positive(cfg.dram.row_size, "dram.row_size");
  positive(cfg.dram.bus_bandwidth, "dram.bus_bandwidth");
  positive(cfg.cores.clock_hz, "cores.clock_hz");
  positive(cfg.cores.simd_width_bits, "cores.simd_width_bits");
  if (cfg.cores.mem_cycles_per_op < 0)
    throw std::invalid_argument("cores.mem_cycles_per_op must be >= 0");
  positive(cfg.cores.compute_cores, "cores.compute_cores");
  if (cfg.overheads.l2p_resident_fraction < 0.0 || cfg.overheads.l2p_resident_fraction > 1.0)
    throw std::invalid_argument("overheads.l2p_resident_fraction must be in [0,1]");
  return cfg;
}

}  // namespace ndpsim

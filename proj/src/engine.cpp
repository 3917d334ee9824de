#include "ndpsim/engine.hpp"

#include <algorithm>
#include <functional>
#include <list>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

namespace ndpsim {

Ns percentile_ns(std::vector<Ns> sample, std::int64_t num, std::int64_t den) {
  if (sample.empty()) return 0;
  if (num <= 0 || den <= 0) throw std::invalid_argument("percentile must be positive");
  std::sort(sample.begin(), sample.end());
  auto n = static_cast<std::int64_t>(sample.size());
  // nearest-rank: smallest rank r with r >= (num/den)% of n
  std::int64_t rank = ceil_div(num * n, den * 100);
  rank = std::min(std::max<std::int64_t>(rank, 1), n);
  return sample[rank - 1];
}

namespace {

// splitmix64; used to pick which mapping entries are DRAM-resident. Fixed
// constants keep the choice identical across runs and platforms.
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum EvKind : int { kTransferDone = 0, kComputeDone = 1, kDispatch = 2, kDecisionStart = 3 };

struct Event {
  Ns t;
  int kind;
  std::int64_t seq;
  std::int64_t idx;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct Waiter {
  bool is_move = false;
  std::int64_t idx = -1;
  bool operator<(const Waiter& o) const {
    return is_move != o.is_move ? is_move < o.is_move : idx < o.idx;
  }
  bool operator==(const Waiter& o) const = default;
};

enum class MoveKind { FlashToDram, CommitInPlace, CommitDrop, Stream };

struct Stage {
  int line;  ///< 0..channels-1 flash channels, `channels` = the DRAM bus
  Ns duration;
};

struct MoveRec {
  MoveKind kind = MoveKind::FlashToDram;
  PageId page = -1;
  std::vector<Stage> stages;
  std::size_t next_stage = 0;
  int pending = 0;
  bool done = false;
  std::int64_t bytes = 0;
  std::vector<Waiter> subscribers;
};

struct ExecRec {
  ResourceKind res = ResourceKind::Core;
  Ns decision_start = 0;
  Ns dispatch_time = 0;
  Ns est_finish = 0;
  Ns comp_est = 0;  ///< pure compute estimate, carried into the exec queue
  int pending = 0;
  bool ready = false;
  bool started = false;
  bool done = false;
  std::vector<Waiter> subscribers;
};

struct PageState {
  PageLocation location = PageLocation::Flash;
  bool dirty = false;
  int version = 0;
  std::int64_t home = -1;  ///< linear flash address
  bool has_barrier = false;
  Waiter barrier;
  std::vector<std::int64_t> open_readers;  ///< exec idxs since the last barrier
};

class Engine {
 public:
  Engine(const Trace& trace, const SimConfig& cfg, const RunOptions& opt)
      : trace_(trace), cfg_(cfg), opt_(opt), policy_(opt.policy),
        functional_(cfg.engine.functional || opt.initial_pages != nullptr),
        store_(trace.header.page_size) {
    if (opt_.initial_pages) store_ = *opt_.initial_pages;
    peaks_ = peak_ingress(cfg_);
    line_free_.assign(cfg_.topology.channels + 1, 0);
    bus_line_ = cfg_.topology.channels;
    dram_capacity_pages_ = std::max<std::int64_t>(1, cfg_.dram.capacity / cfg_.topology.page_size);
    execs_.resize(trace_.instrs.size());
    keep_log_ = opt_.keep_event_log || cfg_.engine.record_event_log;
    init_pages();
  }

  RunResult run();

 private:
  // --- setup -------------------------------------------------------------
  void init_pages();

  // --- event handlers ----------------------------------------------------
  void on_decision_start(std::int64_t i, Ns t);
  void on_dispatch(std::int64_t i, Ns t);
  void on_transfer_done(std::int64_t m, Ns t);
  void on_compute_done(std::int64_t i, Ns t);

  // --- helpers -------------------------------------------------------------
  PageState& page(PageId id) { return pages_.at(id); }
  bool waiter_done(const Waiter& w) const {
    return w.is_move ? moves_[w.idx].done : execs_[w.idx].done;
  }
  void subscribe(const Waiter& dep, const Waiter& waiter, int& pending) {
    if (waiter_done(dep)) return;
    ++pending;
    if (dep.is_move)
      moves_[dep.idx].subscribers.push_back(waiter);
    else
      execs_[dep.idx].subscribers.push_back(waiter);
  }
  void fire_subscribers(std::vector<Waiter>& subs, Ns t);
  void schedule(Ns t, int kind, std::int64_t idx) {
    pq_.push({t, kind, seq_++, idx});
  }
  void log(Ns t, const char* kind, std::int64_t id, Pj pj = 0, const char* cat = "") {
    if (keep_log_) log_.push_back({t, kind, id, pj, cat});
  }
  void charge_compute(ResourceKind r, Pj pj) {
    compute_by_res_[static_cast<int>(r)] += pj;
  }
  std::int64_t channel_of(const PageState& ps) const {
    return address_of(ps.home, cfg_.topology).channel;
  }
  bool l2p_resident(PageId p) const {
    double f = cfg_.overheads.l2p_resident_fraction;
    if (f >= 1.0) return true;
    return (mix64(static_cast<std::uint64_t>(p)) % 10000) <
           static_cast<std::uint64_t>(f * 10000.0);
  }

  // Creates a move for `pg`, chained behind the page's pending barrier, and
  // installs it as the new barrier. Updates the planned page state.
  std::int64_t plan_move(PageId pg, MoveKind kind, Ns now);
  void begin_move(std::int64_t m, Ns t);
  void lru_touch(PageId pg, Ns now);
  void evict_if_needed(Ns now, PageId keep1, PageId keep2);
  void mark_ready(std::int64_t i, Ns t);
  void try_start(ResourceKind r, Ns t);
  void start_compute(std::int64_t i, Ns t);
  Ns relocation_penalty(const VecInstr& vi, std::int64_t* count) const;
  void finish_run(RunResult& out);

  // --- inputs --------------------------------------------------------------
  const Trace& trace_;
  const SimConfig& cfg_;
  const RunOptions& opt_;
  Policy policy_;
  bool functional_;
  bool keep_log_ = false;

  // --- state ---------------------------------------------------------------
  std::map<PageId, PageState> pages_;
  std::vector<ExecRec> execs_;
  std::vector<MoveRec> moves_;
  std::array<ExecQueue, kNumResources> queues_;
  std::array<bool, kNumResources> busy_{};
  std::vector<Ns> line_free_;
  int bus_line_ = 0;
  std::priority_queue<Event, std::vector<Event>, EventLater> pq_;
  std::int64_t seq_ = 0;
  BandwidthWindow bw_;
  std::array<std::int64_t, kNumResources> peaks_{};
  // DRAM page pool, least-recently-planned first.
  std::list<PageId> lru_;
  std::map<PageId, std::list<PageId>::iterator> lru_pos_;
  std::int64_t dram_capacity_pages_ = 0;
  PageStore store_;

  // --- accounting ------------------------------------------------------------
  Ns clock_high_ = 0;
  std::array<Pj, kNumResources> compute_by_res_{};
  Pj energy_dm_ = 0;
  std::vector<Ns> latencies_;
  std::vector<EventLogEntry> log_;
  std::array<std::int64_t, kNumResources> decisions_{};
  std::string timeline_;
  Ns overhead_sum_ = 0, overhead_max_ = 0;
  std::int64_t overhead_n_ = 0;
  std::int64_t n_transfers_ = 0, bytes_moved_ = 0, relocations_ = 0, syncs_ = 0;
};

void Engine::init_pages() {
  // Collect every referenced page.
  std::set<PageId> ids;
  for (const auto& vi : trace_.instrs) {
    ids.insert(vi.srcs.begin(), vi.srcs.end());
    ids.insert(vi.dst);
  }
  const auto& topo = cfg_.topology;
  if (static_cast<std::int64_t>(ids.size()) > topo.capacity_pages())
    throw std::invalid_argument("trace touches more pages than the flash can hold");

  // Group pages that feed the same in-flash-capable instructions so a
  // multi-operand sense finds them in one block. Union-find capped at a
  // block's page count.
  std::map<PageId, PageId> parent;
  std::map<PageId, int> rank_sz;
  for (PageId p : ids) {
    parent[p] = p;
    rank_sz[p] = 1;
  }
  std::function<PageId(PageId)> find = [&](PageId p) {
    while (parent[p] != p) {
      parent[p] = parent[parent[p]];
      p = parent[p];
    }
    return p;
  };
  auto unite = [&](PageId a, PageId b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_sz[a] + rank_sz[b] > topo.pages_per_block) return;  // keep block-sized
    if (a > b) std::swap(a, b);  // deterministic representative: smallest id
    parent[b] = a;
    rank_sz[a] += rank_sz[b];
  };
  if (cfg_.engine.colocate_flash_operands) {
    // Cluster only ops cheap enough that the dispatcher actually sends them
    // to flash; wide arithmetic goes elsewhere and would bloat clusters.
    auto clusterable = [](VecOpType op) {
      switch (op) {
        case VecOpType::AND:
        case VecOpType::XOR:
        case VecOpType::NOT:
        case VecOpType::SHL:
        case VecOpType::SHR:
          return true;
        default:
          return false;
      }
    };
    for (const auto& vi : trace_.instrs) {
      if (vi.is_scalar() || !clusterable(vi.op)) continue;
      for (std::size_t k = 1; k < vi.srcs.size(); ++k) unite(vi.srcs[0], vi.srcs[k]);
      unite(vi.srcs[0], vi.dst);
    }
  }

  // Cluster members per representative, ordered by smallest member id.
  std::map<PageId, std::vector<PageId>> clusters;
  for (PageId p : ids) clusters[find(p)].push_back(p);

  // Multi-page clusters claim whole blocks (descending from the top of each
  // plane); singleton pages are striped page-by-page from the bottom. Both
  // spread round-robin across channels, dies and planes.
  const std::int64_t n_planes =
      static_cast<std::int64_t>(topo.channels) * topo.dies_per_channel * topo.planes_per_die;
  std::vector<std::int64_t> single_block(n_planes, 0);
  std::vector<std::int64_t> single_page(n_planes, 0);
  std::vector<std::int64_t> cluster_block(n_planes, topo.blocks_per_plane);
  std::int64_t plane_cursor_blocks = 0;
  std::int64_t plane_cursor_singles = 0;

  auto plane_address = [&](std::int64_t plane_idx) {
    FlashAddress a;
    a.channel = static_cast<int>(plane_idx % topo.channels);
    std::int64_t rest = plane_idx / topo.channels;
    a.die = static_cast<int>(rest % topo.dies_per_channel);
    a.plane = static_cast<int>(rest / topo.dies_per_channel);
    return a;
  };
  auto plane_full = [&](std::int64_t pl) {
    // Singles grow upward, clusters downward; full when they would meet.
    return single_block[pl] + (single_page[pl] > 0 ? 1 : 0) >= cluster_block[pl];
  };

  auto place_cluster = [&](const std::vector<PageId>& members) {
    for (std::int64_t tries = 0; tries < n_planes; ++tries) {
      std::int64_t pl = (plane_cursor_blocks + tries) % n_planes;
      if (plane_full(pl)) continue;
      FlashAddress a = plane_address(pl);
      a.block = static_cast<int>(cluster_block[pl] - 1);
      for (std::size_t j = 0; j < members.size(); ++j) {
        a.page = static_cast<int>(j);
        pages_[members[j]].home = linear_page_index(a, topo);
      }
      --cluster_block[pl];
      plane_cursor_blocks = (pl + 1) % n_planes;
      return;
    }
    throw std::invalid_argument("flash geometry too small for operand clusters");
  };

  auto place_single = [&](PageId p) {
    for (std::int64_t tries = 0; tries < n_planes; ++tries) {
      std::int64_t pl = (plane_cursor_singles + tries) % n_planes;
      if (plane_full(pl)) continue;
      FlashAddress a = plane_address(pl);
      a.block = static_cast<int>(single_block[pl]);
      a.page = static_cast<int>(single_page[pl]);
      pages_[p].home = linear_page_index(a, topo);
      if (++single_page[pl] >= topo.pages_per_block) {
        single_page[pl] = 0;
        ++single_block[pl];
      }
      plane_cursor_singles = (pl + 1) % n_planes;
      return;
    }
    throw std::invalid_argument("flash geometry too small for this trace");
  };

  for (auto& [rep, members] : clusters) {
    for (PageId p : members) pages_[p];  // default-construct state
    if (members.size() > 1)
      place_cluster(members);
    else
      place_single(members[0]);
  }
}

RunResult Engine::run() {
  timeline_.reserve(trace_.instrs.size());
  latencies_.reserve(trace_.instrs.size());
  if (!trace_.instrs.empty()) schedule(0, kDecisionStart, 0);
  while (!pq_.empty()) {
    Event ev = pq_.top();
    pq_.pop();
    clock_high_ = std::max(clock_high_, ev.t);
    switch (ev.kind) {
      case kDecisionStart: on_decision_start(ev.idx, ev.t); break;
      case kDispatch: on_dispatch(ev.idx, ev.t); break;
      case kTransferDone: on_transfer_done(ev.idx, ev.t); break;
      case kComputeDone: on_compute_done(ev.idx, ev.t); break;
    }
  }
  if (opt_.flush_dirty_at_end) {
    for (auto& [pid, ps] : pages_) {
      if (ps.location == PageLocation::Dram && ps.dirty) {
        std::int64_t m = plan_move(pid, MoveKind::CommitDrop, clock_high_);
        if (moves_[m].pending == 0) begin_move(m, clock_high_);
      }
    }
    while (!pq_.empty()) {
      Event ev = pq_.top();
      pq_.pop();
      clock_high_ = std::max(clock_high_, ev.t);
      if (ev.kind == kTransferDone) on_transfer_done(ev.idx, ev.t);
    }
  }
  RunResult out;
  finish_run(out);
  return out;
}

void Engine::on_decision_start(std::int64_t i, Ns t) {
  const VecInstr& vi = trace_.instrs[i];
  ExecRec& ex = execs_[i];
  ex.decision_start = t;

  Ns overhead = 0;
  if (vi.is_scalar()) {
    ex.res = ResourceKind::Core;
    // Scalars bypass the cost model; still estimate their finish time since
    // later decisions may see them as pending producers.
    Ns comp = compute_latency(ResourceKind::Core, vi, cfg_);
    Ns stream = policy_ == Policy::Ideal
                    ? 0
                    : transfer_ns(vi.src_bytes() + vi.dst_bytes(),
                                  cfg_.dram.bus_bandwidth);
    ex.est_finish = sat_add(comp, stream);  // rebased to dispatch time later
    overhead = policy_ == Policy::Ideal ? 0 : cfg_.overheads.transform_ns;
  } else {
    // Operand snapshots against the planned page state.
    std::vector<OperandView> views;
    views.reserve(vi.srcs.size());
    std::set<PageId> distinct(vi.srcs.begin(), vi.srcs.end());
    bool miss = false;
    for (PageId p : vi.srcs) {
      const PageState& ps = page(p);
      views.push_back({ps.location, ps.dirty, ps.home});
      if (!l2p_resident(p)) miss = true;
    }

    FeatureVector fv;
    fv.op = vi.op;
    for (const auto& v : views) fv.operand_locations.push_back(v.location);
    for (ResourceKind r : kAllResources) {
      int k = static_cast<int>(r);
      fv.compute_latency[k] = compute_latency(r, vi, cfg_);
      fv.move_latency[k] = move_estimate(r, vi, views, cfg_);
      fv.queue_delay[k] = queues_[k].backlog();
    }
    // Remaining time of pending producers, by their own dispatch estimates.
    Ns dep = 0;
    for (InstrId p : vi.producer_ids) {
      const ExecRec& pe = execs_[p];
      if (!pe.done) dep = std::max(dep, std::max<Ns>(0, pe.est_finish - t));
    }
    fv.dep_delay = dep;

    const bool strip_contention =
        policy_ == Policy::Ideal || cfg_.offloader.zero_contention_features;
    if (strip_contention) {
      fv.dep_delay = 0;
      fv.queue_delay.fill(0);
      fv.move_latency.fill(0);
    }

    ChoiceContext ctx;
    ctx.peak_bytes_per_s = peaks_;
    if (policy_ == Policy::Bandwidth) {
      bw_.prune(t, cfg_.offloader.bw_window_ns);
      for (ResourceKind r : kAllResources)
        ctx.window_bytes[static_cast<int>(r)] = bw_.bytes(r);
    }
    if (!strip_contention) {
      bool all_dram = true, all_flash = true;
      for (const auto& v : views) {
        all_dram &= v.location == PageLocation::Dram;
        all_flash &= v.location == PageLocation::Flash ||
                     (v.location == PageLocation::Dram && !v.dirty);
      }
      ctx.resident[static_cast<int>(ResourceKind::Dram)] = all_dram;
      ctx.resident[static_cast<int>(ResourceKind::Flash)] = all_flash;
    }

    ex.res = choose(policy_, fv, ctx);
    ex.est_finish = policy_ == Policy::Ideal
                        ? fv.compute_latency[static_cast<int>(ex.res)]
                        : total_latency(fv, ex.res);

    if (policy_ != Policy::Ideal) {
      overhead = decision_overhead(static_cast<int>(distinct.size()), miss,
                                   cfg_.overheads);
      overhead_sum_ += overhead;
      overhead_max_ = std::max(overhead_max_, overhead);
      ++overhead_n_;
    }
    ++decisions_[static_cast<int>(ex.res)];
  }
  schedule(t + overhead, kDispatch, i);
}

std::int64_t Engine::plan_move(PageId pg, MoveKind kind, Ns now) {
  PageState& ps = page(pg);
  const std::int64_t page_bytes = cfg_.topology.page_size;
  MoveRec m;
  m.kind = kind;
  m.page = pg;
  m.bytes = page_bytes;
  std::int64_t ch = channel_of(ps);
  const auto& f = cfg_.flash;
  switch (kind) {
    case MoveKind::FlashToDram:
      m.stages = {{static_cast<int>(ch),
                   f.t_read_slc + f.t_dma +
                       transfer_ns(page_bytes, cfg_.topology.channel_bandwidth)}};
      break;
    case MoveKind::CommitInPlace:
    case MoveKind::CommitDrop:
      m.stages = {{bus_line_, transfer_ns(page_bytes, cfg_.dram.bus_bandwidth)},
                  {static_cast<int>(ch), f.t_dma + f.t_prog_slc}};
      break;
    case MoveKind::Stream:
      throw std::logic_error("streams are planned separately");
  }
  std::int64_t idx = static_cast<std::int64_t>(moves_.size());
  moves_.push_back(std::move(m));
  MoveRec& rec = moves_.back();
  if (ps.has_barrier && !waiter_done(ps.barrier))
    subscribe(ps.barrier, {true, idx}, rec.pending);
  ps.has_barrier = true;
  ps.barrier = {true, idx};

  // Planned effect on the page, visible to later decisions immediately.
  switch (kind) {
    case MoveKind::FlashToDram:
      ps.location = PageLocation::Dram;
      ps.dirty = false;
      lru_touch(pg, now);
      break;
    case MoveKind::CommitInPlace:
      ps.dirty = false;
      ps.version = 0;
      ++syncs_;
      break;
    case MoveKind::CommitDrop:
      ps.location = PageLocation::Flash;
      ps.dirty = false;
      ps.version = 0;
      ++syncs_;
      if (auto it = lru_pos_.find(pg); it != lru_pos_.end()) {
        lru_.erase(it->second);
        lru_pos_.erase(it);
      }
      break;
    case MoveKind::Stream:
      break;
  }
  return idx;
}

void Engine::lru_touch(PageId pg, Ns now) {
  auto it = lru_pos_.find(pg);
  if (it != lru_pos_.end()) lru_.erase(it->second);
  lru_.push_back(pg);
  lru_pos_[pg] = std::prev(lru_.end());
  (void)now;
}

void Engine::evict_if_needed(Ns now, PageId keep1, PageId keep2) {
  while (static_cast<std::int64_t>(lru_.size()) > dram_capacity_pages_) {
    bool evicted = false;
    for (auto it = lru_.begin(); it != lru_.end(); ++it) {
      PageId cand = *it;
      if (cand == keep1 || cand == keep2) continue;
      PageState& ps = page(cand);
      bool pinned = ps.has_barrier && !waiter_done(ps.barrier);
      for (std::int64_t r : ps.open_readers)
        if (!execs_[r].done) pinned = true;
      if (pinned) continue;
      if (ps.dirty) {
        std::int64_t m = plan_move(cand, MoveKind::CommitDrop, now);
        if (moves_[m].pending == 0) begin_move(m, now);
      } else {
        ps.location = PageLocation::Flash;
        lru_.erase(it);
        lru_pos_.erase(cand);
      }
      evicted = true;
      break;
    }
    if (!evicted) break;  // everything pinned; allow transient overcommit
  }
}

void Engine::on_dispatch(std::int64_t i, Ns t) {
  const VecInstr& vi = trace_.instrs[i];
  ExecRec& ex = execs_[i];
  ex.dispatch_time = t;
  log(t, "decision_ready", vi.id);

  timeline_.push_back(vi.is_scalar() ? 'S'
                      : ex.res == ResourceKind::Core ? 'I'
                      : ex.res == ResourceKind::Dram ? 'P'
                                                     : 'F');

  // Chain the next decision: the dispatcher is serial.
  if (i + 1 < static_cast<std::int64_t>(trace_.instrs.size()))
    schedule(t, kDecisionStart, i + 1);

  const bool ideal = policy_ == Policy::Ideal;
  std::vector<Waiter> deps;
  for (InstrId p : vi.producer_ids)
    if (!execs_[p].done) deps.push_back({false, p});

  if (!ideal) {
    bw_.record(ex.res, t, vi.src_bytes() + vi.dst_bytes());

    // Source pages: wait on in-flight barrier moves and plan our own moves.
    std::set<PageId> distinct(vi.srcs.begin(), vi.srcs.end());
    for (PageId p : distinct) {
      PageState& ps = page(p);
      if (ps.has_barrier && ps.barrier.is_move && !waiter_done(ps.barrier))
        deps.push_back(ps.barrier);
      bool need = false;
      MoveKind mk = MoveKind::FlashToDram;
      switch (ex.res) {
        case ResourceKind::Flash:
          if (ps.location == PageLocation::Dram && ps.dirty) {
            need = true;
            mk = MoveKind::CommitInPlace;
          }
          break;
        case ResourceKind::Dram:
        case ResourceKind::Core:
          if (ps.location == PageLocation::Flash) {
            need = true;
            mk = MoveKind::FlashToDram;
          } else {
            lru_touch(p, t);
          }
          break;
      }
      if (need) {
        std::int64_t m = plan_move(p, mk, t);
        deps.push_back({true, m});
        if (moves_[m].pending == 0) begin_move(m, t);
        if (mk == MoveKind::FlashToDram) evict_if_needed(t, p, vi.dst);
      }
      ps.open_readers.push_back(i);
    }

    // Destination hazards: wait for the previous writer/move and any open
    // readers, then become the page's new barrier.
    PageState& d = page(vi.dst);
    if (d.has_barrier && !waiter_done(d.barrier)) deps.push_back(d.barrier);
    for (std::int64_t r : d.open_readers)
      if (r != i && !execs_[r].done) deps.push_back({false, r});
    d.open_readers.clear();
    d.has_barrier = true;
    d.barrier = {false, i};

    // Planned result placement and coherence bookkeeping.
    switch (ex.res) {
      case ResourceKind::Core:
      case ResourceKind::Dram:
        d.location = PageLocation::Dram;
        d.dirty = true;
        lru_touch(vi.dst, t);
        evict_if_needed(t, vi.dst, -1);
        break;
      case ResourceKind::Flash:
        d.location = PageLocation::Flash;
        d.dirty = false;
        // Any DRAM copy is stale now; drop it from the pool.
        if (auto it = lru_pos_.find(vi.dst); it != lru_pos_.end()) {
          lru_.erase(it->second);
          lru_pos_.erase(it);
        }
        break;
    }
    if (++d.version > 255) {
      // One-byte version counter: force a sync before it wraps.
      if (d.location == PageLocation::Dram && d.dirty) {
        std::int64_t m = plan_move(vi.dst, MoveKind::CommitInPlace, t);
        (void)m;
      }
      d.version = 0;
    }
  } else {
    // The ideal policy still honors write hazards for functional correctness
    // but pays nothing for movement, queueing or bookkeeping.
    PageState& d = page(vi.dst);
    if (d.has_barrier && !waiter_done(d.barrier)) deps.push_back(d.barrier);
    for (std::int64_t r : d.open_readers)
      if (r != i && !execs_[r].done) deps.push_back({false, r});
    d.open_readers.clear();
    d.has_barrier = true;
    d.barrier = {false, i};
    std::set<PageId> distinct(vi.srcs.begin(), vi.srcs.end());
    for (PageId p : distinct) page(p).open_readers.push_back(i);
  }

  std::sort(deps.begin(), deps.end());
  deps.erase(std::unique(deps.begin(), deps.end()), deps.end());

  Ns comp = compute_latency(ex.res, vi, cfg_);
  if (comp >= kNeverNs)
    throw std::logic_error("dispatched an instruction to an incapable resource");
  if (ideal) {
    ex.est_finish = t + ex.est_finish;  // est_finish held pure compute until now
    for (const Waiter& dep : deps) subscribe(dep, {false, i}, ex.pending);
    ex.ready = true;
    if (ex.pending == 0) start_compute(i, t);
    return;
  }
  ex.est_finish = t + ex.est_finish;

  // Core execution streams operands in and the result out over the bus;
  // model it as a final pre-compute stage the instruction waits on.
  std::int64_t stream_bytes =
      ex.res == ResourceKind::Core ? vi.src_bytes() + vi.dst_bytes() : 0;
  // A core entry's execution includes its operand/result stream; count it in
  // the backlog the queue advertises to later decisions.
  ex.comp_est = sat_add(
      comp, stream_bytes > 0
                ? transfer_ns(stream_bytes, cfg_.dram.bus_bandwidth)
                : 0);
  if (stream_bytes > 0) {
    MoveRec m;
    m.kind = MoveKind::Stream;
    m.page = vi.dst;
    m.bytes = stream_bytes;
    m.stages = {{bus_line_, transfer_ns(stream_bytes, cfg_.dram.bus_bandwidth)}};
    std::int64_t sidx = static_cast<std::int64_t>(moves_.size());
    moves_.push_back(std::move(m));
    MoveRec& srec = moves_.back();
    for (const Waiter& dep : deps) subscribe(dep, {true, sidx}, srec.pending);
    subscribe({true, sidx}, {false, i}, ex.pending);
    if (srec.pending == 0) begin_move(sidx, t);
  } else {
    for (const Waiter& dep : deps) subscribe(dep, {false, i}, ex.pending);
  }

  if (ex.pending == 0) mark_ready(i, t);
}

// An instruction joins its resource's run queue once operands are staged and
// producers have retired; pending movement never blocks unrelated ready work.
// The queue backlog therefore measures compute the engine still has to serve.
void Engine::mark_ready(std::int64_t i, Ns t) {
  ExecRec& ex = execs_[i];
  ex.ready = true;
  queues_[static_cast<int>(ex.res)].enqueue(trace_.instrs[i].id, ex.comp_est);
  try_start(ex.res, t);
}

void Engine::begin_move(std::int64_t m, Ns t) {
  MoveRec& rec = moves_[m];
  const Stage& st = rec.stages[rec.next_stage];
  Ns start = std::max(t, line_free_[st.line]);
  line_free_[st.line] = start + st.duration;
  if (rec.next_stage == 0) log(start, "transfer_start", rec.page);
  schedule(start + st.duration, kTransferDone, m);
}

void Engine::on_transfer_done(std::int64_t m, Ns t) {
  MoveRec& rec = moves_[m];
  if (++rec.next_stage < rec.stages.size()) {
    begin_move(m, t);
    return;
  }
  rec.done = true;
  Pj pj = 0;
  switch (rec.kind) {
    case MoveKind::FlashToDram:
      pj = cfg_.energy.e_read_per_channel + cfg_.energy.e_dma_per_channel;
      break;
    case MoveKind::CommitInPlace:
    case MoveKind::CommitDrop:
      pj = cfg_.energy.e_dma_per_channel;
      break;
    case MoveKind::Stream:
      pj = 0;  // bus transfer energy is not modeled separately
      break;
  }
  energy_dm_ += pj;
  ++n_transfers_;
  bytes_moved_ += rec.bytes;
  log(t, "transfer_done", rec.page, pj, pj > 0 ? "dm" : "");
  if (rec.kind == MoveKind::CommitInPlace || rec.kind == MoveKind::CommitDrop)
    log(t, "coherence_sync", rec.page);
  fire_subscribers(rec.subscribers, t);
  // Completion may have unpinned pages of an overcommitted pool.
  if (policy_ != Policy::Ideal) evict_if_needed(t, -1, -1);
}

void Engine::fire_subscribers(std::vector<Waiter>& subs, Ns t) {
  std::vector<Waiter> fired;
  fired.swap(subs);
  for (const Waiter& w : fired) {
    if (w.is_move) {
      MoveRec& m = moves_[w.idx];
      if (--m.pending == 0) begin_move(w.idx, t);
    } else {
      ExecRec& ex = execs_[w.idx];
      if (--ex.pending == 0) {
        if (policy_ == Policy::Ideal) {
          ex.ready = true;
          start_compute(w.idx, t);
        } else {
          mark_ready(w.idx, t);
        }
      }
    }
  }
}

void Engine::try_start(ResourceKind r, Ns t) {
  int k = static_cast<int>(r);
  if (busy_[k] || queues_[k].empty()) return;
  InstrId head = queues_[k].head().id;
  ExecRec& ex = execs_[head];
  if (!ex.ready || ex.started) return;
  busy_[k] = true;
  start_compute(head, t);
}

Ns Engine::relocation_penalty(const VecInstr& vi, std::int64_t* count) const {
  std::vector<std::int64_t> homes;
  homes.reserve(vi.srcs.size());
  for (PageId p : vi.srcs) homes.push_back(pages_.at(p).home);
  *count = staging_relocations(vi.op, homes, cfg_.topology);
  return *count * (cfg_.flash.t_read_slc + cfg_.flash.t_prog_slc);
}

void Engine::start_compute(std::int64_t i, Ns t) {
  const VecInstr& vi = trace_.instrs[i];
  ExecRec& ex = execs_[i];
  ex.started = true;
  Ns dur = compute_latency(ex.res, vi, cfg_);
  if (policy_ != Policy::Ideal && ex.res == ResourceKind::Flash) {
    std::int64_t cnt = 0;
    Ns penalty = relocation_penalty(vi, &cnt);
    if (cnt > 0) {
      dur = sat_add(dur, penalty);
      relocations_ += cnt;
      bytes_moved_ += cnt * cfg_.topology.page_size;
      Pj pj = cnt * (cfg_.energy.e_read_per_channel + cfg_.energy.e_dma_per_channel);
      energy_dm_ += pj;
      log(t, "transfer_done", vi.id, pj, "dm");
    }
  }
  log(t, "compute_start", vi.id);
  schedule(t + dur, kComputeDone, i);
}

void Engine::on_compute_done(std::int64_t i, Ns t) {
  const VecInstr& vi = trace_.instrs[i];
  ExecRec& ex = execs_[i];
  ex.done = true;

  Pj pj = compute_energy(ex.res, vi, cfg_);
  charge_compute(ex.res, pj);
  const char* cat = ex.res == ResourceKind::Core ? "compute_isp"
                    : ex.res == ResourceKind::Dram ? "compute_pud"
                                                   : "compute_ifp";
  log(t, "compute_done", vi.id, pj, cat);

  if (functional_) apply_instruction(vi, store_);
  latencies_.push_back(t - ex.decision_start);

  if (policy_ != Policy::Ideal) {
    int k = static_cast<int>(ex.res);
    queues_[k].dequeue_complete(vi.id);
    busy_[k] = false;
    fire_subscribers(ex.subscribers, t);
    try_start(ex.res, t);
    evict_if_needed(t, -1, -1);
  } else {
    fire_subscribers(ex.subscribers, t);
  }
}

void Engine::finish_run(RunResult& out) {
  StatsReport& rep = out.report;
  rep.policy = to_string(policy_);
  rep.profile = trace_.header.profile;
  rep.seed = opt_.seed;
  rep.n_instructions = trace_.size();
  for (const auto& vi : trace_.instrs)
    (vi.is_scalar() ? rep.n_scalar : rep.n_vector)++;
  rep.total_time_ns = clock_high_;
  if (!latencies_.empty()) {
    Ns sum = 0;
    for (Ns v : latencies_) {
      sum += v;
      rep.max_latency_ns = std::max(rep.max_latency_ns, v);
    }
    rep.mean_latency_ns = sum / static_cast<Ns>(latencies_.size());
    rep.p50_ns = percentile_ns(latencies_, 50, 1);
    rep.p99_ns = percentile_ns(latencies_, 99, 1);
    rep.p9999_ns = percentile_ns(latencies_, 9999, 100);
  }
  rep.energy_compute_by_resource = compute_by_res_;
  rep.energy_compute_pj = compute_by_res_[0] + compute_by_res_[1] + compute_by_res_[2];
  rep.energy_dm_pj = energy_dm_;
  rep.energy_total_pj = rep.energy_compute_pj + rep.energy_dm_pj;
  rep.decisions = decisions_;
  std::int64_t dn = decisions_[0] + decisions_[1] + decisions_[2];
  if (dn > 0) {
    rep.frac_isp = static_cast<double>(decisions_[static_cast<int>(ResourceKind::Core)]) / dn;
    rep.frac_pud = static_cast<double>(decisions_[static_cast<int>(ResourceKind::Dram)]) / dn;
    rep.frac_ifp = static_cast<double>(decisions_[static_cast<int>(ResourceKind::Flash)]) / dn;
  }
  if (overhead_n_ > 0) {
    rep.mean_overhead_ns = overhead_sum_ / overhead_n_;
    rep.max_overhead_ns = overhead_max_;
  }
  rep.n_transfers = n_transfers_;
  rep.bytes_moved = bytes_moved_;
  rep.relocations = relocations_;
  rep.coherence_syncs = syncs_;
  rep.timeline = std::move(timeline_);
  out.event_log = std::move(log_);
  out.latencies_ns = std::move(latencies_);
  if (functional_) out.pages = std::move(store_);
}

}  // namespace

RunResult run_simulation(const Trace& trace, const SimConfig& cfg,
                         const RunOptions& opt) {
  validate_trace(trace);
  if (trace.header.page_size != cfg.topology.page_size)
    throw std::invalid_argument("trace page size does not match the device page size");
  Engine eng(trace, cfg, opt);
  return eng.run();
}

}  // namespace ndpsim

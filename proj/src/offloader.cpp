#include "ndpsim/offloader.hpp"

#include <stdexcept>

namespace ndpsim {

const char* to_string(Policy p) {
  switch (p) {
    case Policy::CostMin: return "costmin";
    case Policy::Bandwidth: return "bw";
    case Policy::DataMovement: return "dm";
    case Policy::Ideal: return "ideal";
    case Policy::FixedCore: return "isp";
    case Policy::FixedDram: return "pud";
    case Policy::FixedFlash: return "ifp";
  }
  throw std::invalid_argument("unknown policy");
}

Policy policy_from_string(const std::string& s) {
  for (Policy p : {Policy::CostMin, Policy::Bandwidth, Policy::DataMovement,
                   Policy::Ideal, Policy::FixedCore, Policy::FixedDram,
                   Policy::FixedFlash})
    if (s == to_string(p)) return p;
  throw std::invalid_argument("unknown policy name: " + s);
}

Ns total_latency(const FeatureVector& fv, ResourceKind r) {
  int k = static_cast<int>(r);
  Ns comp = fv.compute_latency[k];
  if (comp >= kNeverNs) return kNeverNs;
  Ns stall = std::max(fv.dep_delay, fv.queue_delay[k]);
  return sat_add(sat_add(comp, fv.move_latency[k]), stall);
}

Ns move_estimate(ResourceKind r, const VecInstr& i,
                 const std::vector<OperandView>& views, const SimConfig& cfg) {
  const std::int64_t page_bytes = cfg.topology.page_size;
  const auto& f = cfg.flash;
  Ns flash_to_dram = f.t_read_slc + f.t_dma +
                     transfer_ns(page_bytes, cfg.topology.channel_bandwidth);
  Ns dram_to_flash = transfer_ns(page_bytes, cfg.dram.bus_bandwidth) + f.t_dma +
                     f.t_prog_slc;
  Ns total = 0;
  for (const auto& v : views) {
    switch (r) {
      case ResourceKind::Flash:
        // A clean DRAM copy means the flash home copy is still valid.
        if (v.location == PageLocation::Dram && v.dirty)
          total = sat_add(total, dram_to_flash);
        break;
      case ResourceKind::Dram:
        if (v.location == PageLocation::Flash) total = sat_add(total, flash_to_dram);
        break;
      case ResourceKind::Core:
        if (v.location == PageLocation::Flash) total = sat_add(total, flash_to_dram);
        break;
    }
  }
  if (r == ResourceKind::Core) {
    // Operands stream from DRAM through the core and the result streams back.
    total = sat_add(total, transfer_ns(i.src_bytes() + i.dst_bytes(),
                                       cfg.dram.bus_bandwidth));
  }
  if (r == ResourceKind::Flash) {
    // Operands outside the reach of one sense are staged (read + program)
    // before the sense can fire; homes are known from the mapping table.
    std::vector<std::int64_t> homes;
    homes.reserve(views.size());
    for (const auto& v : views) homes.push_back(v.home);
    Ns per_copy = f.t_read_slc + f.t_prog_slc;
    total = sat_add(total,
                    staging_relocations(i.op, homes, cfg.topology) * per_copy);
  }
  return total;
}

Ns decision_overhead(int n_src_pages, bool l2p_miss, const OverheadConfig& o) {
  Ns l2p = l2p_miss ? o.l2p_flash_ns
                    : static_cast<Ns>(n_src_pages) * o.l2p_dram_ns;
  Ns scan = static_cast<Ns>(kNumResources) * o.queue_scan_ns;
  return std::max(l2p, scan) + o.dm_table_ns + o.comp_table_ns + o.transform_ns;
}

void BandwidthWindow::record(ResourceKind r, Ns now, std::int64_t bytes) {
  int k = static_cast<int>(r);
  samples_[k].push_back({now, bytes});
  sums_[k] += bytes;
}

void BandwidthWindow::prune(Ns now, Ns window) {
  for (int k = 0; k < kNumResources; ++k) {
    auto& dq = samples_[k];
    while (!dq.empty() && dq.front().t < now - window) {
      sums_[k] -= dq.front().bytes;
      dq.pop_front();
    }
  }
}

std::array<std::int64_t, kNumResources> peak_ingress(const SimConfig& cfg) {
  std::array<std::int64_t, kNumResources> peaks{};
  peaks[static_cast<int>(ResourceKind::Core)] = cfg.dram.bus_bandwidth;
  peaks[static_cast<int>(ResourceKind::Dram)] = cfg.dram.bus_bandwidth;
  peaks[static_cast<int>(ResourceKind::Flash)] =
      static_cast<std::int64_t>(cfg.topology.channels) *
      cfg.topology.channel_bandwidth;
  return peaks;
}

namespace {

// Fixed preference order for breaking exact ties: DRAM, then flash, then
// cores. Chosen once and documented; any fixed order keeps runs reproducible.
constexpr std::array<ResourceKind, 3> kTieOrder = {
    ResourceKind::Dram, ResourceKind::Flash, ResourceKind::Core};

int tie_rank(ResourceKind r) {
  for (int i = 0; i < 3; ++i)
    if (kTieOrder[i] == r) return i;
  return 3;
}

// True when a beats b for keys (key, residency, fixed order).
bool beats(Ns key_a, ResourceKind a, Ns key_b, ResourceKind b,
           const ChoiceContext& ctx) {
  if (key_a != key_b) return key_a < key_b;
  bool res_a = ctx.resident[static_cast<int>(a)];
  bool res_b = ctx.resident[static_cast<int>(b)];
  if (res_a != res_b) return res_a;
  return tie_rank(a) < tie_rank(b);
}

ResourceKind argmin(const FeatureVector& fv, const ChoiceContext& ctx,
                    Ns (*key)(const FeatureVector&, ResourceKind)) {
  bool have = false;
  ResourceKind best = ResourceKind::Core;
  Ns best_key = kNeverNs;
  for (ResourceKind r : kAllResources) {
    if (fv.compute_latency[static_cast<int>(r)] >= kNeverNs) continue;
    Ns k = key(fv, r);
    if (!have || beats(k, r, best_key, best, ctx)) {
      have = true;
      best = r;
      best_key = k;
    }
  }
  if (!have) return ResourceKind::Core;  // cores run everything
  return best;
}

}  // namespace

ResourceKind choose(Policy p, const FeatureVector& fv, const ChoiceContext& ctx) {
  switch (p) {
    case Policy::CostMin:
      return argmin(fv, ctx, [](const FeatureVector& f, ResourceKind r) {
        return total_latency(f, r);
      });
    case Policy::Ideal:
      return argmin(fv, ctx, [](const FeatureVector& f, ResourceKind r) {
        return f.compute_latency[static_cast<int>(r)];
      });
    case Policy::DataMovement: {
      // Least data movement; break movement ties by compute latency so the
      // baseline is not pathologically silly, then the fixed order.
      bool have = false;
      ResourceKind best = ResourceKind::Core;
      for (ResourceKind r : kAllResources) {
        int k = static_cast<int>(r);
        if (fv.compute_latency[k] >= kNeverNs) continue;
        if (!have) {
          have = true;
          best = r;
          continue;
        }
        int b = static_cast<int>(best);
        if (fv.move_latency[k] != fv.move_latency[b]) {
          if (fv.move_latency[k] < fv.move_latency[b]) best = r;
        } else if (fv.compute_latency[k] != fv.compute_latency[b]) {
          if (fv.compute_latency[k] < fv.compute_latency[b]) best = r;
        } else if (beats(0, r, 0, best, ctx)) {
          best = r;
        }
      }
      return have ? best : ResourceKind::Core;
    }
    case Policy::Bandwidth: {
      // Least utilized resource by window ingress relative to peak rate.
      // Utilizations are compared as exact rationals to stay deterministic.
      bool have = false;
      ResourceKind best = ResourceKind::Core;
      for (ResourceKind r : kAllResources) {
        int k = static_cast<int>(r);
        if (fv.compute_latency[k] >= kNeverNs) continue;
        if (!have) {
          have = true;
          best = r;
          continue;
        }
        int b = static_cast<int>(best);
        auto lhs = static_cast<__int128>(ctx.window_bytes[k]) * ctx.peak_bytes_per_s[b];
        auto rhs = static_cast<__int128>(ctx.window_bytes[b]) * ctx.peak_bytes_per_s[k];
        if (lhs != rhs) {
          if (lhs < rhs) best = r;
        } else if (beats(0, r, 0, best, ctx)) {
          best = r;
        }
      }
      return have ? best : ResourceKind::Core;
    }
    case Policy::FixedCore:
      return ResourceKind::Core;
    case Policy::FixedDram:
      return fv.compute_latency[static_cast<int>(ResourceKind::Dram)] < kNeverNs
                 ? ResourceKind::Dram
                 : ResourceKind::Core;
    case Policy::FixedFlash:
      return fv.compute_latency[static_cast<int>(ResourceKind::Flash)] < kNeverNs
                 ? ResourceKind::Flash
                 : ResourceKind::Core;
  }
  throw std::invalid_argument("unknown policy");
}

}  // namespace ndpsim

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "ndpsim/config.hpp"
#include "ndpsim/resources.hpp"
#include "ndpsim/trace.hpp"
#include "ndpsim/types.hpp"

namespace ndpsim {

/// Where the authoritative copy of a logical page currently lives.
enum class PageLocation { Flash, Dram };

/// Snapshot of one operand page at decision time.
struct OperandView {
  PageLocation location = PageLocation::Flash;
  bool dirty = false;        ///< DRAM copy differs from the flash home copy
  std::int64_t home = -1;    ///< linear flash address of the page's home copy
};

/// Dispatch policies. CostMin is the full cost model; Bandwidth and
/// DataMovement are single-feature baselines; Ideal picks the fastest
/// compute and pays no contention, movement or bookkeeping; the Fixed
/// policies pin everything to one resource (controller cores as fallback).
enum class Policy {
  CostMin,
  Bandwidth,
  DataMovement,
  Ideal,
  FixedCore,
  FixedDram,
  FixedFlash,
};

const char* to_string(Policy p);
Policy policy_from_string(const std::string& s);

/// Per-decision features. Latencies are estimates; kNeverNs marks an
/// unsupported op/resource pair.
struct FeatureVector {
  VecOpType op = VecOpType::AND;
  std::vector<PageLocation> operand_locations;
  Ns dep_delay = 0;  ///< remaining time of pending producers
  std::array<Ns, kNumResources> queue_delay{};
  std::array<Ns, kNumResources> move_latency{};
  std::array<Ns, kNumResources> compute_latency{};
};

/// Estimated completion latency of running the instruction on `r`:
/// compute + movement + the larger of dependence stall and queue backlog.
/// Returns kNeverNs when the resource cannot run the op.
Ns total_latency(const FeatureVector& fv, ResourceKind r);

/// Uncontended movement estimate for running `i` on `r`, given the operand
/// snapshots. Core execution additionally pays to stream operands in and the
/// result out over the DRAM bus.
Ns move_estimate(ResourceKind r, const VecInstr& i,
                 const std::vector<OperandView>& views, const SimConfig& cfg);

/// Bookkeeping time the dispatcher pays for one routing decision. The
/// mapping-table resolution overlaps the queue scan; table lookups and the
/// transformation are serial.
Ns decision_overhead(int n_src_pages, bool l2p_miss, const OverheadConfig& o);

/// Sliding-window ingress accounting for the bandwidth policy.
class BandwidthWindow {
 public:
  void record(ResourceKind r, Ns now, std::int64_t bytes);
  void prune(Ns now, Ns window);
  std::int64_t bytes(ResourceKind r) const { return sums_[static_cast<int>(r)]; }

 private:
  struct Sample {
    Ns t;
    std::int64_t bytes;
  };
  std::array<std::deque<Sample>, kNumResources> samples_;
  std::array<std::int64_t, kNumResources> sums_{};
};

/// Extra inputs some policies need beyond the feature vector.
struct ChoiceContext {
  std::array<std::int64_t, kNumResources> window_bytes{};     ///< bandwidth policy
  std::array<std::int64_t, kNumResources> peak_bytes_per_s{}; ///< bandwidth policy
  std::array<bool, kNumResources> resident{};                 ///< tie-break hint
};

/// Picks the target resource. Deterministic; ties prefer a resource holding
/// every operand, then DRAM before flash before cores.
ResourceKind choose(Policy p, const FeatureVector& fv, const ChoiceContext& ctx);

/// Peak ingress rates used by the bandwidth policy.
std::array<std::int64_t, kNumResources> peak_ingress(const SimConfig& cfg);

}  // namespace ndpsim

#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "ndpsim/config.hpp"
#include "ndpsim/trace.hpp"
#include "ndpsim/types.hpp"

namespace ndpsim {

/// The three in-device compute resources:
///  - Core: controller cores with a short-vector SIMD unit
///  - Dram: bulk row-parallel ops inside the SSD DRAM
///  - Flash: multi-wordline sensing plus latch logic inside the NAND dies
enum class ResourceKind { Core = 0, Dram = 1, Flash = 2 };

inline constexpr int kNumResources = 3;
inline constexpr std::array<ResourceKind, 3> kAllResources = {
    ResourceKind::Core, ResourceKind::Dram, ResourceKind::Flash};

const char* to_string(ResourceKind r);
ResourceKind resource_from_string(const std::string& s);

/// True when the resource can execute the op natively. Cores run everything;
/// DRAM runs all vector ops; flash runs bitwise ops, shifts and bit-serial
/// add/sub/mul only. SCALAR runs only on cores.
bool supports(ResourceKind r, VecOpType op);

/// Simultaneous-sense limits of the flash array.
inline constexpr int kFlashAndFanIn = 48;  ///< wordlines per AND sense (same block)
inline constexpr int kFlashOrFanIn = 4;    ///< blocks per OR sense (same plane)

/// Pure compute latency of `i` on `r`, excluding any data movement or
/// queueing. Returns kNeverNs when the resource cannot run the op.
Ns compute_latency(ResourceKind r, const VecInstr& i, const SimConfig& cfg);

/// Energy consumed by executing `i` on `r`. Zero-length vectors cost zero.
Pj compute_energy(ResourceKind r, const VecInstr& i, const SimConfig& cfg);

/// Native sub-operation batches a vector instruction lowers to.
enum class NativePrimitive {
  CoreSimd,       ///< one SIMD micro-op batch on a controller core
  DramRowOp,      ///< bulk row operations in SSD DRAM
  FlashMwsAnd,    ///< multi-wordline AND sense
  FlashMwsOr,     ///< multi-wordline OR sense across blocks
  FlashLatchXor,  ///< sense + latch XOR combine
  FlashLatchMove, ///< sense + latch transfer (NOT / shifts)
  FlashShiftAdd,  ///< bit-serial latch arithmetic
};

const char* to_string(NativePrimitive p);

struct NativeInstr {
  NativePrimitive primitive = NativePrimitive::CoreSimd;
  std::int64_t repeat_count = 1;       ///< how many sub-operation batches
  std::int64_t sub_vector_length = 1;  ///< elements covered per batch
};

/// Lowers a vector instruction to the native batches of one resource.
/// Invariant: repeat_count * sub_vector_length >= vector_length for every
/// entry. Throws std::invalid_argument when the resource lacks the op.
std::vector<NativeInstr> transform(const VecInstr& i, ResourceKind r,
                                   const SimConfig& cfg);

/// How many operand pages an in-flash execution must first copy to a staging
/// location: an AND sense reaches only wordlines of one block, every other
/// multi-source latch op only pages of one plane. `homes` are the operands'
/// linear flash addresses; the best-populated block/plane stays in place.
std::int64_t staging_relocations(VecOpType op,
                                 const std::vector<std::int64_t>& homes,
                                 const SsdTopology& topo);

/// FIFO dispatch queue of one resource with a running backlog estimate: the
/// sum of estimated latencies of everything enqueued and not yet complete.
class ExecQueue {
 public:
  struct Entry {
    InstrId id = 0;
    Ns est_latency = 0;
  };

  void enqueue(InstrId id, Ns est_latency);
  /// Completes the head entry; throws std::logic_error if `id` is not the head.
  void dequeue_complete(InstrId id);
  bool empty() const { return q_.empty(); }
  std::size_t size() const { return q_.size(); }
  const Entry& head() const;
  Ns backlog() const { return backlog_; }

 private:
  std::deque<Entry> q_;
  Ns backlog_ = 0;
};

}  // namespace ndpsim

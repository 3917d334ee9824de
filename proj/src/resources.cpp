#include "ndpsim/resources.hpp"

#include <map>
#include <stdexcept>

namespace ndpsim {

const char* to_string(ResourceKind r) {
  switch (r) {
    case ResourceKind::Core: return "isp";
    case ResourceKind::Dram: return "pud";
    case ResourceKind::Flash: return "ifp";
  }
  throw std::invalid_argument("unknown resource kind");
}

ResourceKind resource_from_string(const std::string& s) {
  if (s == "isp") return ResourceKind::Core;
  if (s == "pud") return ResourceKind::Dram;
  if (s == "ifp") return ResourceKind::Flash;
  throw std::invalid_argument("unknown resource name: " + s);
}

bool supports(ResourceKind r, VecOpType op) {
  switch (r) {
    case ResourceKind::Core:
      return true;
    case ResourceKind::Dram:
      return op != VecOpType::SCALAR;
    case ResourceKind::Flash:
      switch (op) {
        case VecOpType::AND:
        case VecOpType::OR:
        case VecOpType::XOR:
        case VecOpType::NOT:
        case VecOpType::SHL:
        case VecOpType::SHR:
        case VecOpType::ADD:
        case VecOpType::SUB:
        case VecOpType::MUL:
          return true;
        default:
          return false;
      }
  }
  return false;
}

namespace {

// Number of two-input combining passes implied by the operand count.
std::int64_t fold_count(VecOpType op, std::size_t n_srcs) {
  switch (op) {
    case VecOpType::AND:
    case VecOpType::OR:
    case VecOpType::XOR:
    case VecOpType::ADD:
    case VecOpType::SUB:
    case VecOpType::MUL:
      return std::max<std::int64_t>(1, static_cast<std::int64_t>(n_srcs) - 1);
    case VecOpType::SELECT:
      return 2;  // compare-free blend still needs two passes
    default:
      return 1;
  }
}

// SIMD micro-op batches on a controller core.
std::int64_t core_micro_ops(const VecInstr& i, const SimConfig& cfg) {
  if (i.is_scalar()) return 1;
  std::int64_t bits = i.vector_length * i.element_width;
  std::int64_t chunks = ceil_div(bits, cfg.cores.simd_width_bits);
  return chunks * fold_count(i.op, i.srcs.size());
}

// Bulk row operations in DRAM.
std::int64_t dram_row_ops(const VecInstr& i, const SimConfig& cfg) {
  std::int64_t row_elems = cfg.dram.row_size * 8 / i.element_width;
  std::int64_t sub_ops = ceil_div(i.vector_length, row_elems);
  return sub_ops * cfg.offloader.dram_rows_for(to_string(i.op)) *
         fold_count(i.op, i.srcs.size());
}

std::int64_t flash_senses(const VecInstr& i) {
  auto n = static_cast<std::int64_t>(i.srcs.size());
  switch (i.op) {
    case VecOpType::AND: return ceil_div(n, kFlashAndFanIn);
    case VecOpType::OR: return ceil_div(n, kFlashOrFanIn);
    case VecOpType::XOR:
    case VecOpType::ADD:
    case VecOpType::SUB:
    case VecOpType::MUL:
      return n;  // operands are sensed one wordline at a time
    default:
      return 1;  // unary latch ops
  }
}

Pj per_kb(Pj rate, std::int64_t bytes) { return rate * bytes / 1024; }

}  // namespace

Ns compute_latency(ResourceKind r, const VecInstr& i, const SimConfig& cfg) {
  if (!supports(r, i.is_scalar() ? VecOpType::SCALAR : i.op)) return kNeverNs;
  if (i.vector_length <= 0) return 0;

  switch (r) {
    case ResourceKind::Core: {
      VecOpType sem = i.is_scalar() ? i.scalar_op : i.op;
      std::int64_t per_op = cfg.offloader.core_cycles_for(to_string(sem)) +
                            cfg.cores.mem_cycles_per_op;
      std::int64_t cycles = core_micro_ops(i, cfg) * per_op;
      return ceil_div(cycles * 1'000'000'000LL, cfg.cores.clock_hz);
    }
    case ResourceKind::Dram:
      return dram_row_ops(i, cfg) * cfg.dram.t_bbop;
    case ResourceKind::Flash: {
      const auto& f = cfg.flash;
      std::int64_t senses = flash_senses(i);
      std::int64_t folds = fold_count(i.op, i.srcs.size());
      switch (i.op) {
        case VecOpType::AND:
        case VecOpType::OR:
          return senses * (f.t_read_slc + f.t_and_or);
        case VecOpType::XOR:
          return senses * f.t_read_slc + folds * f.t_xor;
        case VecOpType::NOT:
        case VecOpType::SHL:
        case VecOpType::SHR:
          return f.t_read_slc + f.t_latch_transfer;
        case VecOpType::ADD:
        case VecOpType::SUB:
          return senses * f.t_read_slc + folds * i.element_width * f.t_latch_transfer;
        case VecOpType::MUL:
          return senses * f.t_read_slc +
                 folds * i.element_width * (f.t_dma + f.t_latch_transfer + f.t_and_or);
        default:
          return kNeverNs;
      }
    }
  }
  return kNeverNs;
}

Pj compute_energy(ResourceKind r, const VecInstr& i, const SimConfig& cfg) {
  if (i.vector_length <= 0) return 0;
  if (!supports(r, i.is_scalar() ? VecOpType::SCALAR : i.op)) return 0;
  const auto& e = cfg.energy;

  switch (r) {
    case ResourceKind::Core:
      return e.e_isp_per_op * core_micro_ops(i, cfg);
    case ResourceKind::Dram:
      return e.e_bbop * dram_row_ops(i, cfg);
    case ResourceKind::Flash: {
      std::int64_t bytes = i.vector_length * i.element_width / 8;
      std::int64_t senses = flash_senses(i);
      std::int64_t folds = fold_count(i.op, i.srcs.size());
      Pj sense_pj = senses * e.e_read_per_channel;
      switch (i.op) {
        case VecOpType::AND:
        case VecOpType::OR:
          return sense_pj + senses * per_kb(e.e_and_or_per_kb, bytes);
        case VecOpType::XOR:
          return sense_pj + folds * per_kb(e.e_xor_per_kb, bytes);
        case VecOpType::NOT:
        case VecOpType::SHL:
        case VecOpType::SHR:
          return sense_pj + per_kb(e.e_latch_per_kb, bytes);
        case VecOpType::ADD:
        case VecOpType::SUB:
          return sense_pj + folds * i.element_width * per_kb(e.e_latch_per_kb, bytes);
        case VecOpType::MUL:
          return sense_pj +
                 folds * i.element_width *
                     (e.e_dma_per_channel + per_kb(e.e_latch_per_kb, bytes) +
                      per_kb(e.e_and_or_per_kb, bytes));
        default:
          return 0;
      }
    }
  }
  return 0;
}

std::vector<NativeInstr> transform(const VecInstr& i, ResourceKind r,
                                   const SimConfig& cfg) {
  VecOpType sem = i.is_scalar() ? VecOpType::SCALAR : i.op;
  if (!supports(r, sem))
    throw std::invalid_argument(std::string(to_string(r)) +
                                " cannot execute op " + to_string(sem));
  std::vector<NativeInstr> out;
  switch (r) {
    case ResourceKind::Core: {
      std::int64_t sub = i.is_scalar()
                             ? 1
                             : std::max<std::int64_t>(
                                   1, std::min<std::int64_t>(
                                          i.vector_length,
                                          cfg.cores.simd_width_bits / i.element_width));
      out.push_back({NativePrimitive::CoreSimd,
                     std::max<std::int64_t>(1, core_micro_ops(i, cfg)), sub});
      break;
    }
    case ResourceKind::Dram: {
      std::int64_t row_elems = cfg.dram.row_size * 8 / i.element_width;
      std::int64_t sub = std::max<std::int64_t>(
          1, std::min<std::int64_t>(i.vector_length, row_elems));
      out.push_back({NativePrimitive::DramRowOp,
                     std::max<std::int64_t>(1, ceil_div(i.vector_length, sub)), sub});
      break;
    }
    case ResourceKind::Flash: {
      std::int64_t sub = std::max<std::int64_t>(1, i.vector_length);
      NativePrimitive p;
      std::int64_t repeat = 1;
      switch (i.op) {
        case VecOpType::AND:
          p = NativePrimitive::FlashMwsAnd;
          repeat = flash_senses(i);
          break;
        case VecOpType::OR:
          p = NativePrimitive::FlashMwsOr;
          repeat = flash_senses(i);
          break;
        case VecOpType::XOR:
          p = NativePrimitive::FlashLatchXor;
          repeat = fold_count(i.op, i.srcs.size());
          break;
        case VecOpType::NOT:
        case VecOpType::SHL:
        case VecOpType::SHR:
          p = NativePrimitive::FlashLatchMove;
          break;
        default:
          p = NativePrimitive::FlashShiftAdd;
          repeat = fold_count(i.op, i.srcs.size()) * i.element_width;
          break;
      }
      out.push_back({p, repeat, sub});
      break;
    }
  }
  return out;
}

std::int64_t staging_relocations(VecOpType op,
                                 const std::vector<std::int64_t>& homes,
                                 const SsdTopology& topo) {
  if (homes.size() < 2) return 0;
  std::map<std::int64_t, std::int64_t> by_block, by_plane;
  std::int64_t known = 0;
  for (std::int64_t h : homes) {
    if (h < 0) continue;  // no flash home yet; nothing to stage
    ++known;
    FlashAddress a = address_of(h, topo);
    std::int64_t plane_key =
        (static_cast<std::int64_t>(a.channel) * topo.dies_per_channel + a.die) *
            topo.planes_per_die +
        a.plane;
    by_plane[plane_key]++;
    by_block[plane_key * topo.blocks_per_plane + a.block]++;
  }
  if (known < 2) return 0;
  const auto& groups = op == VecOpType::AND ? by_block : by_plane;
  std::int64_t best = 0;
  for (const auto& [key, cnt] : groups) best = std::max(best, cnt);
  return known - best;
}

const char* to_string(NativePrimitive p) {
  switch (p) {
    case NativePrimitive::CoreSimd: return "core_simd";
    case NativePrimitive::DramRowOp: return "dram_row_op";
    case NativePrimitive::FlashMwsAnd: return "flash_mws_and";
    case NativePrimitive::FlashMwsOr: return "flash_mws_or";
    case NativePrimitive::FlashLatchXor: return "flash_latch_xor";
    case NativePrimitive::FlashLatchMove: return "flash_latch_move";
    case NativePrimitive::FlashShiftAdd: return "flash_shift_add";
  }
  throw std::invalid_argument("unknown native primitive");
}

void ExecQueue::enqueue(InstrId id, Ns est_latency) {
  q_.push_back({id, est_latency});
  backlog_ = sat_add(backlog_, est_latency);
}

void ExecQueue::dequeue_complete(InstrId id) {
  if (q_.empty() || q_.front().id != id)
    throw std::logic_error("dequeue_complete: instruction " + std::to_string(id) +
                           " is not at the head of the queue");
  backlog_ -= q_.front().est_latency;
  if (backlog_ < 0) backlog_ = 0;
  q_.pop_front();
}

const ExecQueue::Entry& ExecQueue::head() const {
  if (q_.empty()) throw std::logic_error("head() on empty queue");
  return q_.front();
}

}  // namespace ndpsim

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ndpsim/types.hpp"

namespace ndpsim {

using PageId = std::int64_t;
using InstrId = std::int64_t;

/// Vector instruction opcodes. SCALAR wraps a single-element op that must run
/// on a controller core.
enum class VecOpType {
  AND, OR, XOR, NOT, SHL, SHR,
  ADD, SUB, MUL,
  CMP_GT, CMP_EQ, SELECT,
  COPY, SHUFFLE, REDUCE_ADD,
  SCALAR,
};

const char* to_string(VecOpType op);
VecOpType vec_op_from_string(const std::string& s);

/// Cost class of an op: bitwise/copy ops are cheap everywhere, multi-pass
/// arithmetic is expensive off-core.
enum class OpClass { Low, Medium, High };
OpClass op_class(VecOpType op);

/// One instruction over whole logical pages. Sources are read element-wise,
/// folded left for multi-operand ops, and the result is written to dst.
struct VecInstr {
  InstrId id = 0;
  VecOpType op = VecOpType::AND;
  std::vector<PageId> srcs;   ///< operand pages (order significant)
  PageId dst = 0;             ///< result page
  std::int64_t vector_length = 0; ///< elements processed
  int element_width = 32;     ///< bits per element (8 or 32)
  std::vector<InstrId> producer_ids; ///< earlier instrs this one reads from

  // SCALAR payload: the wrapped op plus element offsets into each page.
  VecOpType scalar_op = VecOpType::COPY;
  std::vector<std::int64_t> src_offsets;
  std::int64_t dst_offset = 0;

  bool is_scalar() const { return op == VecOpType::SCALAR; }
  /// Bytes read from sources when this instruction executes.
  std::int64_t src_bytes() const;
  /// Bytes written to the destination.
  std::int64_t dst_bytes() const;
};

struct TraceHeader {
  int version = 1;
  std::int64_t page_size = 4096;  ///< bytes per logical page
  std::string profile;            ///< generator profile name, if any
};

struct Trace {
  TraceHeader header;
  std::vector<VecInstr> instrs;

  std::int64_t size() const { return static_cast<std::int64_t>(instrs.size()); }
};

/// Serializes a trace as line-delimited JSON: a header line followed by one
/// line per instruction.
std::string encode_trace(const Trace& t);
void encode_trace(const Trace& t, std::ostream& out);

/// Parses a trace produced by encode_trace. Throws std::invalid_argument on
/// malformed lines, unsupported version, or dangling producer ids.
Trace decode_trace(const std::string& text);
Trace decode_trace(std::istream& in);

/// Structural checks beyond what decode enforces: dense ids from zero,
/// operand arity/width rules, page-sized vectors. Throws on violation.
void validate_trace(const Trace& t);

/// Aggregate shape of a trace, used to check generated workloads against
/// their profile targets.
struct TraceStats {
  std::int64_t n_instructions = 0;
  std::int64_t n_vector = 0;
  std::int64_t n_scalar = 0;
  double vectorizable_fraction = 0.0;
  double frac_low = 0.0;   ///< of vector instructions
  double frac_medium = 0.0;
  double frac_high = 0.0;
  double avg_reuse = 0.0;  ///< source reads per destination write
  std::int64_t working_set_pages = 0;
};

TraceStats trace_stats(const Trace& t);

/// Page contents for functional execution. Pages default to all-zero bytes.
class PageStore {
 public:
  explicit PageStore(std::int64_t page_size) : page_size_(page_size) {}

  std::int64_t page_size() const { return page_size_; }
  /// Returns the page, creating an all-zero page on first touch.
  std::vector<std::uint8_t>& page(PageId id);
  const std::vector<std::uint8_t>* find(PageId id) const;
  const std::map<PageId, std::vector<std::uint8_t>>& pages() const { return pages_; }
  bool operator==(const PageStore& o) const { return pages_ == o.pages_; }

 private:
  std::int64_t page_size_;
  std::map<PageId, std::vector<std::uint8_t>> pages_;
};

/// Executes one instruction's data semantics against the store. This is the
/// single definition of instruction behavior; the simulator's functional mode
/// and the reference interpreter both call it.
void apply_instruction(const VecInstr& i, PageStore& store);

/// Runs a whole trace in program order (the reference result).
PageStore interpret_trace(const Trace& t, const PageStore& initial);

/// Fills every page the trace touches with bytes derived from a fixed hash of
/// (page id, byte index), so functional cross-checks start from reproducible,
/// non-trivial data.
PageStore deterministic_contents(const Trace& t);

}  // namespace ndpsim

#pragma once

// Shared builders for unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "ndpsim/trace.hpp"

namespace ndpsim::testing {

inline VecInstr vec(InstrId id, VecOpType op, std::vector<PageId> srcs, PageId dst,
                    std::int64_t len, int width, std::vector<InstrId> deps = {}) {
  VecInstr i;
  i.id = id;
  i.op = op;
  i.srcs = std::move(srcs);
  i.dst = dst;
  i.vector_length = len;
  i.element_width = width;
  i.producer_ids = std::move(deps);
  return i;
}

inline VecInstr scalar(InstrId id, VecOpType sop, std::vector<PageId> srcs,
                       std::vector<std::int64_t> soffs, PageId dst,
                       std::int64_t doff, int width,
                       std::vector<InstrId> deps = {}) {
  VecInstr i;
  i.id = id;
  i.op = VecOpType::SCALAR;
  i.scalar_op = sop;
  i.srcs = std::move(srcs);
  i.src_offsets = std::move(soffs);
  i.dst = dst;
  i.dst_offset = doff;
  i.vector_length = 1;
  i.element_width = width;
  i.producer_ids = std::move(deps);
  return i;
}

inline Trace make_trace(std::vector<VecInstr> instrs, std::int64_t page_size = 4096) {
  Trace t;
  t.header.page_size = page_size;
  t.instrs = std::move(instrs);
  return t;
}

inline std::uint64_t elem(const PageStore& s, PageId p, std::int64_t idx, int width) {
  const auto* pg = s.find(p);
  if (!pg) return 0;
  std::uint64_t v = 0;
  for (int b = 0; b < width / 8; ++b)
    v |= static_cast<std::uint64_t>((*pg)[idx * (width / 8) + b]) << (8 * b);
  return v;
}

inline void set_elem(PageStore& s, PageId p, std::int64_t idx, int width,
                     std::uint64_t v) {
  auto& pg = s.page(p);
  for (int b = 0; b < width / 8; ++b)
    pg[idx * (width / 8) + b] = static_cast<std::uint8_t>((v >> (8 * b)) & 0xFF);
}

}  // namespace ndpsim::testing

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ndpsim/trace.hpp"

namespace ndpsim {

/// One statement of a loop body: dst[i] = op(srcs...[i]) for every iteration.
/// Statements marked non-vectorizable are lowered to one SCALAR instruction
/// per iteration instead of one vector instruction per strip.
struct KernelStmt {
  VecOpType op = VecOpType::ADD;
  std::vector<std::string> srcs;
  std::string dst;
  bool vectorizable = true;
};

/// A miniature elementwise loop kernel over named arrays.
struct KernelIR {
  std::int64_t n_iterations = 0;
  int element_width = 32;  ///< bits per element (8 or 32)
  std::vector<KernelStmt> body;
};

/// Throws std::invalid_argument if the kernel is malformed (bad widths,
/// non-elementwise ops, wrong arity, empty names).
void validate_kernel(const KernelIR& k);

/// Result of strip-mining a kernel into a page-granular trace.
struct VectorizeResult {
  Trace trace;
  std::map<std::string, PageId> array_base;  ///< array -> first page id
  std::int64_t pages_per_array = 0;          ///< strips (= pages) per array
  std::int64_t elems_per_page = 0;
};

/// Splits the iteration space into page-sized strips. Vectorizable
/// statements become one vector instruction per strip; the rest become one
/// SCALAR instruction per iteration. Emitted vector lengths per statement sum
/// exactly to n_iterations, and producer ids capture last-writer dependences.
VectorizeResult vectorize_kernel(const KernelIR& k, std::int64_t page_size);

/// Array values for the reference interpreter (elements mod 2^width).
using ArrayValues = std::map<std::string, std::vector<std::uint64_t>>;

/// Runs the kernel directly: iterations in order, statements in body order.
/// Arrays missing from `inputs` start zeroed. Returns all arrays.
ArrayValues interpret_kernel(const KernelIR& k, const ArrayValues& inputs);

/// Lays input arrays out into pages per the vectorizer's placement.
PageStore pack_arrays(const VectorizeResult& v, const KernelIR& k,
                      const ArrayValues& inputs, std::int64_t page_size);

/// Reads one array back out of a page store.
std::vector<std::uint64_t> unpack_array(const VectorizeResult& v, const KernelIR& k,
                                        const PageStore& store,
                                        const std::string& name);

}  // namespace ndpsim

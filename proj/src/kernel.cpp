#include "ndpsim/kernel.hpp"

#include <algorithm>
#include <stdexcept>

namespace ndpsim {

namespace {

std::size_t required_arity(VecOpType op) {
  switch (op) {
    case VecOpType::NOT:
    case VecOpType::SHL:
    case VecOpType::SHR:
    case VecOpType::COPY:
      return 1;
    case VecOpType::CMP_GT:
    case VecOpType::CMP_EQ:
      return 2;
    case VecOpType::SELECT:
      return 3;
    case VecOpType::AND:
    case VecOpType::OR:
    case VecOpType::XOR:
    case VecOpType::ADD:
    case VecOpType::SUB:
    case VecOpType::MUL:
      return 0;  // variadic, >= 2
    default:
      throw std::invalid_argument(std::string("op not allowed in a kernel body: ") +
                                  to_string(op));
  }
}

}  // namespace

void validate_kernel(const KernelIR& k) {
  if (k.n_iterations < 0) throw std::invalid_argument("negative iteration count");
  if (k.element_width != 8 && k.element_width != 32)
    throw std::invalid_argument("kernel element width must be 8 or 32");
  if (k.body.empty()) throw std::invalid_argument("kernel body is empty");
  for (const auto& s : k.body) {
    std::size_t need = required_arity(s.op);
    if (need == 0 ? s.srcs.size() < 2 : s.srcs.size() != need)
      throw std::invalid_argument(std::string("bad operand count for ") + to_string(s.op));
    if (s.dst.empty()) throw std::invalid_argument("statement writes unnamed array");
    for (const auto& a : s.srcs)
      if (a.empty()) throw std::invalid_argument("statement reads unnamed array");
  }
}

VectorizeResult vectorize_kernel(const KernelIR& k, std::int64_t page_size) {
  validate_kernel(k);
  if (page_size <= 0) throw std::invalid_argument("page_size must be positive");

  VectorizeResult out;
  out.elems_per_page = page_size * 8 / k.element_width;
  out.pages_per_array = std::max<std::int64_t>(
      1, (k.n_iterations + out.elems_per_page - 1) / out.elems_per_page);
  out.trace.header.page_size = page_size;
  out.trace.header.profile = "kernel";

  // Deterministic array placement: sorted by name, consecutive page runs.
  std::vector<std::string> names;
  for (const auto& s : k.body) {
    names.insert(names.end(), s.srcs.begin(), s.srcs.end());
    names.push_back(s.dst);
  }
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  for (std::size_t i = 0; i < names.size(); ++i)
    out.array_base[names[i]] = static_cast<PageId>(i) * out.pages_per_array;

  std::map<PageId, InstrId> last_writer;
  auto deps_for = [&](const std::vector<PageId>& srcs) {
    std::vector<InstrId> deps;
    for (PageId p : srcs) {
      auto it = last_writer.find(p);
      if (it != last_writer.end() &&
          std::find(deps.begin(), deps.end(), it->second) == deps.end())
        deps.push_back(it->second);
    }
    std::sort(deps.begin(), deps.end());
    return deps;
  };

  const std::int64_t strips =
      (k.n_iterations + out.elems_per_page - 1) / out.elems_per_page;
  InstrId next_id = 0;
  for (std::int64_t strip = 0; strip < strips; ++strip) {
    const std::int64_t begin = strip * out.elems_per_page;
    const std::int64_t len = std::min(out.elems_per_page, k.n_iterations - begin);
    for (const auto& s : k.body) {
      std::vector<PageId> srcs;
      srcs.reserve(s.srcs.size());
      for (const auto& a : s.srcs) srcs.push_back(out.array_base[a] + strip);
      const PageId dst = out.array_base[s.dst] + strip;
      if (s.vectorizable) {
        VecInstr vi;
        vi.id = next_id++;
        vi.op = s.op;
        vi.srcs = srcs;
        vi.dst = dst;
        vi.vector_length = len;
        vi.element_width = k.element_width;
        vi.producer_ids = deps_for(srcs);
        out.trace.instrs.push_back(std::move(vi));
        last_writer[dst] = out.trace.instrs.back().id;
      } else {
        for (std::int64_t e = 0; e < len; ++e) {
          VecInstr si;
          si.id = next_id++;
          si.op = VecOpType::SCALAR;
          si.scalar_op = s.op;
          si.srcs = srcs;
          si.dst = dst;
          si.vector_length = 1;
          si.element_width = k.element_width;
          si.src_offsets.assign(srcs.size(), e);
          si.dst_offset = e;
          si.producer_ids = deps_for(srcs);
          out.trace.instrs.push_back(std::move(si));
          last_writer[dst] = out.trace.instrs.back().id;
        }
      }
    }
  }
  return out;
}

ArrayValues interpret_kernel(const KernelIR& k, const ArrayValues& inputs) {
  validate_kernel(k);
  const std::uint64_t mask =
      k.element_width == 8 ? 0xFFull : 0xFFFFFFFFull;
  ArrayValues arrays = inputs;
  auto arr = [&](const std::string& name) -> std::vector<std::uint64_t>& {
    auto& v = arrays[name];
    if (static_cast<std::int64_t>(v.size()) < k.n_iterations)
      v.resize(k.n_iterations, 0);
    return v;
  };
  // Materialize every referenced array up front so sizes are uniform.
  for (const auto& s : k.body) {
    arr(s.dst);
    for (const auto& a : s.srcs) arr(a);
  }
  for (auto& [name, v] : arrays)
    for (auto& e : v) e &= mask;

  for (std::int64_t it = 0; it < k.n_iterations; ++it) {
    for (const auto& s : k.body) {
      std::vector<std::uint64_t> in(s.srcs.size());
      for (std::size_t j = 0; j < s.srcs.size(); ++j) in[j] = arrays[s.srcs[j]][it];
      std::uint64_t v = 0;
      switch (s.op) {
        case VecOpType::NOT: v = ~in[0] & mask; break;
        case VecOpType::SHL: v = (in[0] << 1) & mask; break;
        case VecOpType::SHR: v = in[0] >> 1; break;
        case VecOpType::CMP_GT: v = in[0] > in[1] ? 1 : 0; break;
        case VecOpType::CMP_EQ: v = in[0] == in[1] ? 1 : 0; break;
        case VecOpType::SELECT: v = in[0] != 0 ? in[1] : in[2]; break;
        case VecOpType::COPY: v = in[0]; break;
        case VecOpType::AND:
        case VecOpType::OR:
        case VecOpType::XOR:
        case VecOpType::ADD:
        case VecOpType::SUB:
        case VecOpType::MUL: {
          v = in[0];
          for (std::size_t j = 1; j < in.size(); ++j) {
            switch (s.op) {
              case VecOpType::AND: v &= in[j]; break;
              case VecOpType::OR: v |= in[j]; break;
              case VecOpType::XOR: v ^= in[j]; break;
              case VecOpType::ADD: v = (v + in[j]) & mask; break;
              case VecOpType::SUB: v = (v - in[j]) & mask; break;
              case VecOpType::MUL: v = (v * in[j]) & mask; break;
              default: break;
            }
          }
          break;
        }
        default:
          throw std::logic_error("unreachable kernel op");
      }
      arrays[s.dst][it] = v & mask;
    }
  }
  return arrays;
}

PageStore pack_arrays(const VectorizeResult& v, const KernelIR& k,
                      const ArrayValues& inputs, std::int64_t page_size) {
  PageStore store(page_size);
  const int bytes = k.element_width / 8;
  for (const auto& [name, values] : inputs) {
    auto it = v.array_base.find(name);
    if (it == v.array_base.end()) continue;
    for (std::size_t e = 0; e < values.size(); ++e) {
      PageId pg = it->second + static_cast<PageId>(e) / v.elems_per_page;
      std::int64_t off = static_cast<std::int64_t>(e) % v.elems_per_page;
      auto& page = store.page(pg);
      for (int b = 0; b < bytes; ++b)
        page[off * bytes + b] =
            static_cast<std::uint8_t>((values[e] >> (8 * b)) & 0xFF);
    }
  }
  return store;
}

std::vector<std::uint64_t> unpack_array(const VectorizeResult& v, const KernelIR& k,
                                        const PageStore& store,
                                        const std::string& name) {
  auto it = v.array_base.find(name);
  if (it == v.array_base.end())
    throw std::invalid_argument("unknown array: " + name);
  const int bytes = k.element_width / 8;
  std::vector<std::uint64_t> out(k.n_iterations, 0);
  for (std::int64_t e = 0; e < k.n_iterations; ++e) {
    PageId pg = it->second + e / v.elems_per_page;
    std::int64_t off = e % v.elems_per_page;
    const auto* page = store.find(pg);
    if (!page) continue;
    std::uint64_t val = 0;
    for (int b = 0; b < bytes; ++b)
      val |= static_cast<std::uint64_t>((*page)[off * bytes + b]) << (8 * b);
    out[e] = val;
  }
  return out;
}

}  // namespace ndpsim

#include "ndpsim/trace.hpp"

#include <array>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ndpsim {

using json = nlohmann::ordered_json;

namespace {

struct OpName {
  VecOpType op;
  const char* name;
};

constexpr std::array<OpName, 16> kOpNames{{
    {VecOpType::AND, "AND"},
    {VecOpType::OR, "OR"},
    {VecOpType::XOR, "XOR"},
    {VecOpType::NOT, "NOT"},
    {VecOpType::SHL, "SHL"},
    {VecOpType::SHR, "SHR"},
    {VecOpType::ADD, "ADD"},
    {VecOpType::SUB, "SUB"},
    {VecOpType::MUL, "MUL"},
    {VecOpType::CMP_GT, "CMP_GT"},
    {VecOpType::CMP_EQ, "CMP_EQ"},
    {VecOpType::SELECT, "SELECT"},
    {VecOpType::COPY, "COPY"},
    {VecOpType::SHUFFLE, "SHUFFLE"},
    {VecOpType::REDUCE_ADD, "REDUCE_ADD"},
    {VecOpType::SCALAR, "SCALAR"},
}};

}  // namespace

const char* to_string(VecOpType op) {
  for (const auto& e : kOpNames)
    if (e.op == op) return e.name;
  throw std::invalid_argument("unknown vector op");
}

VecOpType vec_op_from_string(const std::string& s) {
  for (const auto& e : kOpNames)
    if (s == e.name) return e.op;
  throw std::invalid_argument("unknown vector op name: " + s);
}

OpClass op_class(VecOpType op) {
  switch (op) {
    case VecOpType::AND:
    case VecOpType::OR:
    case VecOpType::XOR:
    case VecOpType::NOT:
    case VecOpType::SHL:
    case VecOpType::SHR:
    case VecOpType::COPY:
      return OpClass::Low;
    case VecOpType::ADD:
    case VecOpType::SUB:
    case VecOpType::CMP_GT:
    case VecOpType::CMP_EQ:
    case VecOpType::SELECT:
    case VecOpType::SHUFFLE:
      return OpClass::Medium;
    case VecOpType::MUL:
    case VecOpType::REDUCE_ADD:
      return OpClass::High;
    case VecOpType::SCALAR:
      break;
  }
  throw std::invalid_argument("SCALAR has no op class; classify its scalar_op");
}

std::int64_t VecInstr::src_bytes() const {
  std::int64_t per_elem = element_width / 8;
  std::int64_t elems = is_scalar() ? 1 : vector_length;
  return static_cast<std::int64_t>(srcs.size()) * elems * per_elem;
}

std::int64_t VecInstr::dst_bytes() const {
  std::int64_t per_elem = element_width / 8;
  std::int64_t elems = is_scalar() ? 1 : vector_length;
  return elems * per_elem;
}

// ---------------------------------------------------------------------------
// Codec

namespace {

json instr_to_json(const VecInstr& i) {
  json j{{"id", i.id},
         {"op", to_string(i.op)},
         {"srcs", i.srcs},
         {"dst", i.dst},
         {"len", i.vector_length},
         {"width", i.element_width},
         {"deps", i.producer_ids}};
  if (i.is_scalar()) {
    j["sop"] = to_string(i.scalar_op);
    j["soffs"] = i.src_offsets;
    j["doff"] = i.dst_offset;
  }
  return j;
}

VecInstr instr_from_json(const json& j, std::int64_t line_no) {
  auto fail = [line_no](const std::string& msg) {
    throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + msg);
  };
  for (const char* key : {"id", "op", "srcs", "dst", "len", "width", "deps"})
    if (!j.contains(key)) fail(std::string("missing field '") + key + "'");
  VecInstr i;
  try {
    i.id = j.at("id").get<InstrId>();
    i.op = vec_op_from_string(j.at("op").get<std::string>());
    i.srcs = j.at("srcs").get<std::vector<PageId>>();
    i.dst = j.at("dst").get<PageId>();
    i.vector_length = j.at("len").get<std::int64_t>();
    i.element_width = j.at("width").get<int>();
    i.producer_ids = j.at("deps").get<std::vector<InstrId>>();
    if (i.is_scalar()) {
      i.scalar_op = vec_op_from_string(j.at("sop").get<std::string>());
      i.src_offsets = j.at("soffs").get<std::vector<std::int64_t>>();
      i.dst_offset = j.at("doff").get<std::int64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("bad field type: ") + e.what());
  }
  for (InstrId d : i.producer_ids)
    if (d < 0 || d >= i.id)
      fail("producer id " + std::to_string(d) + " does not precede instruction " +
           std::to_string(i.id));
  return i;
}

}  // namespace

void encode_trace(const Trace& t, std::ostream& out) {
  json header{{"version", t.header.version},
              {"page_size", t.header.page_size},
              {"profile", t.header.profile}};
  out << header.dump() << '\n';
  for (const auto& i : t.instrs) out << instr_to_json(i).dump() << '\n';
}

std::string encode_trace(const Trace& t) {
  std::ostringstream os;
  encode_trace(t, os);
  return os.str();
}

Trace decode_trace(std::istream& in) {
  std::string line;
  std::int64_t line_no = 0;
  Trace t;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::invalid_argument("trace line " + std::to_string(line_no) +
                                  ": not valid JSON: " + e.what());
    }
    if (!have_header) {
      if (!j.contains("version"))
        throw std::invalid_argument("trace header missing 'version'");
      int v = j.at("version").get<int>();
      if (v != 1)
        throw std::invalid_argument("unsupported trace version " + std::to_string(v));
      t.header.version = v;
      if (j.contains("page_size")) t.header.page_size = j.at("page_size").get<std::int64_t>();
      if (j.contains("profile")) t.header.profile = j.at("profile").get<std::string>();
      have_header = true;
      continue;
    }
    t.instrs.push_back(instr_from_json(j, line_no));
  }
  if (!have_header) throw std::invalid_argument("trace has no header line");
  return t;
}

Trace decode_trace(const std::string& text) {
  std::istringstream is(text);
  return decode_trace(is);
}

void validate_trace(const Trace& t) {
  if (t.header.page_size <= 0) throw std::invalid_argument("page_size must be positive");
  std::int64_t expect_id = 0;
  for (const auto& i : t.instrs) {
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("instruction " + std::to_string(i.id) + ": " + msg);
    };
    if (i.id != expect_id++)
      throw std::invalid_argument("instruction ids must be dense from zero (got " +
                                  std::to_string(i.id) + ", expected " +
                                  std::to_string(expect_id - 1) + ")");
    if (i.element_width != 8 && i.element_width != 32)
      fail("element width must be 8 or 32");
    if (i.vector_length < 0) fail("negative vector length");
    std::int64_t page_elems = t.header.page_size * 8 / i.element_width;
    if (!i.is_scalar() && i.vector_length > page_elems)
      fail("vector does not fit one page");
    if (i.srcs.empty()) fail("instruction has no source operands");
    VecOpType sem = i.is_scalar() ? i.scalar_op : i.op;
    std::size_t n = i.srcs.size();
    switch (sem) {
      case VecOpType::NOT:
      case VecOpType::SHL:
      case VecOpType::SHR:
      case VecOpType::COPY:
      case VecOpType::SHUFFLE:
      case VecOpType::REDUCE_ADD:
        if (n != 1) fail("unary op needs exactly one source");
        break;
      case VecOpType::CMP_GT:
      case VecOpType::CMP_EQ:
        if (n != 2) fail("compare needs exactly two sources");
        break;
      case VecOpType::SELECT:
        if (n != 3) fail("SELECT needs exactly three sources");
        break;
      case VecOpType::SCALAR:
        fail("nested SCALAR op");
        break;
      default:
        if (n < 2) fail("fold op needs at least two sources");
        break;
    }
    if (i.is_scalar()) {
      if (i.vector_length != 1) fail("SCALAR must have vector_length 1");
      if (i.src_offsets.size() != n) fail("SCALAR offsets must match sources");
      for (std::int64_t off : i.src_offsets)
        if (off < 0 || off >= page_elems) fail("SCALAR source offset outside page");
      if (i.dst_offset < 0 || i.dst_offset >= page_elems)
        fail("SCALAR destination offset outside page");
    }
    for (PageId p : i.srcs)
      if (p < 0) fail("negative source page id");
    if (i.dst < 0) fail("negative destination page id");
  }
}

TraceStats trace_stats(const Trace& t) {
  TraceStats s;
  std::set<PageId> pages;
  std::int64_t reads = 0;
  std::int64_t low = 0, med = 0, high = 0;
  for (const auto& i : t.instrs) {
    ++s.n_instructions;
    if (i.is_scalar()) {
      ++s.n_scalar;
    } else {
      ++s.n_vector;
      switch (op_class(i.op)) {
        case OpClass::Low: ++low; break;
        case OpClass::Medium: ++med; break;
        case OpClass::High: ++high; break;
      }
    }
    reads += static_cast<std::int64_t>(i.srcs.size());
    pages.insert(i.srcs.begin(), i.srcs.end());
    pages.insert(i.dst);
  }
  if (s.n_instructions > 0) {
    s.vectorizable_fraction = static_cast<double>(s.n_vector) / s.n_instructions;
    s.avg_reuse = static_cast<double>(reads) / s.n_instructions;
  }
  if (s.n_vector > 0) {
    s.frac_low = static_cast<double>(low) / s.n_vector;
    s.frac_medium = static_cast<double>(med) / s.n_vector;
    s.frac_high = static_cast<double>(high) / s.n_vector;
  }
  s.working_set_pages = static_cast<std::int64_t>(pages.size());
  return s;
}

// ---------------------------------------------------------------------------
// Functional semantics

std::vector<std::uint8_t>& PageStore::page(PageId id) {
  auto it = pages_.find(id);
  if (it == pages_.end())
    it = pages_.emplace(id, std::vector<std::uint8_t>(page_size_, 0)).first;
  return it->second;
}

const std::vector<std::uint8_t>* PageStore::find(PageId id) const {
  auto it = pages_.find(id);
  return it == pages_.end() ? nullptr : &it->second;
}

namespace {

std::uint64_t read_elem(const std::vector<std::uint8_t>& page, std::int64_t idx,
                        int width) {
  std::int64_t byte = idx * (width / 8);
  std::uint64_t v = 0;
  for (int b = 0; b < width / 8; ++b)
    v |= static_cast<std::uint64_t>(page[byte + b]) << (8 * b);
  return v;
}

void write_elem(std::vector<std::uint8_t>& page, std::int64_t idx, int width,
                std::uint64_t v) {
  std::int64_t byte = idx * (width / 8);
  for (int b = 0; b < width / 8; ++b)
    page[byte + b] = static_cast<std::uint8_t>((v >> (8 * b)) & 0xFF);
}

std::uint64_t width_mask(int width) {
  return width == 8 ? 0xFFull : 0xFFFFFFFFull;
}

std::uint64_t fold2(VecOpType op, std::uint64_t a, std::uint64_t b,
                    std::uint64_t mask) {
  switch (op) {
    case VecOpType::AND: return a & b;
    case VecOpType::OR: return a | b;
    case VecOpType::XOR: return a ^ b;
    case VecOpType::ADD: return (a + b) & mask;
    case VecOpType::SUB: return (a - b) & mask;
    case VecOpType::MUL: return (a * b) & mask;
    default: throw std::logic_error("fold2 on non-fold op");
  }
}

// Computes one output element at logical index `idx` given per-source values.
std::uint64_t eval_elem(VecOpType op, const std::vector<std::uint64_t>& in,
                        std::uint64_t mask) {
  switch (op) {
    case VecOpType::AND:
    case VecOpType::OR:
    case VecOpType::XOR:
    case VecOpType::ADD:
    case VecOpType::SUB:
    case VecOpType::MUL: {
      std::uint64_t acc = in[0];
      for (std::size_t k = 1; k < in.size(); ++k) acc = fold2(op, acc, in[k], mask);
      return acc & mask;
    }
    case VecOpType::NOT: return ~in[0] & mask;
    case VecOpType::SHL: return (in[0] << 1) & mask;
    case VecOpType::SHR: return (in[0] & mask) >> 1;
    case VecOpType::CMP_GT: return in[0] > in[1] ? 1 : 0;
    case VecOpType::CMP_EQ: return in[0] == in[1] ? 1 : 0;
    case VecOpType::SELECT: return in[0] != 0 ? in[1] : in[2];
    case VecOpType::COPY: return in[0] & mask;
    default: throw std::logic_error("eval_elem on positional op");
  }
}

}  // namespace

void apply_instruction(const VecInstr& i, PageStore& store) {
  const int width = i.element_width;
  const std::uint64_t mask = width_mask(width);

  if (i.is_scalar()) {
    std::vector<std::uint64_t> in(i.srcs.size());
    for (std::size_t k = 0; k < i.srcs.size(); ++k)
      in[k] = read_elem(store.page(i.srcs[k]), i.src_offsets[k], width) & mask;
    std::uint64_t v = i.scalar_op == VecOpType::SHUFFLE || i.scalar_op == VecOpType::REDUCE_ADD
                          ? (in[0] & mask)  // degenerate single-element forms
                          : eval_elem(i.scalar_op, in, mask);
    write_elem(store.page(i.dst), i.dst_offset, width, v);
    return;
  }

  const std::int64_t len = i.vector_length;
  // Snapshot sources so in-place updates (dst aliasing a src) stay correct.
  std::vector<std::vector<std::uint64_t>> in(i.srcs.size());
  for (std::size_t k = 0; k < i.srcs.size(); ++k) {
    const auto& pg = store.page(i.srcs[k]);
    in[k].resize(len);
    for (std::int64_t e = 0; e < len; ++e) in[k][e] = read_elem(pg, e, width) & mask;
  }
  std::vector<std::uint64_t> out(len, 0);
  switch (i.op) {
    case VecOpType::SHUFFLE:
      for (std::int64_t e = 0; e < len; ++e) out[e] = in[0][(e + 1) % len];
      break;
    case VecOpType::REDUCE_ADD: {
      std::uint64_t acc = 0;
      for (std::int64_t e = 0; e < len; ++e) acc = (acc + in[0][e]) & mask;
      if (len > 0) out[0] = acc;
      break;
    }
    default: {
      std::vector<std::uint64_t> vals(i.srcs.size());
      for (std::int64_t e = 0; e < len; ++e) {
        for (std::size_t k = 0; k < i.srcs.size(); ++k) vals[k] = in[k][e];
        out[e] = eval_elem(i.op, vals, mask);
      }
      break;
    }
  }
  auto& dst = store.page(i.dst);
  for (std::int64_t e = 0; e < len; ++e) write_elem(dst, e, width, out[e]);
}

PageStore interpret_trace(const Trace& t, const PageStore& initial) {
  PageStore store = initial;
  for (const auto& i : t.instrs) apply_instruction(i, store);
  return store;
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

PageStore deterministic_contents(const Trace& t) {
  PageStore store(t.header.page_size);
  std::set<PageId> touched;
  for (const auto& i : t.instrs) {
    for (PageId p : i.srcs) touched.insert(p);
    touched.insert(i.dst);
  }
  for (PageId p : touched) {
    auto& bytes = store.page(p);
    for (std::size_t k = 0; k < bytes.size(); k += 8) {
      std::uint64_t v = mix64(static_cast<std::uint64_t>(p) * 0x100000001ull + k);
      for (std::size_t b = 0; b < 8 && k + b < bytes.size(); ++b)
        bytes[k + b] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
  return store;
}

}  // namespace ndpsim

#include "ndpsim/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ndpsim {

const std::vector<WorkloadProfile>& builtin_profiles() {
  // name, vectorizable%, reuse, low%, medium%, high%, width, accum, length.
  // Ciphers/hashes add at most a few words per step (round keys, counters,
  // hash mixing); stencil and tensor kernels form long accumulation chains.
  static const std::vector<WorkloadProfile> kProfiles = {
      {"aes_ctr", 65.0, 15.2, 87.0, 13.0, 0.0, 8, 3, 100'000},
      {"xor_filter", 16.0, 2.0, 1.0, 98.0, 1.0, 32, 3, 100'000},
      {"heat3d", 95.0, 16.0, 0.0, 60.0, 40.0, 32, 48, 100'000},
      {"jacobi1d", 95.0, 3.0, 0.0, 67.0, 33.0, 32, 8, 100'000},
      {"llama_infer", 70.0, 1.8, 0.0, 53.0, 47.0, 8, 8, 100'000},
      {"llm_train", 60.0, 5.2, 0.0, 88.0, 12.0, 8, 16, 100'000},
  };
  return kProfiles;
}

const WorkloadProfile& profile_by_name(const std::string& name) {
  for (const auto& p : builtin_profiles())
    if (p.name == name) return p;
  throw std::invalid_argument("unknown workload profile: " + name);
}

namespace {

constexpr std::int64_t kGroupPages = 48;   ///< locality group == one flash block's worth
constexpr std::int64_t kGroupRecent = 16;  ///< per-group recent-write ring
constexpr std::int64_t kGlobalRecent = 256;

struct WeightedOp {
  VecOpType op;
  int weight;  ///< per ten-thousand
};

// Op choices within each cost class. OR, COPY and SHUFFLE are legal trace ops
// but are not emitted by the synthesizer; their execution paths are covered
// by dedicated tests.
constexpr WeightedOp kLowOps[] = {{VecOpType::AND, 4500},
                                  {VecOpType::XOR, 4500},
                                  {VecOpType::NOT, 400},
                                  {VecOpType::SHL, 300},
                                  {VecOpType::SHR, 300}};
constexpr WeightedOp kMediumOps[] = {{VecOpType::ADD, 5500},
                                     {VecOpType::SUB, 1500},
                                     {VecOpType::CMP_GT, 1000},
                                     {VecOpType::CMP_EQ, 1000},
                                     {VecOpType::SELECT, 1000}};
constexpr WeightedOp kHighOps[] = {{VecOpType::MUL, 8000},
                                   {VecOpType::REDUCE_ADD, 2000}};

struct ArityRange {
  std::int64_t lo, hi;
};

ArityRange arity_range(VecOpType op, int max_accumulate) {
  switch (op) {
    case VecOpType::AND: return {2, 44};
    case VecOpType::XOR: return {2, 8};
    case VecOpType::ADD:
    case VecOpType::SUB:
      return {2, std::max<std::int64_t>(2, max_accumulate)};
    case VecOpType::MUL: return {2, 2};
    case VecOpType::CMP_GT:
    case VecOpType::CMP_EQ: return {2, 2};
    case VecOpType::SELECT: return {3, 3};
    default: return {1, 1};
  }
}

class Synth {
 public:
  Synth(const WorkloadProfile& p, const GenerateOptions& o)
      : prof_(p), opt_(o), rng_(o.seed) {
    n_ = o.n_instructions > 0 ? o.n_instructions : p.default_instructions;
    // Default footprint scales with trace length but is capped at 16 MiB of
    // pages: working sets fit device DRAM, as in the modeled system, so
    // contention comes from queueing rather than cache thrash.
    ws_ = o.working_set_pages > 0
              ? o.working_set_pages
              : std::clamp<std::int64_t>(n_ / 2, 64, 4096);
    elems_ = o.page_size * 8 / p.element_width;
    n_groups_ = std::max<std::int64_t>(1, (ws_ + kGroupPages - 1) / kGroupPages);
    groups_.resize(n_groups_);
    for (std::int64_t g = 0; g < n_groups_; ++g) {
      groups_[g].base = g * kGroupPages;
      groups_[g].size = std::min(kGroupPages, ws_ - groups_[g].base);
    }
    last_writer_.assign(ws_, -1);
  }

  Trace build();

 private:
  struct Group {
    PageId base = 0;
    std::int64_t size = 0;
    std::int64_t write_cursor = 0;
    std::vector<PageId> recent;  ///< ring of recent destinations
    std::size_t recent_pos = 0;
  };

  std::uint64_t roll(std::uint64_t bound) { return rng_() % bound; }

  VecOpType pick_op(const WeightedOp* ops, std::size_t count) {
    std::uint64_t r = roll(10000);
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < count; ++k) {
      acc += ops[k].weight;
      if (r < acc) return ops[k].op;
    }
    return ops[count - 1].op;
  }

  OpClass pick_class() {
    double r = static_cast<double>(roll(1000000)) / 10000.0;  // 0..100
    if (r < prof_.mix_low) return OpClass::Low;
    if (r < prof_.mix_low + prof_.mix_medium) return OpClass::Medium;
    return OpClass::High;
  }

  void push_recent(Group& g, PageId p) {
    if (g.recent.size() < kGroupRecent) {
      g.recent.push_back(p);
    } else {
      g.recent[g.recent_pos] = p;
      g.recent_pos = (g.recent_pos + 1) % kGroupRecent;
    }
  }
  void push_global(PageId p) {
    if (global_recent_.size() < kGlobalRecent) {
      global_recent_.push_back(p);
    } else {
      global_recent_[global_pos_] = p;
      global_pos_ = (global_pos_ + 1) % kGlobalRecent;
    }
  }

  // Collects `want` distinct pages. Group-local ops pull from the current
  // group's recent writes, its hot leading pages, then cold pages in group
  // order. Cross-group ops favor recent writes anywhere (stencil-like),
  // falling back to uniform picks.
  std::vector<PageId> pick_sources(std::int64_t want, bool group_local) {
    std::vector<PageId> out;
    auto add = [&](PageId p) {
      if (p < 0 || p >= ws_) return;
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
    };
    Group& g = groups_[cur_group_];
    if (group_local) {
      for (auto it = g.recent.rbegin();
           it != g.recent.rend() && static_cast<std::int64_t>(out.size()) < want; ++it)
        add(*it);
      for (std::int64_t h = 0;
           h < std::min<std::int64_t>(4, g.size) &&
           static_cast<std::int64_t>(out.size()) < want;
           ++h)
        add(g.base + h);
      std::int64_t probe = static_cast<std::int64_t>(roll(g.size));
      for (std::int64_t k = 0;
           k < g.size && static_cast<std::int64_t>(out.size()) < want; ++k)
        add(g.base + (probe + k) % g.size);
    } else {
      for (auto it = global_recent_.rbegin();
           it != global_recent_.rend() &&
           static_cast<std::int64_t>(out.size()) < want * 6 / 10 + 1;
           ++it)
        add(*it);
      for (auto it = g.recent.rbegin();
           it != g.recent.rend() && static_cast<std::int64_t>(out.size()) < want; ++it)
        add(*it);
      std::int64_t guard = 0;
      while (static_cast<std::int64_t>(out.size()) < want && guard++ < want * 8)
        add(static_cast<PageId>(roll(ws_)));
      std::int64_t probe = static_cast<std::int64_t>(roll(ws_));
      for (std::int64_t k = 0;
           k < ws_ && static_cast<std::int64_t>(out.size()) < want; ++k)
        add((probe + k) % ws_);
    }
    return out;
  }

  PageId next_dst() {
    Group& g = groups_[cur_group_];
    PageId dst = g.base + g.write_cursor;
    g.write_cursor = (g.write_cursor + 1) % g.size;
    return dst;
  }

  const WorkloadProfile& prof_;
  const GenerateOptions& opt_;
  std::mt19937_64 rng_;
  std::int64_t n_ = 0, ws_ = 0, elems_ = 0, n_groups_ = 0;
  std::vector<Group> groups_;
  std::vector<PageId> global_recent_;
  std::size_t global_pos_ = 0;
  std::vector<InstrId> last_writer_;
  std::int64_t cur_group_ = 0;
};

Trace Synth::build() {
  Trace t;
  t.header.page_size = opt_.page_size;
  t.header.profile = prof_.name;
  t.instrs.reserve(n_);

  double vec_acc = 0.0;
  const double pv = prof_.vectorizable_pct / 100.0;
  const double reuse = prof_.avg_reuse;
  std::int64_t reads_total = 0;

  for (std::int64_t i = 0; i < n_; ++i) {
    // Occasional phase change to a different locality group.
    if (roll(1000) < 20) cur_group_ = static_cast<std::int64_t>(roll(n_groups_));

    vec_acc += pv;
    bool is_vec = vec_acc >= 1.0;
    if (is_vec) vec_acc -= 1.0;

    // Cumulative controller: how many reads this instruction should issue to
    // keep the running reads/writes ratio on target.
    double want_d = reuse * static_cast<double>(i + 1) - static_cast<double>(reads_total);
    std::int64_t want = std::llround(want_d);

    VecInstr vi;
    vi.id = static_cast<InstrId>(i);
    vi.element_width = prof_.element_width;

    if (is_vec) {
      OpClass cls = pick_class();
      VecOpType op = cls == OpClass::Low
                         ? pick_op(kLowOps, std::size(kLowOps))
                         : cls == OpClass::Medium
                               ? pick_op(kMediumOps, std::size(kMediumOps))
                               : pick_op(kHighOps, std::size(kHighOps));
      ArityRange ar = arity_range(op, prof_.max_accumulate);
      std::int64_t hi = std::min(ar.hi, ws_);
      std::int64_t arity = std::clamp(want, ar.lo, std::max(ar.lo, hi));
      bool group_local = op_class(op) == OpClass::Low;
      vi.op = op;
      vi.srcs = pick_sources(arity, group_local);
      // SELECT and compares have a fixed shape; others tolerate a short pick.
      if (static_cast<std::int64_t>(vi.srcs.size()) < ar.lo)
        throw std::logic_error("source pool smaller than minimum arity");
      vi.vector_length = elems_;
      vi.dst = next_dst();
    } else {
      std::int64_t arity = std::clamp<std::int64_t>(want, 1, 2);
      vi.op = VecOpType::SCALAR;
      vi.scalar_op = arity == 1 ? (roll(2) == 0 ? VecOpType::COPY : VecOpType::NOT)
                     : roll(10) < 4   ? VecOpType::ADD
                     : roll(10) < 7   ? VecOpType::XOR
                     : roll(10) < 9   ? VecOpType::MUL
                                      : VecOpType::CMP_GT;
      vi.srcs = pick_sources(arity, true);
      if (static_cast<std::int64_t>(vi.srcs.size()) > arity) vi.srcs.resize(arity);
      vi.vector_length = 1;
      for (std::size_t k = 0; k < vi.srcs.size(); ++k)
        vi.src_offsets.push_back(static_cast<std::int64_t>(roll(elems_)));
      vi.dst = next_dst();
      vi.dst_offset = static_cast<std::int64_t>(roll(elems_));
    }

    reads_total += static_cast<std::int64_t>(vi.srcs.size());
    for (PageId p : vi.srcs) {
      InstrId w = last_writer_[p];
      if (w >= 0 &&
          std::find(vi.producer_ids.begin(), vi.producer_ids.end(), w) ==
              vi.producer_ids.end())
        vi.producer_ids.push_back(w);
    }
    std::sort(vi.producer_ids.begin(), vi.producer_ids.end());

    last_writer_[vi.dst] = vi.id;
    push_recent(groups_[cur_group_], vi.dst);
    push_global(vi.dst);
    t.instrs.push_back(std::move(vi));
  }
  validate_trace(t);
  return t;
}

}  // namespace

Trace generate_workload(const WorkloadProfile& profile, const GenerateOptions& opt) {
  if (profile.element_width != 8 && profile.element_width != 32)
    throw std::invalid_argument("profile element width must be 8 or 32");
  if (profile.vectorizable_pct < 0 || profile.vectorizable_pct > 100)
    throw std::invalid_argument("vectorizable_pct out of range");
  double mix = profile.mix_low + profile.mix_medium + profile.mix_high;
  if (std::abs(mix - 100.0) > 0.01)
    throw std::invalid_argument("class mix must sum to 100");
  if (opt.page_size <= 0) throw std::invalid_argument("page_size must be positive");
  Synth s(profile, opt);
  return s.build();
}

}  // namespace ndpsim

#include <map>
#include <stdexcept>

#include "doctest.h"
#include "helpers.hpp"
#include "ndpsim/engine.hpp"
#include "ndpsim/report.hpp"
#include "ndpsim/workloads.hpp"

using namespace ndpsim;
using namespace ndpsim::testing;

namespace {

SimConfig desk() { return desk_scale(default_config()); }

RunOptions opts(Policy p, bool log = false) {
  RunOptions o;
  o.policy = p;
  o.keep_event_log = log;
  return o;
}

}  // namespace

TEST_CASE("nearest-rank percentiles") {
  std::vector<Ns> s;
  for (Ns v = 1; v <= 100; ++v) s.push_back(101 - v);  // unsorted on purpose
  CHECK(percentile_ns(s, 50, 1) == 50);
  CHECK(percentile_ns(s, 99, 1) == 99);
  CHECK(percentile_ns(s, 9999, 100) == 100);
  CHECK(percentile_ns({}, 50, 1) == 0);
  CHECK(percentile_ns({7}, 9999, 100) == 7);
  CHECK(percentile_ns({3, 1}, 1, 1) == 1);
}

TEST_CASE("empty trace runs to an all-zero report") {
  Trace t = make_trace({});
  RunResult r = run_simulation(t, desk(), opts(Policy::CostMin));
  CHECK(r.report.total_time_ns == 0);
  CHECK(r.report.n_instructions == 0);
  CHECK(r.report.energy_total_pj == 0);
  CHECK(r.report.timeline.empty());
}

TEST_CASE("single co-located AND on flash: exact end-to-end latency") {
  // Operands share a block (the placer clusters them), so the instruction is
  // one multi-wordline sense: 3550 ns decision overhead + 22520 ns sense.
  Trace t = make_trace({vec(0, VecOpType::AND, {0, 1}, 2, 1024, 32)});
  RunResult r = run_simulation(t, desk(), opts(Policy::FixedFlash, true));

  CHECK(r.report.total_time_ns == 26'070);
  CHECK(r.report.mean_latency_ns == 26'070);
  CHECK(r.report.mean_overhead_ns == 3'550);
  CHECK(r.report.max_overhead_ns == 3'550);
  CHECK(r.report.decisions[2] == 1);
  CHECK(r.report.frac_ifp == doctest::Approx(1.0));
  CHECK(r.report.energy_compute_pj == 20'500'000 + 4 * 10'000);
  CHECK(r.report.energy_dm_pj == 0);
  CHECK(r.report.relocations == 0);
  CHECK(r.report.n_transfers == 0);
  CHECK(r.report.timeline == "F");
}

TEST_CASE("flash queue is a single server: contention serializes computes") {
  Trace t = make_trace({
      vec(0, VecOpType::AND, {0, 1}, 2, 1024, 32),
      vec(1, VecOpType::AND, {3, 4}, 5, 1024, 32),
  });
  RunResult r = run_simulation(t, desk(), opts(Policy::FixedFlash));
  // Second decision dispatches at 7100 ns but waits for the first sense to
  // finish at 26070 ns, completing at 48590 ns.
  CHECK(r.report.total_time_ns == 48'590);
  REQUIRE(r.latencies_ns.size() == 2);
  CHECK(r.latencies_ns[0] == 26'070);
  CHECK(r.latencies_ns[1] == 48'590 - 3'550);
}

TEST_CASE("scattered operands pay a relocation penalty on flash") {
  SimConfig cfg = desk();
  cfg.engine.colocate_flash_operands = false;  // operands land in different blocks
  Trace t = make_trace({vec(0, VecOpType::AND, {0, 1}, 2, 1024, 32)});
  RunResult r = run_simulation(t, cfg, opts(Policy::FixedFlash));

  // One operand must be staged into the other's block: read + program.
  CHECK(r.report.relocations == 1);
  CHECK(r.report.total_time_ns == 3'550 + (22'500 + 400'000) + 22'520);
  CHECK(r.report.energy_dm_pj == 20'500'000 + 7'656'000);
  CHECK(r.report.bytes_moved == 4096);
}

TEST_CASE("core execution faults pages in and streams operands") {
  Trace t = make_trace({vec(0, VecOpType::ADD, {0, 1}, 2, 1024, 32)});
  RunResult r = run_simulation(t, desk(), opts(Policy::FixedCore, true));

  // Two parallel channel reads (29214 ns) + 12 KiB bus stream (3322 ns) +
  // 1024 core micro-ops at 4 cycles each, 500 MHz (8192 ns), after the
  // 3550 ns decision.
  CHECK(r.report.total_time_ns == 3'550 + 29'214 + 3'322 + 8'192);
  CHECK(r.report.n_transfers == 3);  // two page moves + one stream
  CHECK(r.report.bytes_moved == 4096 + 4096 + 12'288);
  CHECK(r.report.energy_dm_pj == 2 * (20'500'000 + 7'656'000));
  CHECK(r.report.energy_compute_by_resource[0] == 333 * 1024);
  CHECK(r.report.timeline == "I");
}

TEST_CASE("mapping-table misses inflate the decision overhead") {
  SimConfig cfg = desk();
  cfg.overheads.l2p_resident_fraction = 0.0;  // every probe misses
  Trace t = make_trace({vec(0, VecOpType::AND, {0, 1}, 2, 1024, 32)});
  RunResult r = run_simulation(t, cfg, opts(Policy::FixedFlash));
  CHECK(r.report.mean_overhead_ns == 30'550);
  CHECK(r.report.total_time_ns == 30'550 + 22'520);
}

TEST_CASE("version counter forces a sync before wrapping") {
  auto writes = [](int n) {
    std::vector<VecInstr> is;
    for (int k = 0; k < n; ++k)
      is.push_back(vec(k, VecOpType::ADD, {0, 1}, 2, 1024, 32,
                       k > 0 ? std::vector<InstrId>{k - 1} : std::vector<InstrId>{}));
    return make_trace(std::move(is));
  };
  RunResult r300 = run_simulation(writes(300), desk(), opts(Policy::FixedDram));
  CHECK(r300.report.coherence_syncs == 1);
  RunResult r600 = run_simulation(writes(600), desk(), opts(Policy::FixedDram));
  CHECK(r600.report.coherence_syncs == 2);
}

TEST_CASE("flush at end commits dirty pages") {
  Trace t = make_trace({vec(0, VecOpType::ADD, {0, 1}, 2, 1024, 32)});
  RunOptions o = opts(Policy::FixedDram);
  RunResult stay = run_simulation(t, desk(), o);
  o.flush_dirty_at_end = true;
  RunResult flushed = run_simulation(t, desk(), o);

  CHECK(stay.report.coherence_syncs == 0);
  CHECK(flushed.report.coherence_syncs == 1);
  CHECK(flushed.report.n_transfers == stay.report.n_transfers + 1);
  CHECK(flushed.report.total_time_ns > stay.report.total_time_ns);
}

TEST_CASE("tiny DRAM pool evicts under pressure and still completes") {
  SimConfig cfg = desk();
  cfg.dram.capacity = 2 * 4096;  // two pages
  std::vector<VecInstr> is;
  for (int k = 0; k < 6; ++k)
    is.push_back(vec(k, VecOpType::ADD, {10 + 2 * k, 11 + 2 * k}, 30 + k, 1024, 32));
  Trace t = make_trace(std::move(is));

  RunResult a = run_simulation(t, cfg, opts(Policy::FixedDram));
  RunResult b = run_simulation(t, cfg, opts(Policy::FixedDram));
  CHECK(a.report.coherence_syncs >= 1);  // dirty results get committed out
  CHECK(a.report.n_transfers > 12);      // 12 fault-ins plus commits
  CHECK(report_to_json(a.report) == report_to_json(b.report));
  CHECK(a.latencies_ns.size() == 6);
}

TEST_CASE("declared dependences order cross-resource execution") {
  // Producer: slow multiply on cores; consumer: fast copy in DRAM. Under the
  // contention-free policy both run concurrently, so only the declared
  // dependence forces the copy to read the product.
  Trace good = make_trace({
      vec(0, VecOpType::MUL, {0, 1}, 2, 1024, 32),
      vec(1, VecOpType::COPY, {2}, 3, 1024, 32, {0}),
  });
  Trace bad = good;
  bad.instrs[1].producer_ids.clear();  // corrupted: dependence dropped

  PageStore init = deterministic_contents(good);
  PageStore expect = interpret_trace(good, init);

  RunOptions o = opts(Policy::Ideal);
  o.initial_pages = &init;

  RunResult rg = run_simulation(good, desk(), o);
  CHECK(rg.pages == expect);

  RunResult rb = run_simulation(bad, desk(), o);
  CHECK_FALSE(rb.pages == expect);  // stale read must be observable
}

TEST_CASE("functional mode matches the interpreter on a generated trace") {
  GenerateOptions g;
  g.n_instructions = 300;
  g.seed = 5;
  Trace t = generate_workload(profile_by_name("xor_filter"), g);
  PageStore init = deterministic_contents(t);
  PageStore expect = interpret_trace(t, init);
  for (Policy p : {Policy::CostMin, Policy::FixedCore, Policy::FixedDram,
                   Policy::FixedFlash}) {
    RunOptions o = opts(p);
    o.initial_pages = &init;
    RunResult r = run_simulation(t, desk(), o);
    CHECK(r.pages == expect);
  }
}

TEST_CASE("identical inputs give byte-identical reports and logs") {
  GenerateOptions g;
  g.n_instructions = 400;
  g.seed = 9;
  Trace t = generate_workload(profile_by_name("aes_ctr"), g);
  RunResult a = run_simulation(t, desk(), opts(Policy::CostMin, true));
  RunResult b = run_simulation(t, desk(), opts(Policy::CostMin, true));
  CHECK(report_to_json(a.report) == report_to_json(b.report));
  CHECK(event_log_to_jsonl(a.event_log) == event_log_to_jsonl(b.event_log));
}

TEST_CASE("event log energies reconcile with the report exactly") {
  GenerateOptions g;
  g.n_instructions = 500;
  g.seed = 3;
  Trace t = generate_workload(profile_by_name("llm_train"), g);
  RunResult r = run_simulation(t, desk(), opts(Policy::CostMin, true));

  std::map<std::string, Pj> by_cat;
  for (const auto& e : r.event_log) by_cat[e.energy_category] += e.energy_pj;
  CHECK(by_cat["compute_isp"] == r.report.energy_compute_by_resource[0]);
  CHECK(by_cat["compute_pud"] == r.report.energy_compute_by_resource[1]);
  CHECK(by_cat["compute_ifp"] == r.report.energy_compute_by_resource[2]);
  CHECK(by_cat["dm"] == r.report.energy_dm_pj);
  CHECK(by_cat["compute_isp"] + by_cat["compute_pud"] + by_cat["compute_ifp"] ==
        r.report.energy_compute_pj);
  CHECK(r.report.energy_compute_pj + r.report.energy_dm_pj ==
        r.report.energy_total_pj);
  CHECK(by_cat[""] == 0);
  CHECK(r.report.timeline.size() == 500);
}

TEST_CASE("run rejects inconsistent inputs") {
  Trace bad_ids = make_trace({vec(5, VecOpType::AND, {0, 1}, 2, 8, 32)});
  CHECK_THROWS_AS(run_simulation(bad_ids, desk(), opts(Policy::CostMin)),
                  std::invalid_argument);

  Trace wrong_page = make_trace({vec(0, VecOpType::AND, {0, 1}, 2, 8, 32)}, 8192);
  CHECK_THROWS_AS(run_simulation(wrong_page, desk(), opts(Policy::CostMin)),
                  std::invalid_argument);
}

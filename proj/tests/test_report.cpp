#include <stdexcept>

#include "doctest.h"
#include "ndpsim/report.hpp"

using namespace ndpsim;

namespace {

StatsReport sample() {
  StatsReport r;
  r.policy = "costmin";
  r.profile = "aes_ctr";
  r.seed = 17;
  r.n_instructions = 100;
  r.n_vector = 60;
  r.n_scalar = 40;
  r.total_time_ns = 123'456;
  r.mean_latency_ns = 1'000;
  r.p50_ns = 900;
  r.p99_ns = 5'000;
  r.p9999_ns = 9'000;
  r.max_latency_ns = 9'500;
  r.energy_compute_pj = 111;
  r.energy_dm_pj = 222;
  r.energy_total_pj = 333;
  r.energy_compute_by_resource = {10, 100, 1};
  r.decisions = {6, 30, 24};
  r.frac_isp = 0.1;
  r.frac_pud = 0.5;
  r.frac_ifp = 0.4;
  r.mean_overhead_ns = 3'550;
  r.max_overhead_ns = 30'550;
  r.n_transfers = 4;
  r.bytes_moved = 16'384;
  r.relocations = 2;
  r.coherence_syncs = 1;
  r.timeline = "IPFS";
  return r;
}

}  // namespace

TEST_CASE("report JSON round trip preserves every field") {
  StatsReport r = sample();
  std::string j = report_to_json(r);
  StatsReport d = report_from_json(j);
  CHECK(report_to_json(d) == j);
  CHECK(d.policy == "costmin");
  CHECK(d.seed == 17);
  CHECK(d.energy_compute_by_resource[1] == 100);
  CHECK(d.decisions[2] == 24);
  CHECK(d.timeline == "IPFS");
  CHECK(d.p9999_ns == 9'000);

  CHECK_THROWS_AS(report_from_json("nope"), std::invalid_argument);
}

TEST_CASE("CSV schema") {
  CHECK(csv_header() ==
        "policy,profile,total_time_ns,p99_ns,p9999_ns,energy_compute_pj,"
        "energy_dm_pj,frac_isp,frac_pud,frac_ifp");
  CHECK(csv_row(sample()) ==
        "costmin,aes_ctr,123456,5000,9000,111,222,0.100000,0.500000,0.400000");

  StatsReport bad = sample();
  bad.profile = "a,b";
  CHECK_THROWS_AS(csv_row(bad), std::invalid_argument);
}

TEST_CASE("event log serialization") {
  std::vector<EventLogEntry> log = {
      {0, "decision_ready", 0, 0, ""},
      {100, "compute_done", 0, 555, "compute_pud"},
  };
  std::string jl = event_log_to_jsonl(log);
  CHECK(jl ==
        "{\"t\":0,\"kind\":\"decision_ready\",\"id\":0}\n"
        "{\"t\":100,\"kind\":\"compute_done\",\"id\":0,\"energy_pj\":555,"
        "\"category\":\"compute_pud\"}\n");
}

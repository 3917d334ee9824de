#include "ndpsim/report.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace ndpsim {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string frac6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_json(const StatsReport& r) {
  ordered_json j{
      {"policy", r.policy},
      {"profile", r.profile},
      {"seed", r.seed},
      {"n_instructions", r.n_instructions},
      {"n_vector", r.n_vector},
      {"n_scalar", r.n_scalar},
      {"total_time_ns", r.total_time_ns},
      {"mean_latency_ns", r.mean_latency_ns},
      {"p50_ns", r.p50_ns},
      {"p99_ns", r.p99_ns},
      {"p9999_ns", r.p9999_ns},
      {"max_latency_ns", r.max_latency_ns},
      {"energy_compute_pj", r.energy_compute_pj},
      {"energy_dm_pj", r.energy_dm_pj},
      {"energy_total_pj", r.energy_total_pj},
      {"energy_compute_by_resource",
       {{"isp", r.energy_compute_by_resource[0]},
        {"pud", r.energy_compute_by_resource[1]},
        {"ifp", r.energy_compute_by_resource[2]}}},
      {"decisions",
       {{"isp", r.decisions[0]}, {"pud", r.decisions[1]}, {"ifp", r.decisions[2]}}},
      {"frac_isp", r.frac_isp},
      {"frac_pud", r.frac_pud},
      {"frac_ifp", r.frac_ifp},
      {"mean_overhead_ns", r.mean_overhead_ns},
      {"max_overhead_ns", r.max_overhead_ns},
      {"n_transfers", r.n_transfers},
      {"bytes_moved", r.bytes_moved},
      {"relocations", r.relocations},
      {"coherence_syncs", r.coherence_syncs},
      {"timeline", r.timeline},
  };
  return j.dump(2);
}

StatsReport report_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("report is not valid JSON: ") + e.what());
  }
  StatsReport r;
  r.policy = j.at("policy").get<std::string>();
  r.profile = j.at("profile").get<std::string>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.n_instructions = j.value("n_instructions", std::int64_t{0});
  r.n_vector = j.value("n_vector", std::int64_t{0});
  r.n_scalar = j.value("n_scalar", std::int64_t{0});
  r.total_time_ns = j.at("total_time_ns").get<Ns>();
  r.mean_latency_ns = j.value("mean_latency_ns", Ns{0});
  r.p50_ns = j.value("p50_ns", Ns{0});
  r.p99_ns = j.at("p99_ns").get<Ns>();
  r.p9999_ns = j.at("p9999_ns").get<Ns>();
  r.max_latency_ns = j.value("max_latency_ns", Ns{0});
  r.energy_compute_pj = j.at("energy_compute_pj").get<Pj>();
  r.energy_dm_pj = j.at("energy_dm_pj").get<Pj>();
  r.energy_total_pj = j.value("energy_total_pj", Pj{0});
  if (j.contains("energy_compute_by_resource")) {
    const auto& e = j.at("energy_compute_by_resource");
    r.energy_compute_by_resource = {e.value("isp", Pj{0}), e.value("pud", Pj{0}),
                                    e.value("ifp", Pj{0})};
  }
  if (j.contains("decisions")) {
    const auto& d = j.at("decisions");
    r.decisions = {d.value("isp", std::int64_t{0}), d.value("pud", std::int64_t{0}),
                   d.value("ifp", std::int64_t{0})};
  }
  r.frac_isp = j.at("frac_isp").get<double>();
  r.frac_pud = j.at("frac_pud").get<double>();
  r.frac_ifp = j.at("frac_ifp").get<double>();
  r.mean_overhead_ns = j.value("mean_overhead_ns", Ns{0});
  r.max_overhead_ns = j.value("max_overhead_ns", Ns{0});
  r.n_transfers = j.value("n_transfers", std::int64_t{0});
  r.bytes_moved = j.value("bytes_moved", std::int64_t{0});
  r.relocations = j.value("relocations", std::int64_t{0});
  r.coherence_syncs = j.value("coherence_syncs", std::int64_t{0});
  r.timeline = j.value("timeline", std::string{});
  return r;
}

std::string csv_header() {
  return "policy,profile,total_time_ns,p99_ns,p9999_ns,energy_compute_pj,"
         "energy_dm_pj,frac_isp,frac_pud,frac_ifp";
}

std::string csv_row(const StatsReport& r) {
  for (char c : r.policy + r.profile)
    if (c == ',' || c == '\n')
      throw std::invalid_argument("policy/profile names must be CSV-safe");
  std::string row;
  row += r.policy;
  row += ',';
  row += r.profile;
  row += ',';
  row += std::to_string(r.total_time_ns);
  row += ',';
  row += std::to_string(r.p99_ns);
  row += ',';
  row += std::to_string(r.p9999_ns);
  row += ',';
  row += std::to_string(r.energy_compute_pj);
  row += ',';
  row += std::to_string(r.energy_dm_pj);
  row += ',';
  row += frac6(r.frac_isp);
  row += ',';
  row += frac6(r.frac_pud);
  row += ',';
  row += frac6(r.frac_ifp);
  return row;
}

std::string event_log_to_jsonl(const std::vector<EventLogEntry>& log) {
  std::string out;
  for (const auto& e : log) {
    ordered_json j{{"t", e.t}, {"kind", e.kind}, {"id", e.id}};
    if (!e.energy_category.empty()) {
      j["energy_pj"] = e.energy_pj;
      j["category"] = e.energy_category;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ndpsim

// Command-line front end: generate synthetic traces, run them through the
// device model, sweep profile x policy grids, and verify functional results
// against the reference interpreter.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ndpsim/config.hpp"
#include "ndpsim/engine.hpp"
#include "ndpsim/offloader.hpp"
#include "ndpsim/report.hpp"
#include "ndpsim/trace.hpp"
#include "ndpsim/workloads.hpp"

namespace fs = std::filesystem;
using namespace ndpsim;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string default_out_dir() {
  if (const char* d = std::getenv("NDPSIM_OUT_DIR")) return d;
  return "results";
}

struct ConfigArgs {
  std::string config_path;
  bool desk = false;

  SimConfig load() const {
    SimConfig cfg = config_path.empty() ? default_config()
                                        : SimConfig::from_json(read_file(config_path));
    if (desk) cfg = desk_scale(cfg);
    return cfg;
  }
};

struct TraceArgs {
  std::string trace_path;
  std::string profile;
  std::int64_t n = 0;
  std::uint64_t seed = 1;
  std::int64_t working_set = 0;
  std::int64_t page_size = 4096;

  Trace load() const {
    if (!trace_path.empty()) return decode_trace(read_file(trace_path));
    if (profile.empty())
      throw std::runtime_error("need --trace or --profile to obtain a workload");
    GenerateOptions opt;
    opt.n_instructions = n;
    opt.seed = seed;
    opt.working_set_pages = working_set;
    opt.page_size = page_size;
    return generate_workload(profile_by_name(profile), opt);
  }
};

void add_config_flags(CLI::App* app, ConfigArgs& a) {
  app->add_option("--config", a.config_path, "device config JSON (default: built-in)");
  app->add_flag("--desk-scale", a.desk, "shrink the device for fast experiments");
}

void add_trace_flags(CLI::App* app, TraceArgs& a, bool allow_file) {
  if (allow_file)
    app->add_option("--trace", a.trace_path, "read an existing trace (JSONL)");
  app->add_option("--profile", a.profile, "workload profile name");
  app->add_option("--n", a.n, "instruction count (0 = profile default)");
  app->add_option("--seed", a.seed, "generator seed");
  app->add_option("--working-set", a.working_set, "pages touched (0 = derived)");
  app->add_option("--page-size", a.page_size, "bytes per logical page");
}

int cmd_generate(const TraceArgs& targs, const std::string& out) {
  Trace t = targs.load();
  std::string text = encode_trace(t);
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
  TraceStats s = trace_stats(t);
  std::cerr << "generated " << s.n_instructions << " instrs (" << s.n_vector
            << " vector, " << s.n_scalar << " scalar), reuse "
            << s.avg_reuse << ", " << s.working_set_pages << " pages\n";
  return 0;
}

int cmd_run(const TraceArgs& targs, const ConfigArgs& cargs,
            const std::string& policy, const std::string& out,
            const std::string& event_log_path, bool verify) {
  Trace t = targs.load();
  SimConfig cfg = cargs.load();

  RunOptions opt;
  opt.policy = policy_from_string(policy);
  opt.seed = targs.seed;
  opt.keep_event_log = !event_log_path.empty();

  PageStore initial(t.header.page_size);
  if (verify) {
    initial = deterministic_contents(t);
    opt.initial_pages = &initial;
  }

  RunResult res = run_simulation(t, cfg, opt);

  if (verify) {
    PageStore expect = interpret_trace(t, initial);
    if (!(res.pages == expect)) {
      std::cerr << "FUNCTIONAL MISMATCH: simulated page contents differ from "
                   "the reference interpreter\n";
      return 2;
    }
    std::cerr << "functional check passed\n";
  }

  std::string text = report_to_json(res.report) + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
  if (!event_log_path.empty())
    write_file(event_log_path, event_log_to_jsonl(res.event_log));
  return 0;
}

StatsReport run_cell(const Trace& t, const SimConfig& cfg, Policy policy,
                     std::uint64_t seed) {
  RunOptions opt;
  opt.policy = policy;
  opt.seed = seed;
  return run_simulation(t, cfg, opt).report;
}

int cmd_sweep(std::vector<std::string> profiles, std::vector<std::string> policies,
              const ConfigArgs& cargs, std::int64_t n, std::uint64_t seed,
              std::int64_t working_set, const std::string& out_dir, int jobs) {
  if (profiles.empty())
    for (const auto& p : builtin_profiles()) profiles.push_back(p.name);
  if (policies.empty())
    policies = {"costmin", "bw", "dm", "ideal", "isp", "pud", "ifp"};

  SimConfig cfg = cargs.load();

  // Generate each profile's trace once and share it across policies.
  std::vector<Trace> traces;
  traces.reserve(profiles.size());
  for (const auto& name : profiles) {
    GenerateOptions gopt;
    gopt.n_instructions = n;
    gopt.seed = seed;
    gopt.working_set_pages = working_set;
    traces.push_back(generate_workload(profile_by_name(name), gopt));
  }

  struct Cell {
    std::size_t profile_idx;
    Policy policy;
    std::string policy_name;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (const auto& pol : policies)
      cells.push_back({i, policy_from_string(pol), pol});

  if (jobs <= 0) {
    unsigned hc = std::thread::hardware_concurrency();
    jobs = hc == 0 ? 1 : static_cast<int>(hc);
  }

  std::vector<StatsReport> reports(cells.size());
  for (std::size_t base = 0; base < cells.size();
       base += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<StatsReport>> batch;
    std::size_t end = std::min(cells.size(), base + static_cast<std::size_t>(jobs));
    for (std::size_t i = base; i < end; ++i) {
      const Cell& c = cells[i];
      batch.push_back(std::async(std::launch::async, run_cell,
                                 std::cref(traces[c.profile_idx]), std::cref(cfg),
                                 c.policy, seed));
    }
    for (std::size_t i = base; i < end; ++i)
      reports[i] = batch[i - base].get();
  }

  std::string csv = csv_header() + "\n";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& c = cells[i];
    const std::string cell_path = out_dir + "/" + profiles[c.profile_idx] + "_" +
                                  c.policy_name + ".json";
    write_file(cell_path, report_to_json(reports[i]) + "\n");
    csv += csv_row(reports[i]) + "\n";
  }
  write_file(out_dir + "/summary.csv", csv);
  std::cout << csv;
  std::cerr << "wrote " << cells.size() << " reports to " << out_dir << "\n";
  return 0;
}

int cmd_verify(const TraceArgs& targs, const ConfigArgs& cargs) {
  Trace t = targs.load();
  SimConfig cfg = cargs.load();
  PageStore initial = deterministic_contents(t);
  PageStore expect = interpret_trace(t, initial);

  bool all_ok = true;
  for (const char* pol :
       {"costmin", "bw", "dm", "ideal", "isp", "pud", "ifp"}) {
    RunOptions opt;
    opt.policy = policy_from_string(pol);
    opt.initial_pages = &initial;
    RunResult res = run_simulation(t, cfg, opt);
    bool ok = res.pages == expect;
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << pol
              << " matches the reference interpreter\n";
  }
  return all_ok ? 0 : 2;
}

int cmd_report(const std::vector<std::string>& paths) {
  std::cout << csv_header() << "\n";
  for (const auto& p : paths)
    std::cout << csv_row(report_from_json(read_file(p))) << "\n";
  return 0;
}

int cmd_config(const ConfigArgs& cargs, const std::string& out) {
  std::string text = cargs.load().to_json() + "\n";
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-data processing device simulator"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a workload trace");
  TraceArgs gen_trace;
  std::string gen_out;
  add_trace_flags(gen, gen_trace, /*allow_file=*/false);
  gen->get_option("--profile")->required();
  gen->add_option("--out", gen_out, "trace output path (default: stdout)");

  // run
  auto* run = app.add_subcommand("run", "simulate one trace under one policy");
  TraceArgs run_trace;
  ConfigArgs run_cfg;
  std::string run_policy = "costmin";
  std::string run_out;
  std::string run_event_log;
  bool run_verify = false;
  add_trace_flags(run, run_trace, /*allow_file=*/true);
  add_config_flags(run, run_cfg);
  run->add_option("--policy", run_policy,
                  "costmin|bw|dm|ideal|isp|pud|ifp");
  run->add_option("--out", run_out, "report JSON path (default: stdout)");
  run->add_option("--event-log", run_event_log, "write the audit log (JSONL)");
  run->add_flag("--verify", run_verify,
                "also execute data and compare with the interpreter");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a profile x policy grid");
  std::vector<std::string> sweep_profiles, sweep_policies;
  ConfigArgs sweep_cfg;
  std::int64_t sweep_n = 0, sweep_ws = 0;
  std::uint64_t sweep_seed = 1;
  std::string sweep_out = default_out_dir();
  int sweep_jobs = 0;
  sweep->add_option("--profiles", sweep_profiles, "profile subset (default: all)");
  sweep->add_option("--policies", sweep_policies, "policy subset (default: all)");
  add_config_flags(sweep, sweep_cfg);
  sweep->add_option("--n", sweep_n, "instructions per trace (0 = profile default)");
  sweep->add_option("--seed", sweep_seed, "generator seed");
  sweep->add_option("--working-set", sweep_ws, "pages touched (0 = derived)");
  sweep->add_option("--out-dir", sweep_out,
                    "output directory (default: $NDPSIM_OUT_DIR or ./results)");
  sweep->add_option("--jobs", sweep_jobs, "parallel runs (0 = hardware threads)");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "check every policy against the reference interpreter");
  TraceArgs verify_trace;
  ConfigArgs verify_cfg;
  add_trace_flags(verify, verify_trace, /*allow_file=*/true);
  add_config_flags(verify, verify_cfg);

  // report
  auto* report = app.add_subcommand("report", "tabulate report JSONs as CSV");
  std::vector<std::string> report_paths;
  report->add_option("files", report_paths, "report JSON files")->required();

  // config
  auto* config = app.add_subcommand("config", "print the device config JSON");
  ConfigArgs config_cfg;
  std::string config_out;
  add_config_flags(config, config_cfg);
  config->add_option("--out", config_out, "config output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_trace, gen_out);
    if (run->parsed())
      return cmd_run(run_trace, run_cfg, run_policy, run_out, run_event_log,
                     run_verify);
    if (sweep->parsed())
      return cmd_sweep(sweep_profiles, sweep_policies, sweep_cfg, sweep_n,
                       sweep_seed, sweep_ws, sweep_out, sweep_jobs);
    if (verify->parsed()) return cmd_verify(verify_trace, verify_cfg);
    if (report->parsed()) return cmd_report(report_paths);
    if (config->parsed()) return cmd_config(config_cfg, config_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

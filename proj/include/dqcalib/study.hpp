#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dqcalib/sim.hpp"

namespace dqcalib {

struct StudyConfig {
  std::vector<double> noise_levels{0.02, 0.05, 0.10};  // relative
  std::vector<int> sizes{25, 50, 100, 200, 400};       // motion pairs per dataset
  int seeds = 8;
  std::uint64_t base_seed = 1;
  PathSpec path;
  SurfaceSpec surface = SurfaceSpec::sinusoid_mixture();
  double step_length = 1.0;
  double dt = 0.1;
  unsigned threads = 0;  // 0: hardware concurrency (capped by DQCALIB_THREADS)
};

struct StudyRow {
  double noise_level = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  double eps_r_deg = 0.0;
  double eps_t_m = 0.0;
  double gap = 0.0;
  double time_ms = 0.0;
};

/// For every (noise level, seed) one calibration and one long noisy sequence are
/// drawn; each size uses the leading pairs of that sequence. Rows are ordered by
/// noise level, size, seed and do not depend on the thread count. Failed solves
/// report NaN errors.
std::vector<StudyRow> run_study(const StudyConfig& cfg);

/// Header "noise_level,n,seed,eps_r_deg,eps_t_m,gap,time_ms".
void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows);

/// Median of eps_t per (noise, n) cell, ordered like cfg.noise_levels x cfg.sizes.
std::vector<std::vector<double>> median_eps_t(const StudyConfig& cfg, const std::vector<StudyRow>& rows);

/// Thread count honoring DQCALIB_THREADS.
unsigned worker_count(unsigned requested);

}  // namespace dqcalib

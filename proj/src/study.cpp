#include "dqcalib/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "dqcalib/error.hpp"
#include "dqcalib/global_solver.hpp"
#include "dqcalib/io.hpp"
#include "dqcalib/metrics.hpp"

namespace dqcalib {

namespace {

struct Cell {
  std::size_t noise_idx;
  int seed_idx;
};

std::vector<StudyRow> run_cell(const StudyConfig& cfg, const Cell& cell) {
  const double level = cfg.noise_levels[cell.noise_idx];
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(cell.seed_idx);
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + cell.noise_idx);

  SimConfig sim;
  sim.path = cfg.path;
  sim.surface = cfg.surface;
  sim.step_length = cfg.step_length;
  sim.dt = cfg.dt;
  sim.num_poses = *std::max_element(cfg.sizes.begin(), cfg.sizes.end()) + 1;
  sim.true_calib = random_calibration(rng);
  sim.noise.relative = true;
  sim.noise.level = level;
  sim.seed = rng();
  const SimResult data = simulate(sim);

  std::vector<StudyRow> rows;
  for (int n : cfg.sizes) {
    StudyRow row;
    row.noise_level = level;
    row.n = n;
    row.seed = seed;
    CostAccumulator acc;
    for (int i = 0; i < n; ++i) acc.add(data.pairs[i]);
    try {
      const CalibSolution sol = solve_global(acc);
      const CalibError err = calib_error(sol.q_hat, sim.true_calib);
      row.eps_r_deg = err.eps_r * 180.0 / std::numbers::pi;
      row.eps_t_m = err.eps_t;
      row.gap = sol.gap;
      row.time_ms = sol.solve_time * 1e3;
    } catch (const Error&) {
      row.eps_r_deg = row.eps_t_m = row.gap = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

unsigned worker_count(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DQCALIB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

std::vector<StudyRow> run_study(const StudyConfig& cfg) {
  if (cfg.noise_levels.empty() || cfg.sizes.empty() || cfg.seeds < 1) {
    throw Error(ErrorCode::InvalidArgument, "study grid must be non-empty");
  }
  for (double l : cfg.noise_levels) {
    if (!(l >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise levels must be nonnegative");
  }
  for (int n : cfg.sizes) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "dataset sizes must be positive");
  }

  std::vector<Cell> cells;
  for (std::size_t i = 0; i < cfg.noise_levels.size(); ++i)
    for (int s = 0; s < cfg.seeds; ++s) cells.push_back({i, s});

  std::vector<std::vector<StudyRow>> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t c; (c = next.fetch_add(1)) < cells.size();) results[c] = run_cell(cfg, cells[c]);
  };
  const unsigned nthreads = std::min<unsigned>(worker_count(cfg.threads), static_cast<unsigned>(cells.size()));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(work);
  work();
  pool.clear();

  std::vector<StudyRow> rows;
  rows.reserve(cells.size() * cfg.sizes.size());
  for (std::size_t i = 0; i < cfg.noise_levels.size(); ++i)
    for (std::size_t k = 0; k < cfg.sizes.size(); ++k)
      for (int s = 0; s < cfg.seeds; ++s) rows.push_back(results[i * cfg.seeds + s][k]);
  return rows;
}

void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  out << "noise_level,n,seed,eps_r_deg,eps_t_m,gap,time_ms\n";
  for (const StudyRow& r : rows) {
    out << format_double(r.noise_level) << ',' << r.n << ',' << r.seed << ',' << format_double(r.eps_r_deg) << ','
        << format_double(r.eps_t_m) << ',' << format_double(r.gap) << ',' << format_double(r.time_ms) << '\n';
  }
}

std::vector<std::vector<double>> median_eps_t(const StudyConfig& cfg, const std::vector<StudyRow>& rows) {
  std::vector<std::vector<double>> out;
  for (double level : cfg.noise_levels) {
    std::vector<double> per_size;
    for (int n : cfg.sizes) {
      std::vector<double> v;
      for (const StudyRow& r : rows)
        if (r.noise_level == level && r.n == n) v.push_back(r.eps_t_m);
      per_size.push_back(median(v));
    }
    out.push_back(per_size);
  }
  return out;
}

}  // namespace dqcalib

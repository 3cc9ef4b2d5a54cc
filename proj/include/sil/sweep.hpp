#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sil/model.hpp"
#include "sil/training.hpp"

namespace sil {

// Grid over model/pipeline coordinates. s = 0 means round(d^alpha).
struct SweepSpec {
  std::vector<int> d{64};
  std::vector<int> n{1000};
  std::vector<int> M{0};  // 0: s * r
  std::vector<int> s{0};
  std::vector<double> q{1.0};
  std::vector<double> alpha{0.5};
  std::vector<std::string> link{"he2"};
  std::vector<std::string> mode{"single"};
  std::vector<std::uint64_t> seeds{0, 1, 2};

  int m = 64;
  int r = 2;              // directions in multi mode
  double c = 0.0;         // 0: 1 / log(d + 1)
  double delta = 0.0;
  double kappa = 1.0;
  Index n_test = 10000;
  double lambda_t = 0.0;
  int T_max = 0;
  double grad_tol = 1e-8;
  BiasInit prune_bias = BiasInit::gaussian;
};

struct GridPoint {
  int d = 0;
  int n = 0;
  int M = 0;
  int s = 0;
  double q = 1.0;
  double alpha = 0.5;
  std::string link;
  std::string mode;
  std::uint64_t seed = 0;
  std::string arm = "pruned";  // pruned | unpruned
};

struct ResultRecord {
  GridPoint point;
  std::string task_id;
  int r = 1;
  Index support_size = 0;
  double soft_sparsity = 0.0;
  double support_residual = 0.0;
  double excess_risk = 0.0;
  double wall_time_ms = 0.0;
  std::string error;
  // Not serialized.
  bool objective_monotone = false;
  bool solver_converged = false;
};

// Parses the flat key=value format; arrays are written [a, b, c] or a,b,c.
// Recognised keys are the SweepSpec field names plus seed_count/seed_base.
SweepSpec parse_sweep_config(std::istream& in);
SweepSpec parse_sweep_config_file(const std::string& path);

// Canonical task identifier and the record's seed hash.
std::string task_id(const GridPoint& p);
std::uint64_t record_seed(const GridPoint& p);

// Model used for one grid point (sparse frame, link family, noise).
IndexModel build_model(const SweepSpec& spec, const GridPoint& p, int& s_used, int& r_used);

// All tasks of a spec in canonical order; compare adds an unpruned twin per point.
std::vector<GridPoint> enumerate_tasks(const SweepSpec& spec, bool compare);

struct TaskSetup {
  IndexModel model;
  Dataset data;  // augmented
  TrainConfig cfg;
  std::uint64_t seed = 0;
  int r = 1;
};

// Model, training data and config of one grid point, as run_task builds them.
TaskSetup prepare_task(const SweepSpec& spec, const GridPoint& p);

// Non-increasing up to 1e-12 relative slack per step.
bool objective_monotone(const std::vector<double>& objective);

// generate -> augment -> fit -> measure. Never throws; failures land in `error`.
ResultRecord run_task(const SweepSpec& spec, const GridPoint& p);

struct SweepOptions {
  std::string out;   // CSV path; empty keeps results in memory only
  int jobs = 1;
  bool resume = false;
  bool compare = false;
};

// Runs every task (skipping completed ones when resuming), appending each
// record to `out` as it finishes, then rewrites `out` in canonical order.
std::vector<ResultRecord> run_sweep(const SweepSpec& spec, const SweepOptions& opts);

inline std::vector<ResultRecord> compare_pruned_unpruned(const SweepSpec& spec, SweepOptions opts) {
  opts.compare = true;
  return run_sweep(spec, opts);
}

std::string result_csv_header();
std::string result_csv_row(const ResultRecord& r);
// Rows that fail to parse (e.g. a torn trailing line) are skipped.
std::vector<ResultRecord> read_results_csv(const std::string& path);

// Median over finite values; NaN for an empty input.
double median(std::vector<double> values);

}  // namespace sil

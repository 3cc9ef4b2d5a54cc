// Command-line front end. Talks to the library through sil.h only.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sil/sil.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumeric = 2, kPartial = 3 };

int exit_for(sil_status st) {
  switch (st) {
    case SIL_OK: return kOk;
    case SIL_ERR_PARTIAL: return kPartial;
    case SIL_ERR_NUMERIC:
    case SIL_ERR_INTERNAL: return kNumeric;
    default: return kUsage;
  }
}

int fail(sil_status st, const char* what) {
  std::cerr << "sil " << what << ": " << sil_last_error() << "\n";
  return exit_for(st);
}

#define TRY(expr, what)                     \
  do {                                      \
    const sil_status st_ = (expr);          \
    if (st_ != SIL_OK) return fail(st_, what); \
  } while (0)

struct ModelOpts {
  int d = 64;
  int s = 0;
  int r = 1;
  double alpha = 0.5;
  std::string link = "he2";
  std::string mode = "single";
  double delta = 0.0;
};

struct Common {
  ModelOpts model;
  int n = 1000;
  int M = 0;
  int m = 64;
  double c = 0.0;
  double kappa = 1.0;
  std::uint64_t seed = 0;
  std::string data;
  bool augmented = false;
  std::string out;
  bool zero_bias = false;
};

void add_model_flags(CLI::App* app, ModelOpts& o) {
  app->add_option("--d", o.d, "ambient dimension")->check(CLI::PositiveNumber);
  app->add_option("--s", o.s, "support size per direction (0: round(d^alpha))")->check(CLI::NonNegativeNumber);
  app->add_option("--r", o.r, "directions in multi mode")->check(CLI::PositiveNumber);
  app->add_option("--alpha", o.alpha, "sparsity exponent");
  app->add_option("--link", o.link, "he1..he9, cancel, noise");
  app->add_option("--mode", o.mode, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  app->add_option("--delta", o.delta, "noise variance")->check(CLI::NonNegativeNumber);
}

// Model from flags; seed stream 0 of the run seed.
sil_status make_model(const ModelOpts& o, std::uint64_t seed, sil_model** out) {
  sil_model_params p;
  sil_model_params_default(&p);
  p.d = o.d;
  p.s = o.s;
  p.r = o.mode == "multi" ? o.r : 1;
  p.alpha = o.alpha;
  p.link = o.link.c_str();
  p.mode = o.mode.c_str();
  p.delta = o.delta;
  p.seed = seed;
  return sil_model_create(&p, out);
}

// Augmented training data: read from --data or sampled from the flag model.
sil_status load_data(const Common& c, const sil_model* model, sil_dataset** out) {
  sil_dataset* raw = nullptr;
  sil_status st;
  if (!c.data.empty()) {
    st = sil_dataset_read_csv(c.data.c_str(), c.augmented ? 1 : 0, &raw);
    if (st != SIL_OK) return st;
    if (c.augmented) {
      *out = raw;
      return SIL_OK;
    }
  } else {
    st = sil_dataset_sample(model, c.n, c.seed + 1, &raw);
    if (st != SIL_OK) return st;
  }
  st = sil_dataset_augment(raw, c.seed + 2, out);
  sil_dataset_free(raw);
  return st;
}

int resolved_M(const Common& c) {
  if (c.M > 0) return c.M;
  const int s = c.model.s > 0 ? c.model.s : static_cast<int>(std::lround(std::pow(c.model.d, c.model.alpha)));
  return std::max(1, s) * (c.model.mode == "multi" ? c.model.r : 1);
}

int cmd_gen(const Common& c) {
  sil_model* model = nullptr;
  TRY(make_model(c.model, c.seed, &model), "gen");
  sil_dataset* data = nullptr;
  sil_status st = sil_dataset_sample(model, c.n, c.seed + 1, &data);
  sil_model_free(model);
  if (st != SIL_OK) return fail(st, "gen");
  if (c.augmented) {
    sil_dataset* aug = nullptr;
    st = sil_dataset_augment(data, c.seed + 2, &aug);
    sil_dataset_free(data);
    if (st != SIL_OK) return fail(st, "gen");
    data = aug;
  }
  st = sil_dataset_write_csv(data, c.out.c_str());
  int n = 0, d = 0, a = 0;
  sil_dataset_shape(data, &n, &d, &a);
  sil_dataset_free(data);
  if (st != SIL_OK) return fail(st, "gen");
  std::printf("path,n,d,augmented\n%s,%d,%d,%d\n", c.out.c_str(), n, d, a);
  return kOk;
}

int cmd_prune(const Common& c) {
  sil_model* model = nullptr;
  TRY(make_model(c.model, c.seed, &model), "prune");
  sil_dataset* data = nullptr;
  sil_status st = load_data(c, model, &data);
  if (st != SIL_OK) {
    sil_model_free(model);
    return fail(st, "prune");
  }
  sil_prune_config cfg;
  sil_prune_config_default(&cfg);
  cfg.M = resolved_M(c);
  cfg.c = c.c;
  cfg.m = c.m;
  cfg.seed = c.seed + 3;
  cfg.zero_bias = c.zero_bias ? 1 : 0;
  sil_support* J = nullptr;
  st = sil_prune(data, &cfg, &J);
  sil_dataset_free(data);
  if (st != SIL_OK) {
    sil_model_free(model);
    return fail(st, "prune");
  }
  st = sil_support_write(J, c.out.c_str());
  int size = 0;
  sil_support_size(J, &size);
  double residual = -1.0;
  // Residual only makes sense when the data came from the flag model.
  if (st == SIL_OK && c.data.empty()) st = sil_support_residual(model, J, &residual);
  sil_support_free(J);
  sil_model_free(model);
  if (st != SIL_OK) return fail(st, "prune");
  std::printf("path,M,support_size,support_residual\n%s,%d,%d,", c.out.c_str(), cfg.M, size);
  if (residual >= 0.0) std::printf("%.17g\n", residual);
  else std::printf("\n");
  return kOk;
}

int cmd_train(const Common& c, double eta1, double lambda_t, int T_max, bool full) {
  sil_model* model = nullptr;
  TRY(make_model(c.model, c.seed, &model), "train");
  sil_dataset* data = nullptr;
  sil_status st = load_data(c, model, &data);
  if (st != SIL_OK) {
    sil_model_free(model);
    return fail(st, "train");
  }
  sil_train_config cfg;
  sil_train_config_default(&cfg);
  cfg.M = resolved_M(c);
  cfg.c = c.c;
  cfg.m = c.m;
  cfg.multi = c.model.mode == "multi" ? 1 : 0;
  cfg.seed = c.seed + 3;
  cfg.kappa = c.kappa;
  cfg.eta1 = eta1;
  cfg.lambda_t = lambda_t;
  cfg.T_max = T_max;
  cfg.full_support = full ? 1 : 0;
  cfg.zero_bias = c.zero_bias ? 1 : 0;
  sil_predictor* pred = nullptr;
  st = sil_train(data, &cfg, &pred);
  sil_dataset_free(data);
  if (st != SIL_OK) {
    sil_model_free(model);
    return fail(st, "train");
  }
  st = sil_predictor_write(pred, c.out.c_str());
  double risk = -1.0;
  if (st == SIL_OK && c.data.empty()) st = sil_predictor_excess_risk(pred, model, 10000, c.seed + 4, &risk);
  sil_predictor_free(pred);
  sil_model_free(model);
  if (st != SIL_OK) return fail(st, "train");
  std::printf("path,M,excess_risk\n%s,%d,", c.out.c_str(), cfg.M);
  if (risk >= 0.0) std::printf("%.17g\n", risk);
  else std::printf("\n");
  return kOk;
}

// Grid flags are passed verbatim as config lines, after the config file so they win.
struct GridFlags {
  std::string config;
  std::vector<std::pair<std::string, std::string>> lines;
};

std::string read_file(const std::string& path, bool& ok) {
  std::ifstream in(path);
  ok = static_cast<bool>(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_sweep(const GridFlags& g, const std::string& out, int jobs, bool resume, bool compare) {
  std::string text;
  if (!g.config.empty()) {
    bool ok = false;
    text = read_file(g.config, ok);
    if (!ok) {
      std::cerr << "sil sweep: cannot read " << g.config << "\n";
      return kUsage;
    }
    text += "\n";
  }
  for (const auto& [k, v] : g.lines) text += k + "=" + v + "\n";
  sil_sweep_options o{out.c_str(), jobs, resume ? 1 : 0, compare ? 1 : 0};
  int records = 0, failed = 0;
  TRY(sil_sweep_run(text.c_str(), &o, &records, &failed), compare ? "compare" : "sweep");
  std::printf("path,records,failed\n%s,%d,%d\n", out.c_str(), records, failed);
  return failed > 0 ? kNumeric : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse index lab: pruning and training two-layer ReLU networks on sparse index models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sil_version()));

  Common common;

  auto* gen = app.add_subcommand("gen", "sample a dataset to CSV");
  add_model_flags(gen, common.model);
  gen->add_option("--n", common.n, "samples")->check(CLI::PositiveNumber);
  gen->add_option("--seed", common.seed, "seed");
  gen->add_flag("--augment", common.augmented, "append the N(0,1) coordinate");
  gen->add_option("--out", common.out, "CSV path")->required();

  auto* prune = app.add_subcommand("prune", "run the pruning step, write the support set");
  auto* train = app.add_subcommand("train", "prune, train and write the predictor bundle");
  double eta1 = 0.0, lambda_t = 0.0;
  int T_max = 0;
  bool full = false;
  for (auto* sub : {prune, train}) {
    add_model_flags(sub, common.model);
    sub->add_option("--n", common.n, "samples when generating")->check(CLI::PositiveNumber);
    sub->add_option("--M", common.M, "top-M truncation (0: s r)")->check(CLI::NonNegativeNumber);
    sub->add_option("--m", common.m, "neuron pairs")->check(CLI::PositiveNumber);
    sub->add_option("--c", common.c, "shift (0: 1/log(d+1))");
    sub->add_option("--seed", common.seed, "seed");
    sub->add_option("--data", common.data, "read training data instead of sampling");
    sub->add_flag("--augmented", common.augmented, "--data already carries the extra coordinate");
    sub->add_flag("--zero-bias", common.zero_bias, "b(0) = 0");
    sub->add_option("--out", common.out, "output path")->required();
  }
  train->add_option("--kappa", common.kappa, "first-layer step scale")->check(CLI::PositiveNumber);
  train->add_option("--eta1", eta1, "explicit first-layer step");
  train->add_option("--lambda", lambda_t, "second-layer ridge");
  train->add_option("--T", T_max, "second-layer iterations");
  train->add_flag("--full-support", full, "skip pruning (J = [d])");

  GridFlags grid;
  std::string sweep_out = "results.csv";
  int jobs = 1;
  bool resume = false;
  auto* sweep = app.add_subcommand("sweep", "run a grid, one CSV row per record");
  auto* compare = app.add_subcommand("compare", "pruned vs unpruned twins over a grid");
  static const char* kGridKeys[] = {"d", "n", "M", "s", "q", "alpha", "link", "mode", "delta", "seed",
                                    "m", "c", "kappa", "r"};
  static std::string grid_values[std::size(kGridKeys)];
  for (auto* sub : {sweep, compare}) {
    sub->add_option("--config", grid.config, "key=value config file");
    for (std::size_t i = 0; i < std::size(kGridKeys); ++i) {
      sub->add_option(std::string("--") + kGridKeys[i], grid_values[i], "grid value or list a,b,c");
    }
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--resume", resume, "skip records already in --out");
    sub->add_option("--out", sweep_out, "CSV path");
  }

  int pk_d = 2048, pk_r = 2, pk_s = 64, pk_count = 50, pk_k = 2;
  double pk_cap = 0.0;
  long long pk_attempts = 0;
  std::uint64_t pk_seed = 0;
  std::string pk_out = "packing";
  auto* pack = app.add_subcommand("csq-pack", "build a sparse near-orthogonal packing");
  pack->add_option("--d", pk_d, "dimension")->check(CLI::PositiveNumber);
  pack->add_option("--r", pk_r, "columns")->check(CLI::PositiveNumber);
  pack->add_option("--s", pk_s, "sparsity")->check(CLI::PositiveNumber);
  pack->add_option("--n", pk_count, "frames")->check(CLI::PositiveNumber);
  pack->add_option("--k", pk_k, "information exponent")->check(CLI::PositiveNumber);
  pack->add_option("--cap", pk_cap, "column coherence cap (0: default)");
  pack->add_option("--attempts", pk_attempts, "draw budget (0: default)");
  pack->add_option("--seed", pk_seed, "seed");
  pack->add_option("--out", pk_out, "output directory");

  std::string plot_in, plot_kind = "risk_vs_n", plot_out = "plot.svg";
  auto* plot = app.add_subcommand("plot", "SVG from a results CSV");
  plot->add_option("--in", plot_in, "results CSV")->required();
  plot->add_option("--kind", plot_kind, "risk_vs_n, residual_vs_n, coherence_hist")
      ->check(CLI::IsMember({"risk_vs_n", "residual_vs_n", "coherence_hist"}));
  plot->add_option("--out", plot_out, "SVG path");

  std::string fixtures_out;
  auto* fixtures = app.add_subcommand("fixtures", "population-gradient fixture tables");
  fixtures->add_option("--out", fixtures_out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*gen) return cmd_gen(common);
  if (*prune) return cmd_prune(common);
  if (*train) return cmd_train(common, eta1, lambda_t, T_max, full);
  if (*sweep || *compare) {
    for (std::size_t i = 0; i < std::size(kGridKeys); ++i) {
      if (grid_values[i].empty()) continue;
      const std::string key = std::string(kGridKeys[i]) == "seed" ? "seeds" : kGridKeys[i];
      grid.lines.emplace_back(key, grid_values[i]);
    }
    return cmd_sweep(grid, sweep_out, jobs, resume, compare->parsed());
  }
  if (*pack) {
    sil_packing* p = nullptr;
    const sil_status st = sil_packing_build(pk_d, pk_r, pk_s, pk_count, pk_k, pk_cap, pk_attempts, pk_seed, &p);
    if (st != SIL_OK && st != SIL_ERR_PARTIAL) return fail(st, "csq-pack");
    int frames = 0, complete = 0;
    double achieved = 0, column = 0, cap = 0, rate = 0;
    sil_packing_info(p, &frames, &achieved, &column, &cap, &rate, &complete);
    sil_status wst = sil_packing_write(p, pk_out.c_str());
    if (wst == SIL_OK) wst = sil_packing_write_pairs(p, (pk_out + "/pairs.csv").c_str());
    sil_packing_free(p);
    if (wst != SIL_OK) return fail(wst, "csq-pack");
    std::printf("frames,requested,coherence_cap,achieved_coherence,max_column_coherence,acceptance_rate\n");
    std::printf("%d,%d,%.17g,%.17g,%.17g,%.17g\n", frames, pk_count, cap, achieved, column, rate);
    if (st == SIL_ERR_PARTIAL) {
      std::cerr << "sil csq-pack: only " << frames << " of " << pk_count << " frames found\n";
      return kPartial;
    }
    return kOk;
  }
  if (*plot) {
    char warn[4096] = {0};
    TRY(sil_plot(plot_in.c_str(), plot_kind.c_str(), plot_out.c_str(), warn, sizeof warn), "plot");
    std::string w(warn);
    while (!w.empty() && w.back() == '\n') w.pop_back();
    if (!w.empty()) std::cerr << "warning: " << w << "\n";
    std::printf("path,kind\n%s,%s\n", plot_out.c_str(), plot_kind.c_str());
    return kOk;
  }
  if (*fixtures) {
    TRY(sil_fixtures_write_csv(fixtures_out.c_str()), "fixtures");
    std::printf("path\n%s\n", fixtures_out.c_str());
    return kOk;
  }
  return kUsage;
}

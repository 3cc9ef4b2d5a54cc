#include "sil/sil.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "sil/csq.hpp"
#include "sil/csv.hpp"
#include "sil/model.hpp"
#include "sil/oracle.hpp"
#include "sil/plot.hpp"
#include "sil/pruning.hpp"
#include "sil/sweep.hpp"
#include "sil/training.hpp"

struct sil_model {
  sil::IndexModel model;
};
struct sil_dataset {
  sil::Dataset data;
};
struct sil_support {
  sil::SupportSet J;
};
struct sil_predictor {
  sil::Predictor p;
};
struct sil_packing {
  sil::Packing packing;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
sil_status guarded(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const sil::PartialResult& e) {
    g_last_error = e.what();
    return SIL_ERR_PARTIAL;
  } catch (const sil::NumericError& e) {
    g_last_error = e.what();
    return SIL_ERR_NUMERIC;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return SIL_ERR_INVALID;
  } catch (const std::logic_error& e) {
    g_last_error = e.what();
    return SIL_ERR_INVALID;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SIL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SIL_ERR_IO;
  } catch (...) {
    g_last_error = "unknown error";
    return SIL_ERR_INTERNAL;
  }
}

sil_status null_argument(const char* name) {
  g_last_error = std::string("null argument: ") + name;
  return SIL_ERR_INVALID;
}

#define SIL_REQUIRE(ptr)                   \
  do {                                     \
    if ((ptr) == nullptr) return null_argument(#ptr); \
  } while (0)

}  // namespace

extern "C" {

const char* sil_last_error(void) { return g_last_error.c_str(); }

const char* sil_version(void) { return "1.0.0"; }

void sil_model_params_default(sil_model_params* params) {
  if (params == nullptr) return;
  params->d = 64;
  params->s = 0;
  params->r = 2;
  params->alpha = 0.5;
  params->link = "he2";
  params->mode = "single";
  params->delta = 0.0;
  params->seed = 0;
}

sil_status sil_model_create(const sil_model_params* params, sil_model** out) {
  SIL_REQUIRE(params);
  SIL_REQUIRE(out);
  return guarded([&] {
    sil::SweepSpec spec;
    spec.r = params->r;
    spec.delta = params->delta;
    sil::GridPoint p;
    p.d = params->d;
    p.s = params->s;
    p.alpha = params->alpha;
    p.link = params->link != nullptr ? params->link : "he2";
    p.mode = params->mode != nullptr ? params->mode : "single";
    p.seed = params->seed;
    int s_used = 0;
    int r_used = 0;
    auto* m = new sil_model{sil::build_model(spec, p, s_used, r_used)};
    *out = m;
    return SIL_OK;
  });
}

sil_status sil_model_shape(const sil_model* model, int* d, int* r) {
  SIL_REQUIRE(model);
  if (d != nullptr) *d = static_cast<int>(model->model.dim());
  if (r != nullptr) *r = static_cast<int>(model->model.rank());
  return SIL_OK;
}

void sil_model_free(sil_model* model) { delete model; }

sil_status sil_dataset_sample(const sil_model* model, int n, uint64_t seed, sil_dataset** out) {
  SIL_REQUIRE(model);
  SIL_REQUIRE(out);
  return guarded([&] {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    *out = new sil_dataset{sil::sample_dataset(model->model, n, seed)};
    return SIL_OK;
  });
}

sil_status sil_dataset_augment(const sil_dataset* data, uint64_t seed, sil_dataset** out) {
  SIL_REQUIRE(data);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = new sil_dataset{sil::augment(data->data, seed)};
    return SIL_OK;
  });
}

sil_status sil_dataset_read_csv(const char* path, int augmented, sil_dataset** out) {
  SIL_REQUIRE(path);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = new sil_dataset{sil::read_dataset_csv(std::string(path), augmented != 0)};
    return SIL_OK;
  });
}

sil_status sil_dataset_write_csv(const sil_dataset* data, const char* path) {
  SIL_REQUIRE(data);
  SIL_REQUIRE(path);
  return guarded([&] {
    sil::write_dataset_csv(std::string(path), data->data);
    return SIL_OK;
  });
}

sil_status sil_dataset_shape(const sil_dataset* data, int* n, int* d, int* augmented) {
  SIL_REQUIRE(data);
  if (n != nullptr) *n = static_cast<int>(data->data.size());
  if (d != nullptr) *d = static_cast<int>(data->data.dim());
  if (augmented != nullptr) *augmented = data->data.augmented ? 1 : 0;
  return SIL_OK;
}

void sil_dataset_free(sil_dataset* data) { delete data; }

void sil_prune_config_default(sil_prune_config* cfg) {
  if (cfg == nullptr) return;
  cfg->M = 8;
  cfg->c = 0.0;
  cfg->m = 64;
  cfg->seed = 0;
  cfg->line3_probe = -1;
  cfg->zero_bias = 0;
}

sil_status sil_prune(const sil_dataset* data, const sil_prune_config* cfg, sil_support** out) {
  SIL_REQUIRE(data);
  SIL_REQUIRE(cfg);
  SIL_REQUIRE(out);
  return guarded([&] {
    sil::PruneConfig pc;
    pc.M = cfg->M;
    pc.c = cfg->c > 0.0 ? cfg->c : 1.0 / std::log(static_cast<double>(data->data.dim()));
    pc.m = cfg->m;
    pc.seed = cfg->seed;
    pc.line3_probe = cfg->line3_probe;
    pc.bias_init = cfg->zero_bias ? sil::BiasInit::zero : sil::BiasInit::gaussian;
    *out = new sil_support{sil::prune_network(data->data, pc)};
    return SIL_OK;
  });
}

sil_status sil_support_read(const char* path, sil_support** out) {
  SIL_REQUIRE(path);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = new sil_support{sil::read_support(std::string(path))};
    return SIL_OK;
  });
}

sil_status sil_support_write(const sil_support* support, const char* path) {
  SIL_REQUIRE(support);
  SIL_REQUIRE(path);
  return guarded([&] {
    sil::write_support(std::string(path), support->J);
    return SIL_OK;
  });
}

sil_status sil_support_size(const sil_support* support, int* size) {
  SIL_REQUIRE(support);
  SIL_REQUIRE(size);
  *size = static_cast<int>(support->J.size());
  return SIL_OK;
}

sil_status sil_support_indices(const sil_support* support, int* out, int capacity) {
  SIL_REQUIRE(support);
  SIL_REQUIRE(out);
  const int k = std::min<int>(capacity, static_cast<int>(support->J.size()));
  for (int i = 0; i < k; ++i) out[i] = support->J.indices[i];
  return SIL_OK;
}

sil_status sil_support_residual(const sil_model* model, const sil_support* support, double* out) {
  SIL_REQUIRE(model);
  SIL_REQUIRE(support);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = sil::support_residual(model->model.V, support->J.indices);
    return SIL_OK;
  });
}

void sil_support_free(sil_support* support) { delete support; }

void sil_train_config_default(sil_train_config* cfg) {
  if (cfg == nullptr) return;
  cfg->M = 8;
  cfg->c = 0.0;
  cfg->m = 64;
  cfg->multi = 0;
  cfg->seed = 0;
  cfg->kappa = 1.0;
  cfg->info_exponent = 2;
  cfg->eta1 = 0.0;
  cfg->lambda_t = 0.0;
  cfg->T_max = 0;
  cfg->grad_tol = 1e-8;
  cfg->full_support = 0;
  cfg->zero_bias = 0;
}

sil_status sil_train(const sil_dataset* data, const sil_train_config* cfg, sil_predictor** out) {
  SIL_REQUIRE(data);
  SIL_REQUIRE(cfg);
  SIL_REQUIRE(out);
  return guarded([&] {
    sil::TrainConfig tc;
    tc.M = cfg->M;
    tc.c = cfg->c > 0.0 ? cfg->c : 1.0 / std::log(static_cast<double>(data->data.dim()));
    tc.m = cfg->m;
    tc.mode = cfg->multi ? sil::TrainMode::multi : sil::TrainMode::single;
    tc.seed = cfg->seed;
    tc.kappa = cfg->kappa;
    tc.info_exponent = cfg->info_exponent;
    tc.eta1 = cfg->eta1;
    tc.lambda_t = cfg->lambda_t;
    tc.T_max = cfg->T_max;
    tc.grad_tol = cfg->grad_tol;
    tc.full_support = cfg->full_support != 0;
    tc.prune_bias = cfg->zero_bias ? sil::BiasInit::zero : sil::BiasInit::gaussian;
    *out = new sil_predictor{sil::fit(data->data, tc)};
    return SIL_OK;
  });
}

sil_status sil_predictor_read(const char* path, sil_predictor** out) {
  SIL_REQUIRE(path);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = new sil_predictor{sil::read_predictor(std::string(path))};
    return SIL_OK;
  });
}

sil_status sil_predictor_write(const sil_predictor* p, const char* path) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(path);
  return guarded([&] {
    sil::write_predictor(std::string(path), p->p);
    return SIL_OK;
  });
}

sil_status sil_predictor_support(const sil_predictor* p, sil_support** out) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = new sil_support{p->p.J};
    return SIL_OK;
  });
}

sil_status sil_predictor_predict(const sil_predictor* p, const double* x, int d, double* y) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(x);
  SIL_REQUIRE(y);
  return guarded([&] {
    if (d != p->p.dim()) throw std::invalid_argument("predict: dimension mismatch");
    const Eigen::Map<const sil::Vector> xv(x, d);
    *y = sil::predict(p->p, xv);
    return SIL_OK;
  });
}

sil_status sil_predictor_excess_risk(const sil_predictor* p, const sil_model* model, int n_test,
                                     uint64_t seed, double* out) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(model);
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = sil::excess_risk(p->p, model->model, n_test, seed);
    return SIL_OK;
  });
}

void sil_predictor_free(sil_predictor* p) { delete p; }

sil_status sil_sweep_run(const char* config, const sil_sweep_options* opts, int* records, int* failed) {
  SIL_REQUIRE(config);
  SIL_REQUIRE(opts);
  return guarded([&] {
    std::istringstream in(config);
    const sil::SweepSpec spec = sil::parse_sweep_config(in);
    sil::SweepOptions so;
    so.out = opts->out != nullptr ? opts->out : "";
    so.jobs = opts->jobs;
    so.resume = opts->resume != 0;
    so.compare = opts->compare != 0;
    const auto results = sil::run_sweep(spec, so);
    int bad = 0;
    for (const auto& r : results) bad += r.error.empty() ? 0 : 1;
    if (records != nullptr) *records = static_cast<int>(results.size());
    if (failed != nullptr) *failed = bad;
    return SIL_OK;
  });
}

sil_status sil_packing_build(int d, int r, int s, int count, int k, double coherence_cap,
                             long long max_attempts, uint64_t seed, sil_packing** out) {
  SIL_REQUIRE(out);
  return guarded([&] {
    const double cap = coherence_cap > 0.0 ? coherence_cap : sil::default_coherence_cap(d, r, s);
    const long long budget = max_attempts > 0 ? max_attempts : 1000LL * std::max(count, 1);
    auto* p = new sil_packing{sil::build_packing(d, r, s, count, k, cap, budget, seed)};
    *out = p;
    if (!p->packing.complete) {
      g_last_error = "packing shortfall: " + std::to_string(p->packing.frames.size()) + " of " +
                     std::to_string(count) + " frames";
      return SIL_ERR_PARTIAL;
    }
    return SIL_OK;
  });
}

sil_status sil_packing_info(const sil_packing* p, int* frames, double* achieved_coherence,
                            double* max_column_coherence, double* coherence_cap,
                            double* acceptance_rate, int* complete) {
  SIL_REQUIRE(p);
  if (frames != nullptr) *frames = static_cast<int>(p->packing.frames.size());
  if (achieved_coherence != nullptr) *achieved_coherence = p->packing.achieved_coherence;
  if (max_column_coherence != nullptr) *max_column_coherence = p->packing.max_column_coherence;
  if (coherence_cap != nullptr) *coherence_cap = p->packing.coherence_cap;
  if (acceptance_rate != nullptr) *acceptance_rate = p->packing.acceptance_rate();
  if (complete != nullptr) *complete = p->packing.complete ? 1 : 0;
  return SIL_OK;
}

sil_status sil_packing_write(const sil_packing* p, const char* directory) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(directory);
  return guarded([&] {
    sil::write_packing(directory, p->packing);
    return SIL_OK;
  });
}

sil_status sil_packing_write_pairs(const sil_packing* p, const char* path) {
  SIL_REQUIRE(p);
  SIL_REQUIRE(path);
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(std::string("cannot open ") + path);
    out << "frame_a,frame_b,avg_correlation\n";
    const auto& frames = p->packing.frames;
    for (std::size_t a = 0; a < frames.size(); ++a) {
      for (std::size_t b = a + 1; b < frames.size(); ++b) {
        out << a << ',' << b << ','
            << sil::format_double(sil::avg_correlation(frames[a], frames[b], p->packing.k)) << '\n';
      }
    }
    return SIL_OK;
  });
}

void sil_packing_free(sil_packing* p) { delete p; }

sil_status sil_csq_tau_bound(double d, double alpha, int k, double* out) {
  SIL_REQUIRE(out);
  return guarded([&] {
    *out = sil::csq_tau_bound(d, alpha, k);
    return SIL_OK;
  });
}

sil_status sil_plot(const char* csv_path, const char* kind, const char* svg_path, char* warnings,
                    size_t warnings_capacity) {
  SIL_REQUIRE(csv_path);
  SIL_REQUIRE(kind);
  SIL_REQUIRE(svg_path);
  return guarded([&] {
    const auto w = sil::emit_plot(csv_path, sil::parse_plot_kind(kind), svg_path);
    if (warnings != nullptr && warnings_capacity > 0) {
      std::string joined;
      for (const auto& line : w) joined += line + "\n";
      std::strncpy(warnings, joined.c_str(), warnings_capacity - 1);
      warnings[warnings_capacity - 1] = '\0';
    }
    return SIL_OK;
  });
}

sil_status sil_fixtures_write_csv(const char* path) {
  SIL_REQUIRE(path);
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(std::string("cannot open ") + path);
    sil::write_fixture_csv(out, sil::pathological_fixtures());
    return SIL_OK;
  });
}

}  // extern "C"

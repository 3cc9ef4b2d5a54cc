/* C interface of the sparse index lab library. All objects are opaque and
 * owned by the caller once returned; release them with the matching _free.
 * Every function returns a sil_status; on failure sil_last_error() holds a
 * message for the calling thread. Coordinates are 0-based. */
#ifndef SIL_SIL_H
#define SIL_SIL_H

#include <stddef.h>
#include <stdint.h>

#if defined(SIL_BUILDING_LIBRARY)
#define SIL_API __attribute__((visibility("default")))
#else
#define SIL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sil_status {
  SIL_OK = 0,
  SIL_ERR_INVALID = 1,
  SIL_ERR_NUMERIC = 2,
  SIL_ERR_PARTIAL = 3,
  SIL_ERR_IO = 4,
  SIL_ERR_INTERNAL = 5
} sil_status;

typedef struct sil_model sil_model;
typedef struct sil_dataset sil_dataset;
typedef struct sil_support sil_support;
typedef struct sil_predictor sil_predictor;
typedef struct sil_packing sil_packing;

SIL_API const char* sil_last_error(void);
SIL_API const char* sil_version(void);

/* link: he1..he9, cancel, noise. mode: single, multi. s = 0 uses round(d^alpha). */
typedef struct sil_model_params {
  int d;
  int s;
  int r;
  double alpha;
  const char* link;
  const char* mode;
  double delta;
  uint64_t seed;
} sil_model_params;

SIL_API void sil_model_params_default(sil_model_params* params);
SIL_API sil_status sil_model_create(const sil_model_params* params, sil_model** out);
SIL_API sil_status sil_model_shape(const sil_model* model, int* d, int* r);
SIL_API void sil_model_free(sil_model* model);

SIL_API sil_status sil_dataset_sample(const sil_model* model, int n, uint64_t seed, sil_dataset** out);
SIL_API sil_status sil_dataset_augment(const sil_dataset* data, uint64_t seed, sil_dataset** out);
SIL_API sil_status sil_dataset_read_csv(const char* path, int augmented, sil_dataset** out);
SIL_API sil_status sil_dataset_write_csv(const sil_dataset* data, const char* path);
SIL_API sil_status sil_dataset_shape(const sil_dataset* data, int* n, int* d, int* augmented);
SIL_API void sil_dataset_free(sil_dataset* data);

typedef struct sil_prune_config {
  int M;
  double c;
  int m;
  uint64_t seed;
  int line3_probe; /* -1: last (augmented) coordinate */
  int zero_bias;   /* nonzero: b(0) = 0 instead of N(0,1) */
} sil_prune_config;

SIL_API void sil_prune_config_default(sil_prune_config* cfg);
SIL_API sil_status sil_prune(const sil_dataset* data, const sil_prune_config* cfg, sil_support** out);
SIL_API sil_status sil_support_read(const char* path, sil_support** out);
SIL_API sil_status sil_support_write(const sil_support* support, const char* path);
SIL_API sil_status sil_support_size(const sil_support* support, int* size);
/* Copies up to capacity indices into out. */
SIL_API sil_status sil_support_indices(const sil_support* support, int* out, int capacity);
SIL_API sil_status sil_support_residual(const sil_model* model, const sil_support* support, double* out);
SIL_API void sil_support_free(sil_support* support);

typedef struct sil_train_config {
  int M;
  double c;
  int m;
  int multi;
  uint64_t seed;
  double kappa;
  int info_exponent;
  double eta1;     /* <= 0: derived from kappa */
  double lambda_t; /* <= 0: m / log^2 d */
  int T_max;       /* <= 0: 50 ceil(log(n m)) */
  double grad_tol;
  int full_support;
  int zero_bias;
} sil_train_config;

SIL_API void sil_train_config_default(sil_train_config* cfg);
SIL_API sil_status sil_train(const sil_dataset* data, const sil_train_config* cfg, sil_predictor** out);
SIL_API sil_status sil_predictor_read(const char* path, sil_predictor** out);
SIL_API sil_status sil_predictor_write(const sil_predictor* p, const char* path);
SIL_API sil_status sil_predictor_support(const sil_predictor* p, sil_support** out);
SIL_API sil_status sil_predictor_predict(const sil_predictor* p, const double* x, int d, double* y);
SIL_API sil_status sil_predictor_excess_risk(const sil_predictor* p, const sil_model* model, int n_test,
                                             uint64_t seed, double* out);
SIL_API void sil_predictor_free(sil_predictor* p);

typedef struct sil_sweep_options {
  const char* out;
  int jobs;
  int resume;
  int compare;
} sil_sweep_options;

/* config: key=value text (see the README). Reports total and failed records. */
SIL_API sil_status sil_sweep_run(const char* config, const sil_sweep_options* opts, int* records,
                                 int* failed);

/* coherence_cap <= 0 selects the default cap; max_attempts <= 0 allows 1000 draws
 * per requested frame and block. Returns SIL_ERR_PARTIAL (with *out
 * set) when fewer than count frames were found. */
SIL_API sil_status sil_packing_build(int d, int r, int s, int count, int k, double coherence_cap,
                                     long long max_attempts, uint64_t seed, sil_packing** out);
SIL_API sil_status sil_packing_info(const sil_packing* p, int* frames, double* achieved_coherence,
                                    double* max_column_coherence, double* coherence_cap,
                                    double* acceptance_rate, int* complete);
SIL_API sil_status sil_packing_write(const sil_packing* p, const char* directory);
/* CSV frame_a,frame_b,avg_correlation over all distinct frame pairs. */
SIL_API sil_status sil_packing_write_pairs(const sil_packing* p, const char* path);
SIL_API void sil_packing_free(sil_packing* p);

SIL_API sil_status sil_csq_tau_bound(double d, double alpha, int k, double* out);

/* kind: risk_vs_n, residual_vs_n, coherence_hist. Warnings are joined with
 * newlines into warnings (may be NULL). */
SIL_API sil_status sil_plot(const char* csv_path, const char* kind, const char* svg_path,
                            char* warnings, size_t warnings_capacity);

SIL_API sil_status sil_fixtures_write_csv(const char* path);

#ifdef __cplusplus
}
#endif

#endif

// Copyright 2026 The dgfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#ifndef DGFNET_DGFNET_H_
#define DGFNET_DGFNET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DGF_API __declspec(dllexport)
#elif defined(DGF_BUILDING_LIBRARY)
#define DGF_API __attribute__((visibility("default")))
#else
#define DGF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/// Every call returns a status; on failure dgf_last_error() describes it.
typedef enum dgf_status {
  DGF_OK = 0,
  DGF_ERR_INVALID_ARGUMENT = 1,
  DGF_ERR_DIMENSION = 2,
  DGF_ERR_CONTRACT = 3,
  DGF_ERR_EMPTY_CONTEXT = 4,
  DGF_ERR_SCHEMA = 5,
  DGF_ERR_IO = 6,
  DGF_ERR_INPUT = 7,
  DGF_ERR_NUMERIC = 8,
  DGF_ERR_INTERNAL = 9
} dgf_status;

/// Ablation switches for dgf_train. Disabling SFF also disables FFI and DM;
/// disabling FFI also disables DM.
enum {
  DGF_ABLATE_DM = 1u << 0,
  DGF_ABLATE_FFI = 1u << 1,
  DGF_ABLATE_SFF = 1u << 2
};

typedef struct dgf_model dgf_model;

/// Message of the last failed call on this thread; never NULL.
DGF_API const char* dgf_last_error(void);
DGF_API const char* dgf_status_name(dgf_status status);
DGF_API const char* dgf_version(void);
/// Frees strings returned by this library.
DGF_API void dgf_string_free(char* s);

/* Synthetic data ---------------------------------------------------------- */

typedef struct dgf_synth_options {
  int n_scenarios;
  int agents_min;
  int agents_max;
  /// straight, left, right, stop, lane change; must sum to 1.
  double mix[5];
  double noise_std;
  uint64_t seed;
  int t_h;
  int t_f;
  double hz;
  int distractor_lanes;
} dgf_synth_options;

DGF_API void dgf_synth_options_default(dgf_synth_options* opt);
/// Writes one scenario file per scenario into out_dir.
DGF_API dgf_status dgf_synth(const dgf_synth_options* opt, const char* out_dir, int* n_written);

/* Models -------------------------------------------------------------------- */

/// config_json: training config text (may be NULL for defaults); only its
/// "model" and "seed" entries matter here.
DGF_API dgf_status dgf_model_create(const char* config_json, int t_h, int t_f, dgf_model** out);
DGF_API dgf_status dgf_model_load(const char* checkpoint_path, dgf_model** out);
DGF_API dgf_status dgf_model_save(const dgf_model* model, const char* checkpoint_path);
DGF_API void dgf_model_free(dgf_model* model);
/// JSON object with the architecture, ablation label and parameter count.
/// Release with dgf_string_free.
DGF_API dgf_status dgf_model_describe(const dgf_model* model, char** json_out);

/* Training ------------------------------------------------------------------ */

typedef struct dgf_epoch_log {
  int epoch;
  double lr;
  double loss_reg;
  double loss_cls;
  double loss_reg_c;
  /// NaN when no validation ran this epoch.
  double val_min_ade;
  double val_min_fde;
  double seconds;
} dgf_epoch_log;

typedef void (*dgf_epoch_callback)(const dgf_epoch_log* log, void* user);

typedef struct dgf_train_request {
  const char* config_json;        /* training config text; NULL for defaults */
  const char* const* train_files; /* scenario files */
  size_t n_train;
  const char* const* val_files;   /* may be NULL */
  size_t n_val;
  unsigned ablate;                /* DGF_ABLATE_* bits */
  const char* resume_checkpoint;  /* may be NULL */
  const char* out_dir;            /* overrides the config's out_dir when set */
  int epochs;                     /* overrides the config when > 0 */
  dgf_epoch_callback on_epoch;    /* may be NULL */
  void* user;
} dgf_train_request;

/// Trains and returns the model through out (may be NULL).
DGF_API dgf_status dgf_train(const dgf_train_request* request, dgf_model** out);

/* Inference and evaluation -------------------------------------------------- */

/// Predicts one scenario file and writes a prediction dump.
DGF_API dgf_status dgf_predict_file(const dgf_model* model, const char* scenario_path, const char* dump_path);

#define DGF_HARDEST_SLICES 5

typedef struct dgf_metrics {
  double min_ade_k6;
  double min_fde_k6;
  double p_min_fde_k6;
  double miss_rate_k6;
  double min_ade_k1;
  double min_fde_k1;
  double dac; /* NaN when not computed */
  int64_t n_agents;
  /// Mean minFDE of the hardest 1..5 % of agents.
  double hardest[DGF_HARDEST_SLICES];
} dgf_metrics;

typedef struct dgf_eval_options {
  int with_dac;
  double lane_half_width;
  /// Merge every dump of a scenario before scoring instead of requiring one.
  int ensemble;
  int ensemble_modes;
} dgf_eval_options;

DGF_API void dgf_eval_options_default(dgf_eval_options* opt);

/// Scores prediction dumps against scenario files, matched by scenario id.
DGF_API dgf_status dgf_evaluate_dumps(const char* const* scenario_files, size_t n_scenarios,
                                      const char* const* dump_files, size_t n_dumps, const dgf_eval_options* opt,
                                      dgf_metrics* out);
/// Predicts and scores scenario files directly.
DGF_API dgf_status dgf_evaluate_model(const dgf_model* model, const char* const* scenario_files, size_t n_scenarios,
                                      const dgf_eval_options* opt, dgf_metrics* out);

/// Merges dumps of one scenario into out_path.
DGF_API dgf_status dgf_ensemble(const char* const* dump_files, size_t n_dumps, int modes, const char* out_path);

/* Verification -------------------------------------------------------------- */

typedef void (*dgf_gradcheck_callback)(const char* name, double max_rel_err, int pass, double seconds,
                                       const char* location, void* user);

/// Runs the finite-difference suite; *all_pass is 1 when every case passed.
DGF_API dgf_status dgf_gradcheck(uint64_t seed, double tol, dgf_gradcheck_callback cb, void* user, int* all_pass);

#ifdef __cplusplus
}
#endif

#endif  // DGFNET_DGFNET_H_

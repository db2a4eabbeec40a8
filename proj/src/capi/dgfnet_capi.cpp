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
#include "dgfnet/dgfnet.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "eval/ensemble.hpp"
#include "eval/pipeline.hpp"
#include "harness/gradcheck_suite.hpp"
#include "harness/synth.hpp"
#include "json.hpp"
#include "model/dgfnet.hpp"
#include "train/trainer.hpp"

struct dgf_model {
  std::unique_ptr<dgf::DgfNet> net;
  double lane_radius = dgf::kLaneRadius;
};

namespace {

thread_local std::string g_last_error;

dgf_status fail(dgf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

/// Runs body, mapping library exceptions to status codes.
template <typename F>
dgf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return DGF_OK;
  } catch (const dgf::DimensionError& e) {
    return fail(DGF_ERR_DIMENSION, e.what());
  } catch (const dgf::EmptyContextError& e) {
    return fail(DGF_ERR_EMPTY_CONTEXT, e.what());
  } catch (const dgf::ContractError& e) {
    return fail(DGF_ERR_CONTRACT, e.what());
  } catch (const dgf::SchemaError& e) {
    return fail(DGF_ERR_SCHEMA, e.what());
  } catch (const dgf::IoError& e) {
    return fail(DGF_ERR_IO, e.what());
  } catch (const dgf::InputError& e) {
    return fail(DGF_ERR_INPUT, e.what());
  } catch (const dgf::NumericError& e) {
    return fail(DGF_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return fail(DGF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DGF_ERR_INTERNAL, "unknown error");
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<std::string> strings(const char* const* items, size_t n, const char* what) {
  if (n > 0 && items == nullptr) throw dgf::ContractError(std::string(what) + ": NULL list");
  std::vector<std::string> out;
  for (size_t i = 0; i < n; ++i) {
    if (items[i] == nullptr) throw dgf::ContractError(std::string(what) + ": NULL entry");
    out.emplace_back(items[i]);
  }
  return out;
}

dgf::TrainConfig config_from(const char* json_text) {
  return json_text == nullptr ? dgf::TrainConfig{} : dgf::parse_train_config(json_text);
}

std::vector<dgf::PreparedScenario> prepare_all(const std::vector<std::string>& files, double radius) {
  std::vector<dgf::PreparedScenario> out;
  for (const auto& f : files) out.push_back(dgf::prepare_scenario(dgf::load_scenario(f), radius));
  return out;
}

constexpr double kHardestFractions[DGF_HARDEST_SLICES] = {0.01, 0.02, 0.03, 0.04, 0.05};

void fill_metrics(const dgf::MetricReport& r, dgf_metrics* out) {
  out->min_ade_k6 = r.min_ade_k6;
  out->min_fde_k6 = r.min_fde_k6;
  out->p_min_fde_k6 = r.p_min_fde_k6;
  out->miss_rate_k6 = r.miss_rate_k6;
  out->min_ade_k1 = r.min_ade_k1;
  out->min_fde_k1 = r.min_fde_k1;
  out->dac = r.dac ? *r.dac : std::numeric_limits<double>::quiet_NaN();
  out->n_agents = r.n_agents;
  if (r.per_agent_min_fde.empty()) throw dgf::ContractError("evaluate: no agent carries ground truth");
  const auto slices = dgf::slice_hardest(r.per_agent_min_fde, kHardestFractions);
  for (int i = 0; i < DGF_HARDEST_SLICES; ++i) out->hardest[i] = slices[static_cast<std::size_t>(i)];
}

dgf::EvalOptions eval_options(const dgf_eval_options* opt) {
  dgf::EvalOptions o;
  if (opt != nullptr) {
    o.with_dac = opt->with_dac != 0;
    o.lane_half_width = opt->lane_half_width;
  }
  return o;
}

}  // namespace

extern "C" {

const char* dgf_last_error(void) { return g_last_error.c_str(); }

const char* dgf_status_name(dgf_status status) {
  switch (status) {
    case DGF_OK: return "ok";
    case DGF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DGF_ERR_DIMENSION: return "dimension error";
    case DGF_ERR_CONTRACT: return "contract error";
    case DGF_ERR_EMPTY_CONTEXT: return "empty context";
    case DGF_ERR_SCHEMA: return "schema error";
    case DGF_ERR_IO: return "i/o error";
    case DGF_ERR_INPUT: return "input error";
    case DGF_ERR_NUMERIC: return "numeric error";
    case DGF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* dgf_version(void) { return "0.1.0"; }

void dgf_string_free(char* s) { std::free(s); }

void dgf_synth_options_default(dgf_synth_options* opt) {
  if (opt == nullptr) return;
  const dgf::SynthConfig d;
  opt->n_scenarios = d.n_scenarios;
  opt->agents_min = d.agents_min;
  opt->agents_max = d.agents_max;
  for (int i = 0; i < 5; ++i) opt->mix[i] = d.mix[static_cast<std::size_t>(i)];
  opt->noise_std = d.noise_std;
  opt->seed = d.seed;
  opt->t_h = d.horizon.t_h;
  opt->t_f = d.horizon.t_f;
  opt->hz = d.horizon.hz;
  opt->distractor_lanes = d.distractor_lanes;
}

dgf_status dgf_synth(const dgf_synth_options* opt, const char* out_dir, int* n_written) {
  if (opt == nullptr || out_dir == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "synth: NULL argument");
  return guarded([&] {
    dgf::SynthConfig cfg;
    cfg.n_scenarios = opt->n_scenarios;
    cfg.agents_min = opt->agents_min;
    cfg.agents_max = opt->agents_max;
    for (int i = 0; i < 5; ++i) cfg.mix[static_cast<std::size_t>(i)] = opt->mix[i];
    cfg.noise_std = opt->noise_std;
    cfg.seed = opt->seed;
    cfg.horizon = {opt->t_h, opt->t_f, opt->hz};
    cfg.distractor_lanes = opt->distractor_lanes;
    const auto paths = dgf::write_synthetic(cfg, out_dir);
    if (n_written != nullptr) *n_written = static_cast<int>(paths.size());
  });
}

dgf_status dgf_model_create(const char* config_json, int t_h, int t_f, dgf_model** out) {
  if (out == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "model_create: NULL output");
  *out = nullptr;
  return guarded([&] {
    auto cfg = config_from(config_json);
    cfg.model.t_h = t_h;
    cfg.model.t_f = t_f;
    auto m = std::make_unique<dgf_model>();
    m->net = std::make_unique<dgf::DgfNet>(cfg.model);
    m->lane_radius = cfg.lane_radius;
    *out = m.release();
  });
}

dgf_status dgf_model_load(const char* checkpoint_path, dgf_model** out) {
  if (checkpoint_path == nullptr || out == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "model_load: NULL argument");
  *out = nullptr;
  return guarded([&] {
    auto m = std::make_unique<dgf_model>();
    m->net = dgf::load_model(checkpoint_path);
    *out = m.release();
  });
}

dgf_status dgf_model_save(const dgf_model* model, const char* checkpoint_path) {
  if (model == nullptr || checkpoint_path == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "model_save: NULL argument");
  return guarded([&] { dgf::save_model(checkpoint_path, *model->net); });
}

void dgf_model_free(dgf_model* model) { delete model; }

dgf_status dgf_model_describe(const dgf_model* model, char** json_out) {
  if (model == nullptr || json_out == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "model_describe: NULL argument");
  *json_out = nullptr;
  return guarded([&] {
    const auto& c = model->net->config();
    nlohmann::json j = {{"hidden", c.hidden},
                        {"heads", c.heads},
                        {"scene_layers", c.scene_layers},
                        {"agent_layers", c.agent_layers},
                        {"modes", c.modes},
                        {"t_h", c.t_h},
                        {"t_f", c.t_f},
                        {"tau", c.tau},
                        {"ablation", c.ablation_label()},
                        {"parameters", model->net->params().count()}};
    *json_out = copy_string(j.dump());
  });
}

dgf_status dgf_train(const dgf_train_request* request, dgf_model** out) {
  if (request == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "train: NULL request");
  if (out != nullptr) *out = nullptr;
  return guarded([&] {
    auto cfg = config_from(request->config_json);
    if (request->ablate & DGF_ABLATE_DM) cfg.model.use_dm = false;
    if (request->ablate & DGF_ABLATE_FFI) cfg.model.use_ffi = false;
    if (request->ablate & DGF_ABLATE_SFF) cfg.model.use_sff = false;
    if (request->epochs > 0) cfg.epochs = request->epochs;
    if (request->out_dir != nullptr) cfg.out_dir = request->out_dir;
    const auto train_files = strings(request->train_files, request->n_train, "train files");
    const auto val_files = strings(request->val_files, request->n_val, "validation files");
    if (train_files.empty()) throw dgf::ContractError("train: empty dataset");
    const auto train = prepare_all(train_files, cfg.lane_radius);
    const auto val = prepare_all(val_files, cfg.lane_radius);
    const auto& h = train.front().scenario.horizon;
    for (const auto& p : train) {
      if (p.scenario.horizon.t_h != h.t_h || p.scenario.horizon.t_f != h.t_f) {
        throw dgf::InputError("train: scenario " + p.scenario.id + " has a different horizon");
      }
    }
    cfg.model.t_h = h.t_h;
    cfg.model.t_f = h.t_f;

    auto m = std::make_unique<dgf_model>();
    m->lane_radius = cfg.lane_radius;
    std::vector<dgf::NamedTensor> entries;
    if (request->resume_checkpoint != nullptr) {
      m->net = dgf::load_model(request->resume_checkpoint, &entries);
      cfg.model = m->net->config();
    } else {
      m->net = std::make_unique<dgf::DgfNet>(cfg.model);
    }
    dgf::Trainer trainer(*m->net, cfg);
    if (request->resume_checkpoint != nullptr) trainer.resume(entries);
    trainer.fit(train, val, [&](const dgf::EpochLog& log) {
      if (request->on_epoch == nullptr) return;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      const dgf_epoch_log row{log.epoch, log.lr, log.reg, log.cls, log.reg_c,
                              log.val_min_ade.value_or(nan), log.val_min_fde.value_or(nan), log.seconds};
      request->on_epoch(&row, request->user);
    });
    if (out != nullptr) *out = m.release();
  });
}

dgf_status dgf_predict_file(const dgf_model* model, const char* scenario_path, const char* dump_path) {
  if (model == nullptr || scenario_path == nullptr || dump_path == nullptr) {
    return fail(DGF_ERR_INVALID_ARGUMENT, "predict: NULL argument");
  }
  return guarded([&] {
    const auto p = dgf::prepare_scenario(dgf::load_scenario(scenario_path), model->lane_radius);
    dgf::save_dump(dump_path, dgf::predict(*model->net, p));
  });
}

void dgf_eval_options_default(dgf_eval_options* opt) {
  if (opt == nullptr) return;
  const dgf::EvalOptions d;
  opt->with_dac = d.with_dac ? 1 : 0;
  opt->lane_half_width = d.lane_half_width;
  opt->ensemble = 0;
  opt->ensemble_modes = dgf::EnsembleOptions{}.modes;
}

dgf_status dgf_evaluate_dumps(const char* const* scenario_files, size_t n_scenarios, const char* const* dump_files,
                              size_t n_dumps, const dgf_eval_options* opt, dgf_metrics* out) {
  if (out == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "evaluate: NULL output");
  return guarded([&] {
    dgf_eval_options o;
    dgf_eval_options_default(&o);
    if (opt != nullptr) o = *opt;
    std::map<std::string, std::vector<dgf::PredictionDump>> by_id;
    for (const auto& f : strings(dump_files, n_dumps, "dump files")) {
      auto d = dgf::load_dump(f);
      by_id[d.scenario_id].push_back(std::move(d));
    }
    std::vector<dgf::MetricReport> reports;
    for (const auto& f : strings(scenario_files, n_scenarios, "scenario files")) {
      const auto s = dgf::load_scenario(f);
      auto it = by_id.find(s.id);
      if (it == by_id.end()) throw dgf::InputError("evaluate: no prediction dump for scenario " + s.id);
      const dgf::PredictionDump* dump = &it->second.front();
      dgf::PredictionDump merged;
      if (o.ensemble) {
        dgf::EnsembleOptions eo;
        eo.modes = o.ensemble_modes;
        merged = dgf::ensemble_merge(it->second, eo);
        dump = &merged;
      } else if (it->second.size() > 1) {
        throw dgf::InputError("evaluate: several dumps for scenario " + s.id + " (use ensembling)");
      }
      if (auto r = dgf::evaluate_dump(s, *dump, eval_options(&o))) reports.push_back(std::move(*r));
      by_id.erase(it);
    }
    if (!by_id.empty()) throw dgf::InputError("evaluate: dump for unknown scenario " + by_id.begin()->first);
    fill_metrics(dgf::combine_reports(reports), out);
  });
}

dgf_status dgf_evaluate_model(const dgf_model* model, const char* const* scenario_files, size_t n_scenarios,
                              const dgf_eval_options* opt, dgf_metrics* out) {
  if (model == nullptr || out == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "evaluate: NULL argument");
  return guarded([&] {
    dgf_eval_options o;
    dgf_eval_options_default(&o);
    if (opt != nullptr) o = *opt;
    const auto data = prepare_all(strings(scenario_files, n_scenarios, "scenario files"), model->lane_radius);
    fill_metrics(dgf::evaluate_model(*model->net, data, eval_options(&o)), out);
  });
}

dgf_status dgf_ensemble(const char* const* dump_files, size_t n_dumps, int modes, const char* out_path) {
  if (out_path == nullptr) return fail(DGF_ERR_INVALID_ARGUMENT, "ensemble: NULL output path");
  return guarded([&] {
    std::vector<dgf::PredictionDump> runs;
    for (const auto& f : strings(dump_files, n_dumps, "dump files")) runs.push_back(dgf::load_dump(f));
    dgf::EnsembleOptions eo;
    eo.modes = modes;
    dgf::save_dump(out_path, dgf::ensemble_merge(runs, eo));
  });
}

dgf_status dgf_gradcheck(uint64_t seed, double tol, dgf_gradcheck_callback cb, void* user, int* all_pass) {
  return guarded([&] {
    bool ok = true;
    for (const auto& c : dgf::run_gradcheck_suite(seed, tol)) {
      ok = ok && c.report.pass;
      if (cb != nullptr) cb(c.name.c_str(), c.report.max_rel_err, c.report.pass ? 1 : 0, c.seconds, c.report.location.c_str(), user);
    }
    if (all_pass != nullptr) *all_pass = ok ? 1 : 0;
  });
}

}  // extern "C"

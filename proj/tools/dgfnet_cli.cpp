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
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dgfnet/dgfnet.h"

namespace fs = std::filesystem;

namespace {

/// Raised when a library call fails; carries the status for the exit code.
class CallError : public std::runtime_error {
 public:
  explicit CallError(dgf_status status)
      : std::runtime_error(std::string(dgf_status_name(status)) + ": " + dgf_last_error()), status_(status) {}
  int exit_code() const { return static_cast<int>(status_) + 1; }

 private:
  dgf_status status_;
};

void check(dgf_status status) {
  if (status != DGF_OK) throw CallError(status);
}

/// Owns a model handle.
class Model {
 public:
  Model() = default;
  explicit Model(const std::string& checkpoint) { check(dgf_model_load(checkpoint.c_str(), &handle_)); }
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  ~Model() { dgf_model_free(handle_); }
  dgf_model** out() { return &handle_; }
  const dgf_model* get() const { return handle_; }

 private:
  dgf_model* handle_ = nullptr;
};

fs::path default_out_dir() {
  const char* env = std::getenv("DGFNET_OUT_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("dgfnet_out");
}

/// Expands directories to their sorted *.json files.
std::vector<std::string> expand(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw std::runtime_error("no such file or directory: " + in);
    }
  }
  return files;
}

std::vector<const char*> c_strings(const std::vector<std::string>& v) {
  std::vector<const char*> out;
  for (const auto& s : v) out.push_back(s.c_str());
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fmt(double v) {
  if (std::isnan(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

constexpr const char* kMetricNames[] = {"minADE_K6", "minFDE_K6", "p_minFDE_K6", "MR_K6",
                                        "minADE_K1", "minFDE_K1", "DAC"};
constexpr int kHardestPercent[DGF_HARDEST_SLICES] = {1, 2, 3, 4, 5};

void write_metrics(const dgf_metrics& m, const fs::path& dir) {
  fs::create_directories(dir);
  const double values[] = {m.min_ade_k6, m.min_fde_k6, m.p_min_fde_k6, m.miss_rate_k6,
                           m.min_ade_k1, m.min_fde_k1, m.dac};
  std::ofstream json(dir / "metrics.json");
  std::ofstream csv(dir / "metrics.csv");
  json << "{\n";
  csv << "metric,value\n";
  for (int i = 0; i < 7; ++i) {
    json << "  \"" << kMetricNames[i] << "\": " << fmt(values[i]) << ",\n";
    csv << kMetricNames[i] << ',' << (std::isnan(values[i]) ? "" : fmt(values[i])) << '\n';
    std::printf("%-12s %s\n", kMetricNames[i], fmt(values[i]).c_str());
  }
  json << "  \"n_agents\": " << m.n_agents << "\n}\n";
  csv << "n_agents," << m.n_agents << '\n';
  std::printf("%-12s %lld\n", "agents", static_cast<long long>(m.n_agents));

  std::ofstream hardest(dir / "hardest.csv");
  hardest << "top_percent,mean_minFDE\n";
  for (int i = 0; i < DGF_HARDEST_SLICES; ++i) {
    hardest << kHardestPercent[i] << ',' << fmt(m.hardest[i]) << '\n';
    std::printf("hardest %d%%   %s\n", kHardestPercent[i], fmt(m.hardest[i]).c_str());
  }
  if (!json || !csv || !hardest) throw std::runtime_error("cannot write metrics under " + dir.string());
}

void on_epoch(const dgf_epoch_log* log, void*) {
  std::printf("epoch %4d  lr %.2e  L_reg %.4f  L_cls %.4f  L_reg_c %.4f", log->epoch, log->lr, log->loss_reg,
              log->loss_cls, log->loss_reg_c);
  if (!std::isnan(log->val_min_ade)) std::printf("  minADE %.4f  minFDE %.4f", log->val_min_ade, log->val_min_fde);
  std::printf("  (%.1fs)\n", log->seconds);
  std::fflush(stdout);
}

void on_gradcheck(const char* name, double err, int pass, double seconds, const char* location, void*) {
  std::printf("%-28s %-4s %10.3e %7.2fs  %s\n", name, pass ? "PASS" : "FAIL", err, seconds, location);
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DGFNet trajectory prediction"};
  app.require_subcommand(1);
  const fs::path out_root = default_out_dir();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic scenario files");
  dgf_synth_options so;
  dgf_synth_options_default(&so);
  std::string synth_out = (out_root / "scenarios").string();
  synth->add_option("--seed", so.seed, "Generator seed");
  synth->add_option("--n", so.n_scenarios, "Number of scenarios");
  synth->add_option("--agents-min", so.agents_min, "Fewest agents per scenario");
  synth->add_option("--agents-max", so.agents_max, "Most agents per scenario");
  synth->add_option("--noise", so.noise_std, "History noise standard deviation in metres");
  synth->add_option("--distractors", so.distractor_lanes, "Distractor lanes per scenario");
  synth->add_option("--t-h", so.t_h, "History steps");
  synth->add_option("--t-f", so.t_f, "Future steps");
  std::vector<double> mix;
  synth->add_option("--mix", mix, "Behaviour fractions: straight left right stop lane-change")->expected(5);
  synth->add_option("--out", synth_out, "Output directory");

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string config_path, resume, train_out;
  std::vector<std::string> train_data, val_data;
  int epochs = 0;
  bool no_dm = false, no_ffi = false, no_sff = false;
  train->add_option("--config", config_path, "Training config (JSON)")->check(CLI::ExistingFile);
  train->add_option("--data", train_data, "Training scenario files or directories");
  train->add_option("--val", val_data, "Validation scenario files or directories");
  train->add_option("--epochs", epochs, "Override the configured epoch count");
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_option("--out", train_out, "Output directory");
  train->add_flag("--no-dm", no_dm, "Disable the difficulty masker");
  train->add_flag("--no-ffi", no_ffi, "Disable future feature interaction (implies --no-dm)");
  train->add_flag("--no-sff", no_sff, "Disable scene feature fusion (implies --no-ffi)");

  // predict
  auto* predict = app.add_subcommand("predict", "Write prediction dumps");
  std::string model_path = (out_root / "model.ckpt").string();
  std::string predict_out = (out_root / "predictions").string();
  std::vector<std::string> predict_data;
  predict->add_option("--model", model_path, "Model checkpoint");
  predict->add_option("--data", predict_data, "Scenario files or directories");
  predict->add_option("--out", predict_out, "Output directory");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a model or prediction dumps");
  std::vector<std::string> eval_data, dumps;
  std::string eval_out = (out_root / "eval").string();
  dgf_eval_options eo;
  dgf_eval_options_default(&eo);
  bool ensemble_flag = false, no_dac = false;
  eval->add_option("--model", model_path, "Model checkpoint (ignored when --dump is given)");
  eval->add_option("--data", eval_data, "Scenario files or directories");
  eval->add_option("--dump", dumps, "Prediction dump files or directories");
  eval->add_flag("--ensemble", ensemble_flag, "Merge all dumps of a scenario before scoring");
  eval->add_option("--modes", eo.ensemble_modes, "Modes kept by ensembling");
  eval->add_flag("--no-dac", no_dac, "Skip the drivable-area metric");
  eval->add_option("--half-width", eo.lane_half_width, "Lane half width for the drivable area");
  eval->add_option("--out", eval_out, "Output directory");

  // ensemble
  auto* ens = app.add_subcommand("ensemble", "Merge prediction dumps of one scenario");
  std::vector<std::string> ens_dumps;
  std::string ens_out;
  int ens_modes = 6;
  ens->add_option("--dump", ens_dumps, "Prediction dumps")->required();
  ens->add_option("--modes", ens_modes, "Modes to keep");
  ens->add_option("--out", ens_out, "Merged dump path")->required();

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Check every block against finite differences");
  std::uint64_t grad_seed = 1;
  double tol = 1e-4;
  grad->add_option("--seed", grad_seed, "Seed for inputs and parameters");
  grad->add_option("--tol", tol, "Maximum relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (!mix.empty()) std::copy(mix.begin(), mix.end(), so.mix);
      int n = 0;
      check(dgf_synth(&so, synth_out.c_str(), &n));
      std::printf("wrote %d scenarios to %s\n", n, synth_out.c_str());
    } else if (*train) {
      if (train_data.empty()) train_data.push_back((out_root / "scenarios").string());
      const fs::path out_dir = train_out.empty() ? out_root : fs::path(train_out);
      fs::create_directories(out_dir);
      const auto train_files = expand(train_data);
      const auto val_files = expand(val_data);
      const auto train_c = c_strings(train_files);
      const auto val_c = c_strings(val_files);
      const std::string config_text = config_path.empty() ? std::string() : read_text(config_path);
      const std::string out_dir_text = out_dir.string();

      dgf_train_request req{};
      req.config_json = config_path.empty() ? nullptr : config_text.c_str();
      req.train_files = train_c.data();
      req.n_train = train_c.size();
      req.val_files = val_c.empty() ? nullptr : val_c.data();
      req.n_val = val_c.size();
      unsigned ablate = 0;
      if (no_dm) ablate |= DGF_ABLATE_DM;
      if (no_ffi) ablate |= DGF_ABLATE_FFI;
      if (no_sff) ablate |= DGF_ABLATE_SFF;
      req.ablate = ablate;
      req.resume_checkpoint = resume.empty() ? nullptr : resume.c_str();
      req.out_dir = out_dir_text.c_str();
      req.epochs = epochs;
      req.on_epoch = on_epoch;

      Model model;
      check(dgf_train(&req, model.out()));
      const std::string ckpt = (out_dir / "model.ckpt").string();
      check(dgf_model_save(model.get(), ckpt.c_str()));
      char* info = nullptr;
      check(dgf_model_describe(model.get(), &info));
      std::printf("%s\nsaved %s\n", info, ckpt.c_str());
      dgf_string_free(info);
    } else if (*predict) {
      if (predict_data.empty()) predict_data.push_back((out_root / "scenarios").string());
      Model model(model_path);
      fs::create_directories(predict_out);
      int n = 0;
      for (const auto& f : expand(predict_data)) {
        const std::string dump = (fs::path(predict_out) / fs::path(f).filename()).string();
        check(dgf_predict_file(model.get(), f.c_str(), dump.c_str()));
        ++n;
      }
      std::printf("wrote %d prediction dumps to %s\n", n, predict_out.c_str());
    } else if (*eval) {
      if (eval_data.empty()) eval_data.push_back((out_root / "scenarios").string());
      eo.with_dac = no_dac ? 0 : 1;
      eo.ensemble = ensemble_flag ? 1 : 0;
      const auto files = expand(eval_data);
      const auto files_c = c_strings(files);
      dgf_metrics m{};
      if (!dumps.empty()) {
        const auto dump_files = expand(dumps);
        const auto dumps_c = c_strings(dump_files);
        check(dgf_evaluate_dumps(files_c.data(), files_c.size(), dumps_c.data(), dumps_c.size(), &eo, &m));
      } else {
        Model model(model_path);
        check(dgf_evaluate_model(model.get(), files_c.data(), files_c.size(), &eo, &m));
      }
      write_metrics(m, eval_out);
    } else if (*ens) {
      const auto files = expand(ens_dumps);
      const auto files_c = c_strings(files);
      check(dgf_ensemble(files_c.data(), files_c.size(), ens_modes, ens_out.c_str()));
      std::printf("merged %zu dumps into %s\n", files.size(), ens_out.c_str());
    } else if (*grad) {
      std::printf("%-28s %-4s %10s %8s  %s\n", "block", "", "max rel", "time", "worst coordinate");
      int all_pass = 0;
      check(dgf_gradcheck(grad_seed, tol, on_gradcheck, nullptr, &all_pass));
      std::printf("%s\n", all_pass ? "all blocks pass" : "gradient check FAILED");
      return all_pass ? 0 : 1;
    }
  } catch (const CallError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

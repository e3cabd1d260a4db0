// Copyright 2026 AASV toolkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

// Command-line front end: corpus generation, encoder training and
// fine-tuning, domain classifier training, embedding extraction with
// fusion, evaluation, and the end-to-end pattern check.
//
// Exit codes: 0 ok, 1 assertion failure, 2 usage or config error,
// 3 IO or missing-prerequisite error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aasv/kernels.hpp"
#include "aasv/pipeline.hpp"

namespace {

struct CommonOpts {
  std::optional<std::filesystem::path> config_file;
  std::vector<std::string> overrides;
  std::size_t threads = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file,
                  "Config file (key = value lines); defaults to $AASV_CONFIG");
  cmd->add_option("--set", opts.overrides,
                  "Override a config key, e.g. --set seed=7 (repeatable)");
  cmd->add_option("--threads", opts.threads, "Worker cap for parallel stages");
}

aasv::ExperimentConfig make_config(const CommonOpts& opts) {
  auto file = opts.config_file;
  if (!file) {
    if (const char* env = std::getenv("AASV_CONFIG")) file = env;
  }
  auto cfg = aasv::load_config(file, opts.overrides);
  cfg.threads = opts.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-agnostic speaker verification toolkit"};
  app.require_subcommand(1);

  CommonOpts opts;
  bool virtual_audio = false;
  bool skip_train = false;

  auto* gen = app.add_subcommand("gen", "Generate the synthetic corpus");
  add_common(gen, opts);
  gen->add_flag("--virtual", virtual_audio,
                "Write only the manifest; waveforms regenerate from seeds");

  auto* train =
      app.add_subcommand("train", "Train the adult encoder from scratch");
  add_common(train, opts);

  auto* finetune = app.add_subcommand(
      "finetune", "Fine-tune the adult encoder on children; also writes the "
                  "weight-space ensemble");
  add_common(finetune, opts);

  auto* train_dc = app.add_subcommand(
      "train-dc", "Train the domain classifier on frozen adult embeddings");
  add_common(train_dc, opts);

  auto* embed_cmd = app.add_subcommand(
      "embed", "Extract test-split embeddings for every system");
  add_common(embed_cmd, opts);

  auto* fuse_cmd = app.add_subcommand(
      "fuse", "Alias of embed: fusion happens during extraction");
  add_common(fuse_cmd, opts);

  auto* eval_cmd =
      app.add_subcommand("eval", "Score trials and write the EER report");
  add_common(eval_cmd, opts);

  auto* repro = app.add_subcommand(
      "reproduce-pattern",
      "Run the whole pipeline and assert the cross-domain pattern");
  add_common(repro, opts);
  repro->add_flag("--skip-train", skip_train,
                  "Reuse existing checkpoints; evaluation only");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = make_config(opts);
    if (gen->parsed()) {
      if (virtual_audio) cfg.virtual_audio = true;
      aasv::stage_gen(cfg);
      std::cout << "manifest: " << aasv::manifest_path(cfg).string() << "\n";
    } else if (train->parsed()) {
      aasv::stage_gen(cfg);
      aasv::stage_train(cfg);
      std::cout << "checkpoint: "
                << aasv::checkpoint_path(cfg, "adult").string() << "\n";
    } else if (finetune->parsed()) {
      aasv::stage_finetune(cfg);
      std::cout << "checkpoint: "
                << aasv::checkpoint_path(cfg, "child").string() << "\n";
    } else if (train_dc->parsed()) {
      aasv::stage_train_dc(cfg);
      std::cout << "checkpoint: " << aasv::checkpoint_path(cfg, "dc").string()
                << "\n";
    } else if (embed_cmd->parsed() || fuse_cmd->parsed()) {
      aasv::stage_embed(cfg);
      std::cout << "embeddings: "
                << aasv::embeddings_path(cfg, "aasv").string() << " (+4)\n";
    } else if (eval_cmd->parsed()) {
      aasv::stage_eval(cfg);
      std::cout << aasv::format_report(aasv::load_report(cfg));
    } else if (repro->parsed()) {
      std::cout << "simd backend: " << aasv::kernels::active_backend()
                << "\n";
      auto sum = aasv::reproduce_pattern(cfg, skip_train);
      std::cout << aasv::format_report(sum.report) << "\n";
      for (const auto& c : sum.checks)
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << " ("
                  << c.detail << ")\n";
      if (!sum.all_pass) return 1;
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 3;
  }
  return 0;
}

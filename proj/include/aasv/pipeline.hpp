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

#ifndef AASV_PIPELINE_HPP
#define AASV_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aasv/corpus.hpp"
#include "aasv/domain.hpp"
#include "aasv/encoder.hpp"
#include "aasv/eval.hpp"
#include "aasv/fusion.hpp"

namespace aasv {

/// Full experiment description: corpus, both encoder trainings, domain
/// classifier, fusion, and trial counts, driven by one master seed.
struct ExperimentConfig {
  std::filesystem::path work_dir = "work";
  bool virtual_audio = true;  // regenerate waveforms from seeds, no WAVs
  std::size_t threads = 1;

  CorpusConfig corpus;
  TrainConfig train;            // adult encoder
  std::size_t finetune_epochs = 30;
  DomainTrainConfig dc;
  std::size_t dc_augment_copies = 2;  // augmented embeddings per utterance
  double wse_alpha = 0.5;
  std::size_t trial_pos = 200;  // per evaluation condition
  std::size_t trial_neg = 200;
  std::uint64_t seed = 1234;
};

// Key = value config file ('#' comments, blank lines ignored). Unknown
// keys are an error. Overrides are "key=value" strings and win over the
// file. See config_text for the full key list.
ExperimentConfig load_config(const std::optional<std::filesystem::path>& file,
                             const std::vector<std::string>& overrides);

// Canonical echo of every effective setting, one key = value per line.
std::string config_text(const ExperimentConfig& cfg);

// FNV-1a over the canonical text of the keys a stage depends on; stages
// are content-addressed by this hash so stale artifacts never evaluate.
std::string config_hash(const ExperimentConfig& cfg, const std::string& stage);

// Pipeline stages. Each writes its artifacts plus a .stamp file carrying
// the stage hash into work_dir, and skips work when a matching stamp and
// artifact already exist. Prerequistite stages must have been run; a
// missing or stale upstream artifact is an error, never a silent retrain.
void stage_gen(const ExperimentConfig& cfg);
void stage_train(const ExperimentConfig& cfg);
void stage_finetune(const ExperimentConfig& cfg);
void stage_train_dc(const ExperimentConfig& cfg);
void stage_embed(const ExperimentConfig& cfg);
void stage_eval(const ExperimentConfig& cfg);

// Artifact paths under cfg.work_dir.
std::filesystem::path manifest_path(const ExperimentConfig& cfg);
std::filesystem::path checkpoint_path(const ExperimentConfig& cfg,
                                      const std::string& which);
std::filesystem::path embeddings_path(const ExperimentConfig& cfg,
                                      const std::string& system);
std::filesystem::path report_path(const ExperimentConfig& cfg,
                                  const std::string& ext);

/// Evaluation conditions: child test speakers bucketed into three
/// severity bands (young = most shifted) plus the adult test set.
struct EvalCondition {
  std::string name;
  Domain domain = Domain::Child;
  double severity_lo = 0.0;
  double severity_hi = 1.0;
};
std::vector<EvalCondition> eval_conditions();

// The report grid produced by stage_eval, reloaded from disk.
Report load_report(const ExperimentConfig& cfg);

struct PatternCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PatternSummary {
  std::vector<PatternCheck> checks;
  bool all_pass = false;
  Report report;
};

// Runs gen -> train -> finetune -> train-dc -> embed -> eval (honoring
// stamps; skip_train requires existing fresh checkpoints) and asserts the
// cross-domain pattern: specialist gaps, fused system within tolerance of
// the better specialist per domain, and the no-classifier ablation gap.
PatternSummary reproduce_pattern(const ExperimentConfig& cfg,
                                 bool skip_train);

// Mean silhouette coefficient of the two clusters under Euclidean
// distance. Needs >= 2 points per cluster.
double silhouette(const std::vector<Tensor>& cluster_a,
                  const std::vector<Tensor>& cluster_b);

// Embedding table for one split under a frozen encoder (clean features,
// CMN applied), keyed by utterance id. Used by evaluation and analysis.
std::map<std::string, Tensor> embed_split(const Manifest& manifest,
                                          Split split, Encoder& encoder,
                                          const ExperimentConfig& cfg);

// Labeled frozen-encoder embeddings (child = 0, adult = 1) of the
// classifier training split: clean plus augmented copies per utterance.
std::vector<LabeledEmbedding> dc_training_embeddings(
    const Manifest& manifest, Encoder& encoder, const ExperimentConfig& cfg);

}  // namespace aasv

#endif  // AASV_PIPELINE_HPP

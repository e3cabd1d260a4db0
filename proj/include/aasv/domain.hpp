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

#ifndef AASV_DOMAIN_HPP
#define AASV_DOMAIN_HPP

#include <filesystem>
#include <vector>

#include "aasv/checkpoint.hpp"
#include "aasv/layers.hpp"
#include "aasv/rng.hpp"
#include "aasv/tensor.hpp"

namespace aasv {

/// Softmax pair over {child, adult}; the dynamic fusion coefficients.
struct DomainPosterior {
  double p_child = 0.5;
  double p_adult = 0.5;
};

/// Two-layer perceptron over fixed-length embeddings: dense d -> h,
/// ReLU, dense h -> 2 (logit order: [child, adult]).
class DomainClassifier {
 public:
  DomainClassifier(std::size_t embed_dim, std::size_t hidden,
                   std::uint64_t init_seed);

  DomainPosterior classify(const Tensor& embedding);

  // Training-mode forward: [batch x d] -> logits [batch x 2].
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dlogits);
  std::vector<Parameter*> params();

  std::size_t embed_dim() const { return embed_dim_; }

  Checkpoint to_checkpoint() const;
  static DomainClassifier from_checkpoint(const Checkpoint& ck);

 private:
  std::size_t embed_dim_, hidden_;
  Rng init_rng_;
  DenseLayer fc1_, fc2_;
  ReluLayer relu_;
};

/// Labeled embedding for classifier training: label 0 = child, 1 = adult.
struct LabeledEmbedding {
  Tensor values;
  int label = 0;
};

struct DomainTrainConfig {
  std::size_t hidden = 32;
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double base_lr = 1e-8;
  double max_lr = 1e-3;
  double weight_decay = 2e-6;
  double holdout_fraction = 0.2;  // stratified by class
  std::uint64_t seed = 1;
};

struct DomainTrainResult {
  DomainClassifier classifier;
  double holdout_accuracy = 0.0;
  double holdout_f1 = 0.0;  // child = positive class
  std::vector<double> epoch_loss;
};

// Cross-entropy training with Adam on a stratified train/holdout split.
// Requires both classes present.
DomainTrainResult train_domain_classifier(
    const std::vector<LabeledEmbedding>& data, const DomainTrainConfig& cfg);

// 2 * P * R / (P + R) with the given positive class; 0 when there are no
// predicted or true positives.
double f1_score(const std::vector<int>& predictions,
                const std::vector<int>& labels, int positive_class);

struct RatioRow {
  std::string ratio;  // e.g. "3:1"
  std::size_t adult_utts = 0;
  std::size_t child_utts = 0;
  double adult_acc = 0.0;
  double child_acc = 0.0;
};

// Trains one classifier per (adult_count, child_count) pair on training
// embeddings and evaluates per-domain accuracy on fixed test embeddings.
std::vector<RatioRow> ratio_harness(
    const std::vector<std::pair<std::size_t, std::size_t>>& ratios,
    const std::vector<LabeledEmbedding>& train_child,
    const std::vector<LabeledEmbedding>& train_adult,
    const std::vector<LabeledEmbedding>& test_child,
    const std::vector<LabeledEmbedding>& test_adult,
    const DomainTrainConfig& cfg);

// UTF-8 TSV: ratio, adult_utts, child_utts, adult_acc, child_acc.
void write_ratio_table(const std::filesystem::path& path,
                       const std::vector<RatioRow>& rows);

}  // namespace aasv

#endif  // AASV_DOMAIN_HPP

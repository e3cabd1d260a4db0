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

#ifndef AASV_ENCODER_HPP
#define AASV_ENCODER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "aasv/checkpoint.hpp"
#include "aasv/features.hpp"
#include "aasv/layers.hpp"
#include "aasv/losses.hpp"
#include "aasv/optim.hpp"

namespace aasv {

struct EncoderArch {
  std::size_t n_mels = 80;
  std::size_t channels = 64;    // TDNN frame layers
  std::size_t bottleneck = 128; // 1x1 conv before pooling
  std::size_t embed_dim = 64;   // d

  bool operator==(const EncoderArch&) const = default;
};

/// TDNN speaker embedding network: three dilated frame layers
/// (widths 5/3/3, dilations 1/2/3) with ReLU + batch norm, a 1x1
/// bottleneck conv, statistics pooling, and a dense projection to d dims.
class Encoder {
 public:
  Encoder(const EncoderArch& arch, std::uint64_t init_seed);

  // x: [batch x n_mels x frames] -> [batch x embed_dim].
  Tensor forward(const Tensor& x, bool train);
  // demb: [batch x embed_dim]; accumulates parameter grads.
  void backward(const Tensor& demb);

  std::vector<Parameter*> params();
  // Batch-norm running statistics; serialized and WSE-merged like weights.
  std::vector<std::pair<std::string, Tensor*>> buffers();

  const EncoderArch& arch() const { return arch_; }
  std::size_t embed_dim() const { return arch_.embed_dim; }

  Checkpoint to_checkpoint() const;
  static Encoder from_checkpoint(const Checkpoint& ck);

 private:
  EncoderArch arch_;
  Rng init_rng_;  // declared before the layers: feeds their initializers
  Conv1dLayer conv1_, conv2_, conv3_, conv4_;
  ReluLayer relu1_, relu2_, relu3_, relu4_;
  BatchNorm1dLayer bn1_, bn2_, bn3_, bn4_;
  StatsPoolingLayer pool_;
  DenseLayer proj_;
};

/// d-dim embedding for a single utterance.
struct UtteranceEmbedding {
  std::string utterance_id;
  Tensor values;
};

// Inference-mode embedding of one feature matrix (frames x mels). The
// output dimensionality is d regardless of frame count.
UtteranceEmbedding embed(const FeatureMatrix& f, Encoder& encoder,
                         const std::string& utterance_id = "");

/// One labeled training utterance with its clean features and waveform
/// (the waveform is needed for waveform-domain augmentations).
struct TrainUtterance {
  std::string utterance_id;
  std::size_t speaker_index = 0;
  FeatureMatrix features;  // clean log-mel, pre-CMN
  Waveform wave;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  std::size_t crop_frames = 198;  // 2 s at 10 ms hop
  AamConfig aam{30.0, 0.2};
  double base_lr = 1e-8;
  double max_lr = 1e-3;
  std::int64_t cycle_steps = 0;  // 0: five epochs' worth of steps
  double weight_decay = 2e-6;
  bool augment = true;
  AugmentConfig aug;
  LogMelConfig mel;
  std::uint64_t seed = 1;
};

struct TrainLog {
  std::vector<double> step_loss;
  std::vector<double> step_lr;
  std::vector<double> epoch_loss;  // mean loss per epoch
};

struct TrainedEncoder {
  Encoder encoder;
  Parameter head;  // classification head [num_speakers x d]
  TrainLog log;
};

// AAM-softmax training from random init. Deterministic given (data order,
// config, seed). Requires >= 2 speakers.
TrainedEncoder train_encoder(const std::vector<TrainUtterance>& data,
                             std::size_t num_speakers, const TrainConfig& cfg);

// Fine-tune from existing weights with a freshly initialized head; the
// base encoder is copied, never mutated.
TrainedEncoder finetune(const Encoder& base,
                        const std::vector<TrainUtterance>& data,
                        std::size_t num_speakers, const TrainConfig& cfg);

// Weight space ensemble: every parameter (and batch-norm running
// statistic) is alpha * a + (1 - alpha) * c.
Encoder wse_merge(const Encoder& theta_a, const Encoder& theta_c,
                  double alpha);

}  // namespace aasv

#endif  // AASV_ENCODER_HPP

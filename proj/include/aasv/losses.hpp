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

#ifndef AASV_LOSSES_HPP
#define AASV_LOSSES_HPP

#include <utility>
#include <vector>

#include "aasv/tensor.hpp"

namespace aasv {

/// Additive angular margin configuration: logits are s * cos(theta) for
/// impostor classes and s * cos(theta + m) for the labeled class.
struct AamConfig {
  double scale = 30.0;
  double margin = 0.2;  // radians

  void validate() const {
    if (scale <= 0.0 || margin < 0.0 || margin >= 1.5707963267948966)
      throw std::invalid_argument("AamConfig: need s > 0, 0 <= m < pi/2");
  }
};

// Margin-adjusted cosine logits for one embedding against a class head
// [classes x d]. Embedding and head rows are L2-normalized internally;
// cosines are clamped to [-1, 1] and theta + m is clamped to pi.
Tensor aam_logits(const Tensor& embedding, const Tensor& head,
                  std::size_t label, const AamConfig& cfg);

// Numerically stable cross entropy for one logit vector.
// Returns {loss, d loss / d logits}.
std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits,
                                                std::size_t label);

/// Batch AAM-softmax: forward computes the mean cross-entropy over the
/// batch; backward fills gradients w.r.t. the raw (unnormalized)
/// embeddings and accumulates into the head parameter's grad.
class AamSoftmaxLoss {
 public:
  explicit AamSoftmaxLoss(AamConfig cfg) : cfg_(cfg) { cfg_.validate(); }

  // embeddings: [batch x d], head: Parameter [classes x d].
  double forward(const Tensor& embeddings, const Parameter& head,
                 const std::vector<std::size_t>& labels);
  Tensor backward(const Tensor& embeddings, Parameter& head,
                  const std::vector<std::size_t>& labels);

 private:
  AamConfig cfg_;
  Tensor ehat_, what_;    // normalized embeddings / head rows
  Tensor cos_;            // [batch x classes] clamped cosines
  std::vector<double> enorm_, wnorm_;
  Tensor dlogits_cache_;  // [batch x classes], includes the 1/batch factor
  bool has_cache_ = false;
};

}  // namespace aasv

#endif  // AASV_LOSSES_HPP

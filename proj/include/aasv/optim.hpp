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

#ifndef AASV_OPTIM_HPP
#define AASV_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "aasv/tensor.hpp"

namespace aasv {

/// Per-parameter Adam moments plus hyperparameters.
struct AdamState {
  Tensor m;
  Tensor v;
  std::int64_t step_count = 0;
  double weight_decay = 2e-6;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(const std::vector<std::size_t>& shape,
                     double wd = 2e-6, double b1 = 0.9, double b2 = 0.999,
                     double eps = 1e-8)
      : m(shape), v(shape), weight_decay(wd), beta1(b1), beta2(b2),
        epsilon(eps) {}
};

// One Adam update with bias correction. Weight decay is decoupled:
// value -= lr * wd * value, applied before the Adam delta.
void adam_step(Parameter& param, AdamState& state, double lr);

/// Triangular cyclic learning-rate schedule.
struct CyclicLrSchedule {
  double base_lr = 1e-8;
  double max_lr = 1e-3;
  std::int64_t cycle_steps = 200;
};

double lr_at(const CyclicLrSchedule& schedule, std::int64_t step);

/// One optimizer slot per parameter, built lazily by the training loops.
class AdamOptimizer {
 public:
  AdamOptimizer(double weight_decay = 2e-6, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8)
      : wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(epsilon) {}

  void step(std::vector<Parameter*>& params, double lr) {
    if (states_.empty())
      for (auto* p : params)
        states_.emplace_back(p->value.shape(), wd_, b1_, b2_, eps_);
    for (std::size_t i = 0; i < params.size(); ++i)
      adam_step(*params[i], states_[i], lr);
  }

 private:
  double wd_, b1_, b2_, eps_;
  std::vector<AdamState> states_;
};

}  // namespace aasv

#endif  // AASV_OPTIM_HPP

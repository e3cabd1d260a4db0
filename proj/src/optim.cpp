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

#include "aasv/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace aasv {

void adam_step(Parameter& param, AdamState& state, double lr) {
  if (!param.grad.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient for " +
                             param.name);
  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, double(state.step_count));
  const double bc2 = 1.0 - std::pow(b2, double(state.step_count));

  float* w = param.value.data();
  const float* g = param.grad.data();
  float* m = state.m.data();
  float* v = state.v.data();
  const std::size_t n = param.value.size();
  const double decay = lr * state.weight_decay;

  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    const double mi = b1 * m[i] + (1.0 - b1) * gi;
    const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
    m[i] = float(mi);
    v[i] = float(vi);
    const double mhat = mi / bc1;
    const double vhat = vi / bc2;
    double wi = w[i];
    wi -= decay * wi;
    wi -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    w[i] = float(wi);
  }
}

double lr_at(const CyclicLrSchedule& s, std::int64_t step) {
  const std::int64_t t = step % s.cycle_steps;
  const double half = double(s.cycle_steps) / 2.0;
  const double frac = t < half ? double(t) / half : (double(s.cycle_steps) - double(t)) / half;
  return s.base_lr + frac * (s.max_lr - s.base_lr);
}

}  // namespace aasv

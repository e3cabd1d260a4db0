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

#ifndef AASV_LAYERS_HPP
#define AASV_LAYERS_HPP

#include <vector>

#include "aasv/rng.hpp"
#include "aasv/tensor.hpp"

namespace aasv {

// Layers own their parameters and the forward caches needed for backward.
// One forward(train=true) must precede each backward; backward accumulates
// into Parameter::grad and returns the gradient w.r.t. the layer input.

/// y = x * w + b, x: [batch x in], w: [in x out], b: [out].
class DenseLayer {
 public:
  DenseLayer(std::size_t in, std::size_t out, Rng& rng, std::string name);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  Parameter w, b;
  std::vector<Parameter*> params() { return {&w, &b}; }

 private:
  Tensor x_cache_;
  bool has_cache_ = false;
};

/// Temporal convolution with "same" padding. Input [batch x c_in x frames],
/// weight [c_out x c_in x width], odd width, output frame count preserved.
class Conv1dLayer {
 public:
  Conv1dLayer(std::size_t c_in, std::size_t c_out, std::size_t width,
              std::size_t dilation, Rng& rng, std::string name);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  Parameter w, b;
  std::vector<Parameter*> params() { return {&w, &b}; }
  std::size_t c_in() const { return c_in_; }
  std::size_t dilation() const { return dilation_; }

 private:
  void im2col(const float* x, float* col, std::size_t frames) const;
  std::size_t c_in_, c_out_, width_, dilation_;
  Tensor col_cache_;  // [batch x (c_in*width) x frames]
  std::vector<std::size_t> x_shape_;
  bool has_cache_ = false;
};

class ReluLayer {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

 private:
  Tensor x_cache_;
  bool has_cache_ = false;
};

/// Per-channel batch normalization over [batch x channels x frames].
/// Training mode uses batch statistics and updates running averages
/// (momentum 0.9); inference mode uses the frozen running averages.
class BatchNorm1dLayer {
 public:
  explicit BatchNorm1dLayer(std::size_t channels, std::string name);

  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  Parameter gamma, beta;
  Tensor running_mean, running_var;  // buffers, serialized but not trained
  std::vector<Parameter*> params() { return {&gamma, &beta}; }

  double momentum = 0.9;
  double epsilon = 1e-5;

 private:
  std::size_t channels_;
  Tensor x_cache_;
  std::vector<double> mean_cache_, invstd_cache_;
  bool has_cache_ = false;
};

/// Concatenates per-channel mean and standard deviation over frames:
/// [batch x channels x frames] -> [batch x 2*channels]. Parameter-free.
class StatsPoolingLayer {
 public:
  Tensor forward(const Tensor& x, bool train);
  Tensor backward(const Tensor& dy);

  double epsilon = 1e-8;

 private:
  Tensor x_cache_;
  std::vector<double> mean_cache_, std_cache_;
  bool has_cache_ = false;
};

// Spec-level free functions (stateless views over the layer math).
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor conv1d_forward(const Tensor& x, const Tensor& kernels, const Tensor& bias,
                      std::size_t dilation);

}  // namespace aasv

#endif  // AASV_LAYERS_HPP

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

#include "aasv/layers.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "aasv/kernels.hpp"

namespace aasv {

namespace {

// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void init_fan_in(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(fan_in));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = float(uniform(rng, -bound, bound));
}

}  // namespace

// ---------------------------------------------------------------- Dense

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Rng& rng,
                       std::string name)
    : w(name + ".w", Tensor({in, out})), b(name + ".b", Tensor({out})) {
  init_fan_in(w.value, in, rng);
  init_fan_in(b.value, in, rng);
}

Tensor DenseLayer::forward(const Tensor& x, bool train) {
  if (x.rank() != 2 || x.dim(1) != w.value.dim(0))
    throw std::invalid_argument("DenseLayer: shape mismatch");
  const std::size_t batch = x.dim(0), in = w.value.dim(0),
                    out = w.value.dim(1);
  Tensor y({batch, out});
  for (std::size_t i = 0; i < batch; ++i)
    std::memcpy(y.data() + i * out, b.value.data(), out * sizeof(float));
  kernels::gemm_nn(x.data(), w.value.data(), y.data(), batch, in, out);
  if (train) {
    x_cache_ = x;
    has_cache_ = true;
  }
  return y;
}

Tensor DenseLayer::backward(const Tensor& dy) {
  if (!has_cache_) throw std::logic_error("DenseLayer: backward before forward");
  const std::size_t batch = x_cache_.dim(0), in = w.value.dim(0),
                    out = w.value.dim(1);
  // dW += x^T dy ; db += column sums of dy ; dx = dy W^T.
  kernels::gemm_tn(x_cache_.data(), dy.data(), w.grad.data(), batch, in, out);
  for (std::size_t i = 0; i < batch; ++i)
    kernels::axpy(1.0f, dy.data() + i * out, b.grad.data(), out);
  Tensor dx({batch, in});
  kernels::gemm_nt(dy.data(), w.value.data(), dx.data(), batch, out, in);
  has_cache_ = false;
  return dx;
}

// ---------------------------------------------------------------- Conv1d

Conv1dLayer::Conv1dLayer(std::size_t c_in, std::size_t c_out,
                         std::size_t width, std::size_t dilation, Rng& rng,
                         std::string name)
    : w(name + ".w", Tensor({c_out, c_in, width})),
      b(name + ".b", Tensor({c_out})),
      c_in_(c_in), c_out_(c_out), width_(width), dilation_(dilation) {
  if (width % 2 == 0) throw std::invalid_argument("Conv1dLayer: even width");
  init_fan_in(w.value, c_in * width, rng);
  init_fan_in(b.value, c_in * width, rng);
}

void Conv1dLayer::im2col(const float* x, float* col,
                         std::size_t frames) const {
  // col[(c*width + u) * frames + t] = x[c, t + (u - width/2)*dilation],
  // zero outside [0, frames).
  const std::ptrdiff_t half = std::ptrdiff_t(width_ / 2);
  for (std::size_t c = 0; c < c_in_; ++c) {
    const float* xc = x + c * frames;
    for (std::size_t u = 0; u < width_; ++u) {
      float* row = col + (c * width_ + u) * frames;
      const std::ptrdiff_t off =
          (std::ptrdiff_t(u) - half) * std::ptrdiff_t(dilation_);
      for (std::size_t t = 0; t < frames; ++t) {
        const std::ptrdiff_t src = std::ptrdiff_t(t) + off;
        row[t] = (src >= 0 && src < std::ptrdiff_t(frames)) ? xc[src] : 0.0f;
      }
    }
  }
}

Tensor Conv1dLayer::forward(const Tensor& x, bool train) {
  if (x.rank() != 3 || x.dim(1) != c_in_)
    throw std::invalid_argument("Conv1dLayer: channel mismatch");
  const std::size_t batch = x.dim(0), frames = x.dim(2);
  const std::size_t kdim = c_in_ * width_;
  Tensor col({batch, kdim, frames});
  Tensor y({batch, c_out_, frames});
  for (std::size_t i = 0; i < batch; ++i) {
    float* coli = col.data() + i * kdim * frames;
    im2col(x.data() + i * c_in_ * frames, coli, frames);
    float* yi = y.data() + i * c_out_ * frames;
    for (std::size_t oc = 0; oc < c_out_; ++oc)
      for (std::size_t t = 0; t < frames; ++t) yi[oc * frames + t] = b.value[oc];
    kernels::gemm_nn(w.value.data(), coli, yi, c_out_, kdim, frames);
  }
  if (train) {
    col_cache_ = std::move(col);
    x_shape_ = x.shape();
    has_cache_ = true;
  }
  return y;
}

Tensor Conv1dLayer::backward(const Tensor& dy) {
  if (!has_cache_) throw std::logic_error("Conv1dLayer: backward before forward");
  const std::size_t batch = x_shape_[0], frames = x_shape_[2];
  const std::size_t kdim = c_in_ * width_;
  Tensor dx({batch, c_in_, frames});
  Tensor dcol({kdim, frames});
  const std::ptrdiff_t half = std::ptrdiff_t(width_ / 2);
  for (std::size_t i = 0; i < batch; ++i) {
    const float* coli = col_cache_.data() + i * kdim * frames;
    const float* dyi = dy.data() + i * c_out_ * frames;
    // dW += dy * col^T ; db += per-channel sums of dy.
    kernels::gemm_nt(dyi, coli, w.grad.data(), c_out_, frames, kdim);
    for (std::size_t oc = 0; oc < c_out_; ++oc) {
      double s = 0.0;
      for (std::size_t t = 0; t < frames; ++t) s += dyi[oc * frames + t];
      b.grad[oc] += float(s);
    }
    // dcol = W^T dy, then col2im scatter into dx.
    dcol.fill(0.0f);
    kernels::gemm_tn(w.value.data(), dyi, dcol.data(), c_out_, kdim, frames);
    float* dxi = dx.data() + i * c_in_ * frames;
    for (std::size_t c = 0; c < c_in_; ++c) {
      for (std::size_t u = 0; u < width_; ++u) {
        const float* row = dcol.data() + (c * width_ + u) * frames;
        const std::ptrdiff_t off =
            (std::ptrdiff_t(u) - half) * std::ptrdiff_t(dilation_);
        for (std::size_t t = 0; t < frames; ++t) {
          const std::ptrdiff_t dst = std::ptrdiff_t(t) + off;
          if (dst >= 0 && dst < std::ptrdiff_t(frames))
            dxi[c * frames + dst] += row[t];
        }
      }
    }
  }
  has_cache_ = false;
  return dx;
}

// ---------------------------------------------------------------- ReLU

Tensor ReluLayer::forward(const Tensor& x, bool train) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  if (train) {
    x_cache_ = x;
    has_cache_ = true;
  }
  return y;
}

Tensor ReluLayer::backward(const Tensor& dy) {
  if (!has_cache_) throw std::logic_error("ReluLayer: backward before forward");
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx[i] = x_cache_[i] > 0.0f ? dy[i] : 0.0f;
  has_cache_ = false;
  return dx;
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm1dLayer::BatchNorm1dLayer(std::size_t channels, std::string name)
    : gamma(name + ".gamma", Tensor({channels})),
      beta(name + ".beta", Tensor({channels})),
      running_mean({channels}), running_var({channels}),
      channels_(channels) {
  gamma.value.fill(1.0f);
  running_var.fill(1.0f);
}

Tensor BatchNorm1dLayer::forward(const Tensor& x, bool train) {
  if (x.rank() != 3 || x.dim(1) != channels_)
    throw std::invalid_argument("BatchNorm1dLayer: channel mismatch");
  const std::size_t batch = x.dim(0), frames = x.dim(2);
  const double count = double(batch) * double(frames);
  Tensor y(x.shape());
  if (train) {
    mean_cache_.assign(channels_, 0.0);
    invstd_cache_.assign(channels_, 0.0);
    for (std::size_t c = 0; c < channels_; ++c) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < batch; ++i) {
        const float* xc = x.data() + (i * channels_ + c) * frames;
        for (std::size_t t = 0; t < frames; ++t) {
          sum += xc[t];
          sq += double(xc[t]) * double(xc[t]);
        }
      }
      const double mean = sum / count;
      double var = sq / count - mean * mean;
      if (var < 0.0) var = 0.0;
      const double invstd = 1.0 / std::sqrt(var + epsilon);
      mean_cache_[c] = mean;
      invstd_cache_[c] = invstd;
      running_mean[c] = float(momentum * running_mean[c] + (1.0 - momentum) * mean);
      running_var[c] = float(momentum * running_var[c] + (1.0 - momentum) * var);
      const float g = gamma.value[c], bt = beta.value[c];
      for (std::size_t i = 0; i < batch; ++i) {
        const float* xc = x.data() + (i * channels_ + c) * frames;
        float* yc = y.data() + (i * channels_ + c) * frames;
        for (std::size_t t = 0; t < frames; ++t)
          yc[t] = float((double(xc[t]) - mean) * invstd) * g + bt;
      }
    }
    x_cache_ = x;
    has_cache_ = true;
  } else {
    for (std::size_t c = 0; c < channels_; ++c) {
      const double invstd = 1.0 / std::sqrt(double(running_var[c]) + epsilon);
      const double mean = running_mean[c];
      const float g = gamma.value[c], bt = beta.value[c];
      for (std::size_t i = 0; i < batch; ++i) {
        const float* xc = x.data() + (i * channels_ + c) * frames;
        float* yc = y.data() + (i * channels_ + c) * frames;
        for (std::size_t t = 0; t < frames; ++t)
          yc[t] = float((double(xc[t]) - mean) * invstd) * g + bt;
      }
    }
  }
  return y;
}

Tensor BatchNorm1dLayer::backward(const Tensor& dy) {
  if (!has_cache_)
    throw std::logic_error("BatchNorm1dLayer: backward before forward");
  const std::size_t batch = x_cache_.dim(0), frames = x_cache_.dim(2);
  const double count = double(batch) * double(frames);
  Tensor dx(x_cache_.shape());
  for (std::size_t c = 0; c < channels_; ++c) {
    const double mean = mean_cache_[c], invstd = invstd_cache_[c];
    const double g = gamma.value[c];
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
      const float* xc = x_cache_.data() + (i * channels_ + c) * frames;
      const float* dyc = dy.data() + (i * channels_ + c) * frames;
      for (std::size_t t = 0; t < frames; ++t) {
        const double xhat = (double(xc[t]) - mean) * invstd;
        sum_dy += dyc[t];
        sum_dy_xhat += dyc[t] * xhat;
      }
    }
    gamma.grad[c] += float(sum_dy_xhat);
    beta.grad[c] += float(sum_dy);
    for (std::size_t i = 0; i < batch; ++i) {
      const float* xc = x_cache_.data() + (i * channels_ + c) * frames;
      const float* dyc = dy.data() + (i * channels_ + c) * frames;
      float* dxc = dx.data() + (i * channels_ + c) * frames;
      for (std::size_t t = 0; t < frames; ++t) {
        const double xhat = (double(xc[t]) - mean) * invstd;
        dxc[t] = float(g * invstd *
                       (dyc[t] - sum_dy / count - xhat * sum_dy_xhat / count));
      }
    }
  }
  has_cache_ = false;
  return dx;
}

// ---------------------------------------------------------------- Pooling

Tensor StatsPoolingLayer::forward(const Tensor& x, bool train) {
  if (x.rank() != 3) throw std::invalid_argument("StatsPooling: rank != 3");
  const std::size_t batch = x.dim(0), channels = x.dim(1), frames = x.dim(2);
  Tensor y({batch, 2 * channels});
  if (train) {
    mean_cache_.assign(batch * channels, 0.0);
    std_cache_.assign(batch * channels, 0.0);
  }
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float* xc = x.data() + (i * channels + c) * frames;
      double sum = 0.0, sq = 0.0;
      for (std::size_t t = 0; t < frames; ++t) {
        sum += xc[t];
        sq += double(xc[t]) * double(xc[t]);
      }
      const double mean = sum / double(frames);
      double var = sq / double(frames) - mean * mean;
      if (var < 0.0) var = 0.0;
      const double sd = std::sqrt(var + epsilon);
      y.at(i, c) = float(mean);
      y.at(i, channels + c) = float(sd);
      if (train) {
        mean_cache_[i * channels + c] = mean;
        std_cache_[i * channels + c] = sd;
      }
    }
  }
  if (train) {
    x_cache_ = x;
    has_cache_ = true;
  }
  return y;
}

Tensor StatsPoolingLayer::backward(const Tensor& dy) {
  if (!has_cache_)
    throw std::logic_error("StatsPooling: backward before forward");
  const std::size_t batch = x_cache_.dim(0), channels = x_cache_.dim(1),
                    frames = x_cache_.dim(2);
  Tensor dx(x_cache_.shape());
  for (std::size_t i = 0; i < batch; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const float* xc = x_cache_.data() + (i * channels + c) * frames;
      float* dxc = dx.data() + (i * channels + c) * frames;
      const double dmean = dy.at(i, c);
      const double dstd = dy.at(i, channels + c);
      const double mean = mean_cache_[i * channels + c];
      const double sd = std_cache_[i * channels + c];
      // d std / d x_t = (x_t - mean) / (frames * std); mean terms cancel.
      for (std::size_t t = 0; t < frames; ++t)
        dxc[t] = float(dmean / double(frames) +
                       dstd * (double(xc[t]) - mean) / (double(frames) * sd));
    }
  }
  has_cache_ = false;
  return dx;
}

// ------------------------------------------------------- free functions

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || x.dim(1) != w.dim(0) ||
      b.size() != w.dim(1))
    throw std::invalid_argument("dense_forward: shape mismatch");
  const std::size_t batch = x.dim(0), in = w.dim(0), out = w.dim(1);
  Tensor y({batch, out});
  for (std::size_t i = 0; i < batch; ++i)
    std::memcpy(y.data() + i * out, b.data(), out * sizeof(float));
  kernels::gemm_nn(x.data(), w.data(), y.data(), batch, in, out);
  return y;
}

Tensor conv1d_forward(const Tensor& x, const Tensor& kernels,
                      const Tensor& bias, std::size_t dilation) {
  if (x.rank() != 3 || kernels.rank() != 3 || x.dim(1) != kernels.dim(1))
    throw std::invalid_argument("conv1d_forward: channel mismatch");
  Rng dummy(0);
  Conv1dLayer layer(kernels.dim(1), kernels.dim(0), kernels.dim(2), dilation,
                    dummy, "tmp");
  layer.w.value = kernels;
  layer.b.value = bias;
  return layer.forward(x, /*train=*/false);
}

}  // namespace aasv

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

#include "aasv/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aasv/kernels.hpp"

namespace aasv {

namespace {

constexpr double kPi = 3.14159265358979323846;

double row_norm(const float* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += double(v[i]) * double(v[i]);
  return std::sqrt(s);
}

// cos(theta + m) as a function of c = cos(theta), clamped so that
// theta + m never exceeds pi.
double margin_cos(double c, double m) {
  c = std::clamp(c, -1.0, 1.0);
  const double theta = std::acos(c);
  return std::cos(std::min(theta + m, kPi));
}

double margin_cos_deriv(double c, double m) {
  c = std::clamp(c, -1.0, 1.0);
  const double theta = std::acos(c);
  if (theta + m >= kPi) return 0.0;
  const double sin_theta = std::max(std::sqrt(1.0 - c * c), 1e-6);
  return std::sin(theta + m) / sin_theta;
}

}  // namespace

Tensor aam_logits(const Tensor& embedding, const Tensor& head,
                  std::size_t label, const AamConfig& cfg) {
  cfg.validate();
  if (head.rank() != 2 || embedding.size() != head.dim(1))
    throw std::invalid_argument("aam_logits: dimension mismatch");
  if (label >= head.dim(0))
    throw std::out_of_range("aam_logits: label out of range");
  const std::size_t classes = head.dim(0), d = head.dim(1);
  const double en = row_norm(embedding.data(), d);
  if (en < 1e-12) throw std::invalid_argument("aam_logits: zero embedding");
  Tensor logits({classes});
  for (std::size_t j = 0; j < classes; ++j) {
    const double wn = row_norm(head.data() + j * d, d);
    if (wn < 1e-12) throw std::invalid_argument("aam_logits: zero head row");
    double c = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      c += double(embedding[i]) * double(head.at(j, i));
    c = std::clamp(c / (en * wn), -1.0, 1.0);
    logits[j] = float(cfg.scale * (j == label ? margin_cos(c, cfg.margin) : c));
  }
  return logits;
}

std::pair<double, Tensor> softmax_cross_entropy(const Tensor& logits,
                                                std::size_t label) {
  if (label >= logits.size())
    throw std::out_of_range("softmax_cross_entropy: label out of range");
  logits.check_finite("softmax_cross_entropy logits");
  const std::size_t n = logits.size();
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, double(logits[i]));
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(double(logits[i]) - mx);
  const double loss = -(double(logits[label]) - mx - std::log(z));
  Tensor grad({n});
  for (std::size_t i = 0; i < n; ++i)
    grad[i] = float(std::exp(double(logits[i]) - mx) / z -
                    (i == label ? 1.0 : 0.0));
  return {loss, std::move(grad)};
}

double AamSoftmaxLoss::forward(const Tensor& embeddings, const Parameter& head,
                               const std::vector<std::size_t>& labels) {
  const std::size_t batch = embeddings.dim(0), d = embeddings.dim(1);
  const std::size_t classes = head.value.dim(0);
  if (head.value.dim(1) != d || labels.size() != batch)
    throw std::invalid_argument("AamSoftmaxLoss: shape mismatch");

  ehat_ = embeddings;
  enorm_.resize(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    enorm_[i] = row_norm(embeddings.data() + i * d, d);
    if (enorm_[i] < 1e-12)
      throw std::invalid_argument("AamSoftmaxLoss: zero embedding");
    kernels::scale(ehat_.data() + i * d, float(1.0 / enorm_[i]), d);
  }
  what_ = head.value;
  wnorm_.resize(classes);
  for (std::size_t j = 0; j < classes; ++j) {
    wnorm_[j] = row_norm(head.value.data() + j * d, d);
    if (wnorm_[j] < 1e-12)
      throw std::invalid_argument("AamSoftmaxLoss: zero head row");
    kernels::scale(what_.data() + j * d, float(1.0 / wnorm_[j]), d);
  }

  cos_ = Tensor({batch, classes});
  kernels::gemm_nt(ehat_.data(), what_.data(), cos_.data(), batch, d, classes);
  for (std::size_t i = 0; i < cos_.size(); ++i)
    cos_[i] = float(std::clamp(double(cos_[i]), -1.0, 1.0));

  double total = 0.0;
  dlogits_cache_ = Tensor({batch, classes});
  Tensor row({classes});
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t y = labels[i];
    if (y >= classes) throw std::out_of_range("AamSoftmaxLoss: label range");
    for (std::size_t j = 0; j < classes; ++j) {
      const double c = cos_.at(i, j);
      row[j] = float(cfg_.scale *
                     (j == y ? margin_cos(c, cfg_.margin) : c));
    }
    auto [loss, grad] = softmax_cross_entropy(row, y);
    total += loss;
    for (std::size_t j = 0; j < classes; ++j)
      dlogits_cache_.at(i, j) = grad[j] / float(batch);
  }
  has_cache_ = true;
  return total / double(batch);
}

Tensor AamSoftmaxLoss::backward(const Tensor& embeddings, Parameter& head,
                                const std::vector<std::size_t>& labels) {
  if (!has_cache_)
    throw std::logic_error("AamSoftmaxLoss: backward before forward");
  const std::size_t batch = embeddings.dim(0), d = embeddings.dim(1);
  const std::size_t classes = head.value.dim(0);

  // dcos[i][j] = s * dlogit[i][j], with the margin chain factor on the
  // labeled class.
  Tensor dcos({batch, classes});
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t y = labels[i];
    for (std::size_t j = 0; j < classes; ++j) {
      double v = cfg_.scale * double(dlogits_cache_.at(i, j));
      if (j == y) v *= margin_cos_deriv(cos_.at(i, j), cfg_.margin);
      dcos.at(i, j) = float(v);
    }
  }

  // dE_i = (sum_j dcos_ij what_j - (sum_j dcos_ij cos_ij) ehat_i) / |e_i|
  Tensor de({batch, d});
  kernels::gemm_nn(dcos.data(), what_.data(), de.data(), batch, classes, d);
  for (std::size_t i = 0; i < batch; ++i) {
    double coef = 0.0;
    for (std::size_t j = 0; j < classes; ++j)
      coef += double(dcos.at(i, j)) * double(cos_.at(i, j));
    kernels::axpy(float(-coef), ehat_.data() + i * d, de.data() + i * d, d);
    kernels::scale(de.data() + i * d, float(1.0 / enorm_[i]), d);
  }

  // dW_j = (sum_i dcos_ij ehat_i - (sum_i dcos_ij cos_ij) what_j) / |w_j|
  Tensor dw({classes, d});
  kernels::gemm_tn(dcos.data(), ehat_.data(), dw.data(), batch, classes, d);
  for (std::size_t j = 0; j < classes; ++j) {
    double coef = 0.0;
    for (std::size_t i = 0; i < batch; ++i)
      coef += double(dcos.at(i, j)) * double(cos_.at(i, j));
    kernels::axpy(float(-coef), what_.data() + j * d, dw.data() + j * d, d);
    kernels::axpy(float(1.0 / wnorm_[j]), dw.data() + j * d,
                  head.grad.data() + j * d, d);
  }

  has_cache_ = false;
  return de;
}

}  // namespace aasv

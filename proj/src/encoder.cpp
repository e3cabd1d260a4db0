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

#include "aasv/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace aasv {

Encoder::Encoder(const EncoderArch& arch, std::uint64_t init_seed)
    : arch_(arch),
      init_rng_(init_seed),
      conv1_(arch.n_mels, arch.channels, 5, 1, init_rng_, "conv1"),
      conv2_(arch.channels, arch.channels, 3, 2, init_rng_, "conv2"),
      conv3_(arch.channels, arch.channels, 3, 3, init_rng_, "conv3"),
      conv4_(arch.channels, arch.bottleneck, 1, 1, init_rng_, "conv4"),
      bn1_(arch.channels, "bn1"),
      bn2_(arch.channels, "bn2"),
      bn3_(arch.channels, "bn3"),
      bn4_(arch.bottleneck, "bn4"),
      proj_(2 * arch.bottleneck, arch.embed_dim, init_rng_, "proj") {}

Tensor Encoder::forward(const Tensor& x, bool train) {
  if (x.rank() != 3 || x.dim(1) != arch_.n_mels)
    throw std::invalid_argument("Encoder: expected [batch x n_mels x frames]");
  Tensor h = bn1_.forward(relu1_.forward(conv1_.forward(x, train), train), train);
  h = bn2_.forward(relu2_.forward(conv2_.forward(h, train), train), train);
  h = bn3_.forward(relu3_.forward(conv3_.forward(h, train), train), train);
  h = bn4_.forward(relu4_.forward(conv4_.forward(h, train), train), train);
  h = pool_.forward(h, train);
  return proj_.forward(h, train);
}

void Encoder::backward(const Tensor& demb) {
  Tensor g = proj_.backward(demb);
  g = pool_.backward(g);
  g = conv4_.backward(relu4_.backward(bn4_.backward(g)));
  g = conv3_.backward(relu3_.backward(bn3_.backward(g)));
  g = conv2_.backward(relu2_.backward(bn2_.backward(g)));
  conv1_.backward(relu1_.backward(bn1_.backward(g)));
}

std::vector<Parameter*> Encoder::params() {
  std::vector<Parameter*> out;
  for (auto* layer : {&conv1_, &conv2_, &conv3_, &conv4_})
    for (auto* p : layer->params()) out.push_back(p);
  for (auto* bn : {&bn1_, &bn2_, &bn3_, &bn4_})
    for (auto* p : bn->params()) out.push_back(p);
  for (auto* p : proj_.params()) out.push_back(p);
  return out;
}

std::vector<std::pair<std::string, Tensor*>> Encoder::buffers() {
  std::vector<std::pair<std::string, Tensor*>> out;
  int i = 1;
  for (auto* bn : {&bn1_, &bn2_, &bn3_, &bn4_}) {
    const std::string prefix = "bn" + std::to_string(i++);
    out.emplace_back(prefix + ".running_mean", &bn->running_mean);
    out.emplace_back(prefix + ".running_var", &bn->running_var);
  }
  return out;
}

Checkpoint Encoder::to_checkpoint() const {
  Checkpoint ck;
  ck.header["kind"] = "encoder";
  ck.header["arch"] = {{"n_mels", arch_.n_mels},
                       {"channels", arch_.channels},
                       {"bottleneck", arch_.bottleneck},
                       {"embed_dim", arch_.embed_dim}};
  auto& self = const_cast<Encoder&>(*this);
  for (auto* p : self.params()) ck.tensors.emplace_back(p->name, p->value);
  for (auto& [name, t] : self.buffers()) ck.tensors.emplace_back(name, *t);
  return ck;
}

Encoder Encoder::from_checkpoint(const Checkpoint& ck) {
  if (ck.header.at("kind") != "encoder")
    throw std::runtime_error("checkpoint is not an encoder");
  const auto& a = ck.header.at("arch");
  EncoderArch arch{a.at("n_mels"), a.at("channels"), a.at("bottleneck"),
                   a.at("embed_dim")};
  Encoder enc(arch, /*init_seed=*/0);
  for (auto* p : enc.params()) {
    const Tensor& t = ck.tensor(p->name);
    if (t.shape() != p->value.shape())
      throw std::runtime_error("checkpoint shape mismatch for " + p->name);
    p->value = t;
  }
  for (auto& [name, t] : enc.buffers()) *t = ck.tensor(name);
  return enc;
}

UtteranceEmbedding embed(const FeatureMatrix& f, Encoder& encoder,
                         const std::string& utterance_id) {
  if (f.frames == 0) throw std::invalid_argument("embed: empty features");
  if (f.mels != encoder.arch().n_mels)
    throw std::invalid_argument("embed: mel count mismatch");
  Tensor x({1, f.mels, f.frames});
  for (std::size_t t = 0; t < f.frames; ++t)
    for (std::size_t m = 0; m < f.mels; ++m)
      x[m * f.frames + t] = f.at(t, m);
  Tensor y = encoder.forward(x, /*train=*/false);
  UtteranceEmbedding e;
  e.utterance_id = utterance_id;
  e.values = Tensor({y.size()}, std::vector<float>(y.data(), y.data() + y.size()));
  e.values.check_finite("embedding");
  return e;
}

namespace {

Parameter make_head(std::size_t num_speakers, std::size_t d,
                    std::uint64_t seed) {
  Rng rng(seed);
  Parameter head("head", Tensor({num_speakers, d}));
  for (std::size_t j = 0; j < num_speakers; ++j) {
    double norm = 0.0;
    std::vector<double> row(d);
    for (std::size_t i = 0; i < d; ++i) {
      row[i] = normal(rng);
      norm += row[i] * row[i];
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < d; ++i)
      head.value.at(j, i) = float(row[i] / norm);
  }
  return head;
}

TrainedEncoder train_impl(Encoder encoder, Parameter head,
                          const std::vector<TrainUtterance>& data,
                          std::size_t num_speakers, const TrainConfig& cfg) {
  if (num_speakers < 2)
    throw std::invalid_argument("train_encoder: need >= 2 speakers");
  if (data.empty())
    throw std::invalid_argument("train_encoder: empty dataset");

  TrainedEncoder out{std::move(encoder), std::move(head), {}};
  if (cfg.epochs == 0) return out;

  Rng rng(split_seed(cfg.seed, 3));
  const std::size_t n = data.size();
  const std::size_t batches = (n + cfg.batch_size - 1) / cfg.batch_size;

  CyclicLrSchedule schedule;
  schedule.base_lr = cfg.base_lr;
  schedule.max_lr = cfg.max_lr;
  schedule.cycle_steps =
      cfg.cycle_steps > 0 ? cfg.cycle_steps
                          : std::max<std::int64_t>(2, 5 * std::int64_t(batches));

  AdamOptimizer adam(cfg.weight_decay);
  AamSoftmaxLoss loss_fn(cfg.aam);
  std::vector<Parameter*> params = out.encoder.params();
  params.push_back(&out.head);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::int64_t step = 0;

  const std::size_t mels = out.encoder.arch().n_mels;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_sum = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, n);
      const std::size_t bs = hi - lo;
      Tensor x({bs, mels, cfg.crop_frames});
      std::vector<std::size_t> labels(bs);
      for (std::size_t i = 0; i < bs; ++i) {
        const TrainUtterance& u = data[order[lo + i]];
        FeatureMatrix f =
            cfg.augment
                ? augment_features(u.wave, u.features, cfg.aug, cfg.mel, rng)
                : u.features;
        f = cmn(crop_or_pad(f, cfg.crop_frames, rng));
        float* xi = x.data() + i * mels * cfg.crop_frames;
        for (std::size_t t = 0; t < cfg.crop_frames; ++t)
          for (std::size_t m = 0; m < mels; ++m)
            xi[m * cfg.crop_frames + t] = f.at(t, m);
        labels[i] = u.speaker_index;
      }
      Tensor emb = out.encoder.forward(x, /*train=*/true);
      const double loss = loss_fn.forward(emb, out.head, labels);
      Tensor demb = loss_fn.backward(emb, out.head, labels);
      out.encoder.backward(demb);
      const double lr = lr_at(schedule, step);
      adam.step(params, lr);
      for (auto* p : params) p->zero_grad();
      out.log.step_loss.push_back(loss);
      out.log.step_lr.push_back(lr);
      epoch_sum += loss;
      ++step;
    }
    out.log.epoch_loss.push_back(epoch_sum / double(batches));
  }
  return out;
}

}  // namespace

TrainedEncoder train_encoder(const std::vector<TrainUtterance>& data,
                             std::size_t num_speakers, const TrainConfig& cfg) {
  EncoderArch arch;
  Encoder encoder(arch, split_seed(cfg.seed, 1));
  Parameter head = make_head(num_speakers, arch.embed_dim, split_seed(cfg.seed, 2));
  return train_impl(std::move(encoder), std::move(head), data, num_speakers,
                    cfg);
}

TrainedEncoder finetune(const Encoder& base,
                        const std::vector<TrainUtterance>& data,
                        std::size_t num_speakers, const TrainConfig& cfg) {
  Parameter head =
      make_head(num_speakers, base.arch().embed_dim, split_seed(cfg.seed, 2));
  return train_impl(base, std::move(head), data, num_speakers, cfg);
}

Encoder wse_merge(const Encoder& theta_a, const Encoder& theta_c,
                  double alpha) {
  if (!(theta_a.arch() == theta_c.arch()))
    throw std::invalid_argument("wse_merge: architecture mismatch");
  Encoder merged = theta_a;
  auto& a = const_cast<Encoder&>(theta_a);
  auto& c = const_cast<Encoder&>(theta_c);
  auto pm = merged.params();
  auto pa = a.params();
  auto pc = c.params();
  for (std::size_t i = 0; i < pm.size(); ++i)
    for (std::size_t j = 0; j < pm[i]->value.size(); ++j)
      pm[i]->value[j] = float(alpha * double(pa[i]->value[j]) +
                              (1.0 - alpha) * double(pc[i]->value[j]));
  auto bm = merged.buffers();
  auto ba = a.buffers();
  auto bc = c.buffers();
  for (std::size_t i = 0; i < bm.size(); ++i)
    for (std::size_t j = 0; j < bm[i].second->size(); ++j)
      (*bm[i].second)[j] = float(alpha * double((*ba[i].second)[j]) +
                                 (1.0 - alpha) * double((*bc[i].second)[j]));
  return merged;
}

}  // namespace aasv

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

#include "aasv/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "aasv/losses.hpp"
#include "aasv/optim.hpp"

namespace aasv {

DomainClassifier::DomainClassifier(std::size_t embed_dim, std::size_t hidden,
                                   std::uint64_t init_seed)
    : embed_dim_(embed_dim),
      hidden_(hidden),
      init_rng_(init_seed),
      fc1_(embed_dim, hidden, init_rng_, "dc.fc1"),
      fc2_(hidden, 2, init_rng_, "dc.fc2") {
  if (embed_dim == 0 || hidden == 0)
    throw std::invalid_argument("DomainClassifier: zero-sized layer");
}

Tensor DomainClassifier::forward(const Tensor& x, bool train) {
  if (x.shape().size() != 2 || x.shape()[1] != embed_dim_)
    throw std::invalid_argument("DomainClassifier: bad input shape");
  return fc2_.forward(relu_.forward(fc1_.forward(x, train), train), train);
}

Tensor DomainClassifier::backward(const Tensor& dlogits) {
  return fc1_.backward(relu_.backward(fc2_.backward(dlogits)));
}

std::vector<Parameter*> DomainClassifier::params() {
  return {&fc1_.w, &fc1_.b, &fc2_.w, &fc2_.b};
}

DomainPosterior DomainClassifier::classify(const Tensor& embedding) {
  Tensor x = embedding;
  if (x.shape().size() == 1) x.reshape({1, x.size()});
  if (x.shape().size() != 2 || x.shape()[0] != 1 || x.shape()[1] != embed_dim_)
    throw std::invalid_argument("classify: expected one embedding of dim " +
                                std::to_string(embed_dim_));
  Tensor logits = forward(x, false);
  double mx = std::max(logits.data()[0], logits.data()[1]);
  double ec = std::exp(double(logits.data()[0]) - mx);
  double ea = std::exp(double(logits.data()[1]) - mx);
  DomainPosterior p;
  p.p_child = ec / (ec + ea);
  p.p_adult = ea / (ec + ea);
  return p;
}

Checkpoint DomainClassifier::to_checkpoint() const {
  Checkpoint ck;
  ck.header["kind"] = "domain_classifier";
  ck.header["embed_dim"] = embed_dim_;
  ck.header["hidden"] = hidden_;
  auto* self = const_cast<DomainClassifier*>(this);
  for (auto* p : self->params()) ck.tensors.emplace_back(p->name, p->value);
  return ck;
}

DomainClassifier DomainClassifier::from_checkpoint(const Checkpoint& ck) {
  if (ck.header.value("kind", "") != "domain_classifier")
    throw std::runtime_error("checkpoint is not a domain classifier");
  DomainClassifier dc(ck.header.at("embed_dim").get<std::size_t>(),
                      ck.header.at("hidden").get<std::size_t>(), 0);
  for (auto* p : dc.params()) p->value = ck.tensor(p->name);
  return dc;
}

double f1_score(const std::vector<int>& predictions,
                const std::vector<int>& labels, int positive_class) {
  if (predictions.size() != labels.size())
    throw std::invalid_argument("f1_score: size mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool pred_pos = predictions[i] == positive_class;
    bool true_pos = labels[i] == positive_class;
    if (pred_pos && true_pos) ++tp;
    else if (pred_pos) ++fp;
    else if (true_pos) ++fn;
  }
  if (tp == 0) return 0.0;
  double precision = double(tp) / double(tp + fp);
  double recall = double(tp) / double(tp + fn);
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

// Stratified shuffle split: the first holdout_fraction of each class goes
// to the holdout set.
void split_holdout(const std::vector<LabeledEmbedding>& data, double fraction,
                   Rng& rng, std::vector<const LabeledEmbedding*>& train,
                   std::vector<const LabeledEmbedding*>& holdout) {
  for (int cls : {0, 1}) {
    std::vector<const LabeledEmbedding*> pool;
    for (const auto& e : data)
      if (e.label == cls) pool.push_back(&e);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t n_hold = std::size_t(std::floor(fraction * double(pool.size())));
    if (n_hold == pool.size() && n_hold > 0) --n_hold;
    for (std::size_t i = 0; i < pool.size(); ++i)
      (i < n_hold ? holdout : train).push_back(pool[i]);
  }
}

double run_epoch(DomainClassifier& dc, AdamOptimizer& opt,
                 const CyclicLrSchedule& sched, std::int64_t& step,
                 std::vector<const LabeledEmbedding*>& items,
                 std::size_t batch_size, Rng& rng) {
  std::shuffle(items.begin(), items.end(), rng);
  std::size_t d = dc.embed_dim();
  double total = 0.0;
  auto params = dc.params();
  for (std::size_t begin = 0; begin < items.size(); begin += batch_size) {
    std::size_t n = std::min(batch_size, items.size() - begin);
    Tensor x({n, d});
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(items[begin + i]->values.data(), d, x.data() + i * d);
    Tensor logits = dc.forward(x, true);
    Tensor dlogits({n, 2});
    for (std::size_t i = 0; i < n; ++i) {
      Tensor row({2});
      row.data()[0] = logits.at(i, 0);
      row.data()[1] = logits.at(i, 1);
      auto [loss, g] =
          softmax_cross_entropy(row, std::size_t(items[begin + i]->label));
      total += loss;
      dlogits.at(i, 0) = float(g.data()[0] / double(n));
      dlogits.at(i, 1) = float(g.data()[1] / double(n));
    }
    dc.backward(dlogits);
    opt.step(params, lr_at(sched, step++));
    for (auto* p : params) p->zero_grad();
  }
  return items.empty() ? 0.0 : total / double(items.size());
}

int predict(DomainClassifier& dc, const LabeledEmbedding& e) {
  Tensor x = e.values;
  x.reshape({1, x.size()});
  return dc.classify(x).p_child >= 0.5 ? 0 : 1;
}

}  // namespace

DomainTrainResult train_domain_classifier(
    const std::vector<LabeledEmbedding>& data, const DomainTrainConfig& cfg) {
  if (data.empty())
    throw std::invalid_argument("train_domain_classifier: no data");
  std::size_t d = data.front().values.size();
  bool has[2] = {false, false};
  for (const auto& e : data) {
    if (e.label != 0 && e.label != 1)
      throw std::invalid_argument("train_domain_classifier: label not in {0,1}");
    if (e.values.size() != d)
      throw std::invalid_argument("train_domain_classifier: mixed dims");
    has[e.label] = true;
  }
  if (!has[0] || !has[1])
    throw std::invalid_argument(
        "train_domain_classifier: need both child and adult examples");

  Rng rng(split_seed(cfg.seed, 11));
  std::vector<const LabeledEmbedding*> train, holdout;
  split_holdout(data, cfg.holdout_fraction, rng, train, holdout);

  DomainTrainResult res{
      DomainClassifier(d, cfg.hidden, split_seed(cfg.seed, 12)), 0.0, 0.0, {}};
  AdamOptimizer opt(cfg.weight_decay);
  std::size_t batches_per_epoch =
      (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  CyclicLrSchedule sched{cfg.base_lr, cfg.max_lr,
                         std::max<std::int64_t>(
                             1, std::int64_t(5 * batches_per_epoch))};
  std::int64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch)
    res.epoch_loss.push_back(run_epoch(res.classifier, opt, sched, step,
                                       train, cfg.batch_size, rng));

  const auto& eval_set = holdout.empty() ? train : holdout;
  std::vector<int> preds, labels;
  for (const auto* e : eval_set) {
    preds.push_back(predict(res.classifier, *e));
    labels.push_back(e->label);
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == labels[i]) ++correct;
  res.holdout_accuracy = preds.empty() ? 0.0 : double(correct) / preds.size();
  res.holdout_f1 = f1_score(preds, labels, 0);
  return res;
}

std::vector<RatioRow> ratio_harness(
    const std::vector<std::pair<std::size_t, std::size_t>>& ratios,
    const std::vector<LabeledEmbedding>& train_child,
    const std::vector<LabeledEmbedding>& train_adult,
    const std::vector<LabeledEmbedding>& test_child,
    const std::vector<LabeledEmbedding>& test_adult,
    const DomainTrainConfig& cfg) {
  std::vector<RatioRow> rows;
  // The child count is held fixed across rows; it is capped so that the
  // steepest ratio still fits inside the adult pool.
  std::size_t n_child = train_child.size();
  for (auto [adult_mult, child_mult] : ratios) {
    if (child_mult == 0 || adult_mult == 0)
      throw std::invalid_argument("ratio_harness: zero ratio term");
    n_child = std::min(n_child, train_adult.size() * child_mult / adult_mult);
  }
  if (n_child == 0)
    throw std::invalid_argument("ratio_harness: pools too small for ratios");
  for (auto [adult_mult, child_mult] : ratios) {
    std::size_t n_adult = n_child * adult_mult / child_mult;
    Rng rng(split_seed(cfg.seed, 21 + adult_mult * 8 + child_mult));
    std::vector<std::size_t> adult_idx(train_adult.size());
    std::iota(adult_idx.begin(), adult_idx.end(), 0);
    std::shuffle(adult_idx.begin(), adult_idx.end(), rng);

    std::vector<LabeledEmbedding> subset;
    for (std::size_t i = 0; i < n_child; ++i) subset.push_back(train_child[i]);
    for (std::size_t i = 0; i < n_adult; ++i)
      subset.push_back(train_adult[adult_idx[i]]);

    auto trained = train_domain_classifier(subset, cfg);
    RatioRow row;
    row.ratio = std::to_string(adult_mult) + ":" + std::to_string(child_mult);
    row.adult_utts = n_adult;
    row.child_utts = n_child;
    std::size_t ok = 0;
    for (const auto& e : test_adult)
      if (predict(trained.classifier, e) == 1) ++ok;
    row.adult_acc = test_adult.empty() ? 0.0 : double(ok) / test_adult.size();
    ok = 0;
    for (const auto& e : test_child)
      if (predict(trained.classifier, e) == 0) ++ok;
    row.child_acc = test_child.empty() ? 0.0 : double(ok) / test_child.size();
    rows.push_back(row);
  }
  return rows;
}

void write_ratio_table(const std::filesystem::path& path,
                       const std::vector<RatioRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ratio\tadult_utts\tchild_utts\tadult_acc\tchild_acc\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.4f\t%.4f", r.adult_acc, r.child_acc);
    out << r.ratio << '\t' << r.adult_utts << '\t' << r.child_utts << '\t'
        << buf << '\n';
  }
}

}  // namespace aasv

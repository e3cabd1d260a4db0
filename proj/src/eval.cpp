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

#include "aasv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace aasv {

double cosine(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += double(a[i]) * b[i];
    na += double(a[i]) * a[i];
    nb += double(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw std::invalid_argument("cosine: zero-norm vector");
  return dot / std::sqrt(na * nb);
}

std::vector<ScoredTrial> score_trials(
    const TrialList& trials, const std::map<std::string, Tensor>& embeddings) {
  if (trials.trials.empty())
    throw std::invalid_argument("score_trials: empty trial list");
  std::vector<ScoredTrial> out;
  out.reserve(trials.trials.size());
  for (const auto& t : trials.trials) {
    auto e = embeddings.find(t.enroll_id);
    auto s = embeddings.find(t.test_id);
    if (e == embeddings.end() || s == embeddings.end())
      throw std::runtime_error("score_trials: no embedding for " +
                               (e == embeddings.end() ? t.enroll_id
                                                      : t.test_id));
    out.push_back({t.label == 1, cosine(e->second, s->second)});
  }
  return out;
}

namespace {

// FRR(t) = P(target score < t), FAR(t) = P(nontarget score >= t),
// evaluated exactly over the given trials.
struct RateCurve {
  std::vector<double> targets, nontargets;  // sorted ascending

  explicit RateCurve(const std::vector<ScoredTrial>& trials) {
    for (const auto& t : trials)
      (t.target ? targets : nontargets).push_back(t.score);
    if (targets.empty() || nontargets.empty())
      throw std::invalid_argument(
          "eer: need at least one target and one non-target trial");
    std::sort(targets.begin(), targets.end());
    std::sort(nontargets.begin(), nontargets.end());
  }

  double frr(double t) const {
    auto it = std::lower_bound(targets.begin(), targets.end(), t);
    return double(it - targets.begin()) / double(targets.size());
  }
  double far(double t) const {
    auto it = std::lower_bound(nontargets.begin(), nontargets.end(), t);
    return double(nontargets.end() - it) / double(nontargets.size());
  }
};

// FAR - FRR is non-increasing in t; interpolate the sign change between
// adjacent candidate thresholds.
EerResult interpolate(const RateCurve& curve,
                      const std::vector<double>& thresholds) {
  double prev_t = thresholds.front();
  double prev_diff = curve.far(prev_t) - curve.frr(prev_t);
  double prev_frr = curve.frr(prev_t);
  double prev_far = curve.far(prev_t);
  for (double t : thresholds) {
    double fr = curve.frr(t), fa = curve.far(t);
    double diff = fa - fr;
    if (diff <= 0.0) {
      if (diff == 0.0 || prev_diff == diff)
        return {0.5 * (fa + fr), t};
      // Linear interpolation in the (FRR, FAR) plane between the two
      // bracketing operating points.
      double alpha = prev_diff / (prev_diff - diff);
      double eer_frr = prev_frr + alpha * (fr - prev_frr);
      double eer_far = prev_far + alpha * (fa - prev_far);
      return {0.5 * (eer_frr + eer_far), prev_t + alpha * (t - prev_t)};
    }
    prev_t = t;
    prev_diff = diff;
    prev_frr = fr;
    prev_far = fa;
  }
  // FAR stayed above FRR for every threshold; the operating point past the
  // top score has FAR = 0.
  double top = thresholds.back();
  double t = std::nextafter(top, std::numeric_limits<double>::infinity());
  double fr = curve.frr(t), fa = curve.far(t);
  double alpha = prev_diff / (prev_diff - (fa - fr));
  return {0.5 * ((prev_frr + alpha * (fr - prev_frr)) +
                 (prev_far + alpha * (fa - prev_far))),
          prev_t + alpha * (t - prev_t)};
}

std::vector<double> midpoint_thresholds(const RateCurve& curve) {
  std::vector<double> scores;
  scores.reserve(curve.targets.size() + curve.nontargets.size());
  scores.insert(scores.end(), curve.targets.begin(), curve.targets.end());
  scores.insert(scores.end(), curve.nontargets.begin(),
                curve.nontargets.end());
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> ts;
  ts.push_back(scores.front() - 1.0);  // accept everything
  for (std::size_t i = 0; i + 1 < scores.size(); ++i)
    ts.push_back(0.5 * (scores[i] + scores[i + 1]));
  ts.push_back(scores.back() + 1.0);  // reject everything
  return ts;
}

}  // namespace

EerResult eer(const std::vector<ScoredTrial>& trials) {
  RateCurve curve(trials);
  return interpolate(curve, midpoint_thresholds(curve));
}

EerResult eer_bruteforce(const std::vector<ScoredTrial>& trials) {
  RateCurve curve(trials);
  // Every distinct score, plus points just past both ends, in fine steps:
  // denser than the midpoint sweep but covering the same crossings.
  std::vector<double> scores;
  scores.insert(scores.end(), curve.targets.begin(), curve.targets.end());
  scores.insert(scores.end(), curve.nontargets.begin(),
                curve.nontargets.end());
  std::sort(scores.begin(), scores.end());
  scores.erase(std::unique(scores.begin(), scores.end()), scores.end());
  std::vector<double> ts;
  ts.push_back(scores.front() - 1.0);
  for (std::size_t i = 0; i + 1 < scores.size(); ++i)
    for (int k = 1; k <= 4; ++k)
      ts.push_back(scores[i] + (scores[i + 1] - scores[i]) * k / 5.0);
  ts.push_back(scores.back() + 1.0);
  return interpolate(curve, ts);
}

void write_report_tsv(const std::filesystem::path& path, const Report& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "system";
  for (const auto& c : rep.conditions) out << '\t' << c;
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < rep.systems.size(); ++r) {
    out << rep.systems[r];
    for (std::size_t c = 0; c < rep.conditions.size(); ++c) {
      const auto& cell = rep.cells.at(r).at(c);
      if (cell.present) {
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * cell.eer);
        out << '\t' << buf;
      } else {
        out << "\t-";
      }
    }
    out << '\n';
  }
}

std::string format_report(const Report& rep) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head = {"system"};
  head.insert(head.end(), rep.conditions.begin(), rep.conditions.end());
  grid.push_back(head);
  char buf[32];
  for (std::size_t r = 0; r < rep.systems.size(); ++r) {
    std::vector<std::string> row = {rep.systems[r]};
    for (std::size_t c = 0; c < rep.conditions.size(); ++c) {
      const auto& cell = rep.cells.at(r).at(c);
      if (cell.present) {
        std::snprintf(buf, sizeof buf, "%.2f", 100.0 * cell.eer);
        row.push_back(buf);
      } else {
        row.push_back("-");
      }
    }
    grid.push_back(row);
  }
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& row : grid)
    for (std::size_t c = 0; c < row.size(); ++c)
      width[c] = std::max(width[c], row[c].size());
  std::ostringstream os;
  for (const auto& row : grid) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << "  ";
      os << row[c];
      if (c + 1 < row.size())
        os << std::string(width[c] - row[c].size(), ' ');
    }
    os << '\n';
  }
  return os.str();
}

void write_trials(const std::filesystem::path& path, const TrialList& trials) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& t : trials.trials)
    out << t.label << ' ' << t.enroll_id << ' ' << t.test_id << '\n';
}

TrialList read_trials(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  TrialList list;
  std::string label, enroll, test;
  while (in >> label >> enroll >> test) {
    if (label != "0" && label != "1")
      throw std::runtime_error("bad trial label '" + label + "' in " +
                               path.string());
    bool pos = label == "1";
    list.trials.push_back({pos ? 1 : 0, enroll, test});
    (pos ? list.n_positive : list.n_negative)++;
  }
  return list;
}

void write_scores(const std::filesystem::path& path,
                  const std::vector<ScoredTrial>& scored) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char buf[32];
  for (const auto& s : scored) {
    std::snprintf(buf, sizeof buf, "%.9f", s.score);
    out << (s.target ? 1 : 0) << ' ' << buf << '\n';
  }
}

std::vector<ScoredTrial> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<ScoredTrial> out;
  int label;
  double score;
  while (in >> label >> score) out.push_back({label == 1, score});
  return out;
}

}  // namespace aasv

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

#ifndef AASV_EVAL_HPP
#define AASV_EVAL_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aasv/corpus.hpp"
#include "aasv/tensor.hpp"

namespace aasv {

double cosine(const Tensor& a, const Tensor& b);

/// One scored verification trial.
struct ScoredTrial {
  bool target = false;
  double score = 0.0;
};

// Cosine score per trial against an id-keyed embedding table. Errors on
// an empty trial list or a missing utterance id.
std::vector<ScoredTrial> score_trials(
    const TrialList& trials, const std::map<std::string, Tensor>& embeddings);

struct EerResult {
  double eer = 0.0;        // in [0, 1]
  double threshold = 0.0;  // accept when score >= threshold
};

// Equal error rate by sweeping candidate thresholds at score midpoints:
// FRR(t) = fraction of targets with score < t, FAR(t) = fraction of
// non-targets with score >= t. The EER is linearly interpolated where
// FAR - FRR changes sign. Needs at least one target and one non-target.
EerResult eer(const std::vector<ScoredTrial>& trials);

// Independent slow path for testing: scans every threshold exhaustively
// and interpolates the same crossing.
EerResult eer_bruteforce(const std::vector<ScoredTrial>& trials);

/// One report cell; absent systems or conditions render as "-".
struct ReportCell {
  bool present = false;
  double eer = 0.0;
};

/// EER grid: rows are systems, columns are evaluation conditions.
struct Report {
  std::vector<std::string> systems;
  std::vector<std::string> conditions;
  std::vector<std::vector<ReportCell>> cells;  // [system][condition]
};

// TSV with EER as percent, 2 decimals, "-" for absent cells.
void write_report_tsv(const std::filesystem::path& path, const Report& rep);
// Space-aligned text table of the same grid.
std::string format_report(const Report& rep);

// Plain text exchange formats. Trials: "label enroll_id test_id" with
// label in {target, nontarget}. Scores: "label score".
void write_trials(const std::filesystem::path& path, const TrialList& trials);
TrialList read_trials(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path,
                  const std::vector<ScoredTrial>& scored);
std::vector<ScoredTrial> read_scores(const std::filesystem::path& path);

}  // namespace aasv

#endif  // AASV_EVAL_HPP

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

#ifndef AASV_CORPUS_HPP
#define AASV_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aasv/features.hpp"
#include "aasv/rng.hpp"

namespace aasv {

enum class Domain { Adult, Child };

std::string domain_name(Domain d);
Domain domain_from_name(const std::string& s);

/// Source-filter voice parameters for one synthetic speaker. Children are
/// adults shifted up in pitch and resonance frequency, scaled by severity
/// (1 = youngest, largest shift).
struct SpeakerProfile {
  std::string speaker_id;
  Domain domain = Domain::Adult;
  double severity = 0.0;  // child only; 0 for adults
  double f0_hz = 0.0;
  double peak_hz[3] = {0, 0, 0};
  double bandwidth_hz[3] = {0, 0, 0};
  // Prosodic traits: stable per speaker, lightly jittered per utterance.
  double syllable_rate_hz = 3.0;
  double vibrato_rate_hz = 5.5;
  // High-band resonance only young voices have; its gain scales with
  // severity in synthesis. 0 disables it (adults).
  double hi_peak_hz = 0.0;
};

struct UtteranceSpec {
  std::string utterance_id;
  std::string speaker_id;
  double duration_s = 3.0;
  double noise_floor_db = -40.0;
  std::uint64_t rng_seed = 0;
};

enum class Split { Train, DcTrain, Test };

struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  Domain domain = Domain::Adult;
  double severity = 0.0;
  std::uint64_t seed = 0;
  std::vector<Split> splits;  // an utterance may belong to several tags
  std::string wav_path;       // empty in virtual (regenerate-from-seed) mode

  bool in_split(Split s) const {
    for (Split t : splits)
      if (t == s) return true;
    return false;
  }
};

struct Manifest {
  std::vector<SpeakerProfile> speakers;
  std::vector<ManifestEntry> entries;

  const SpeakerProfile& speaker(const std::string& id) const;
};

struct Trial {
  int label = 0;  // 1 = target (same speaker), 0 = nontarget
  std::string enroll_id;
  std::string test_id;
};

struct TrialList {
  std::vector<Trial> trials;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
};

struct CorpusConfig {
  std::size_t adult_speakers = 40;
  std::size_t child_speakers = 40;
  std::size_t utterances_per_speaker = 15;
  double duration_s = 3.0;
  double severity_min = 0.2;
  double severity_max = 1.0;
  double test_fraction = 0.25;       // of speakers, per domain
  double dc_train_severity = 0.55;   // min severity for dc-train children
  std::uint64_t seed = 1234;
};

// Samples a speaker's voice parameters. Adults draw f0 from [90, 180] Hz;
// children scale f0 by (1 + 0.8 * severity) and resonances by
// (1 + 0.35 * severity). Per-speaker +-5% jitter keeps speakers separable.
SpeakerProfile gen_speaker(Domain domain, double severity, Rng& rng);

// Harmonic source at f0 (+-3% vibrato) through three resonant filters plus
// a noise floor; deterministic given spec.rng_seed; peak-normalized to 0.9.
Waveform synth_utterance(const SpeakerProfile& profile,
                         const UtteranceSpec& spec);

// Speaker-disjoint train/test split per domain; dc-train holds adults plus
// only children at severity >= the configured threshold.
Manifest build_splits(const std::vector<SpeakerProfile>& speakers,
                      const CorpusConfig& cfg);

// Full corpus: speakers + manifest from one master seed.
Manifest build_corpus(const CorpusConfig& cfg);

// Exactly n_pos same-speaker and n_neg cross-speaker same-domain pairs,
// unordered pairs never duplicated. Throws if infeasible.
TrialList build_trials(const Manifest& manifest, Split split,
                       std::optional<Domain> domain,
                       std::size_t n_pos, std::size_t n_neg, Rng& rng,
                       double severity_lo = 0.0, double severity_hi = 1.0);

// Regenerate a waveform for a manifest entry (virtual mode) or read its
// WAV file when materialized.
Waveform utterance_waveform(const Manifest& manifest,
                            const ManifestEntry& entry, double duration_s);

// JSON-lines manifest, one record per utterance; speakers serialized in a
// leading record block.
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace aasv

#endif  // AASV_CORPUS_HPP

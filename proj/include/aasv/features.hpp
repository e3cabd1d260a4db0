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

#ifndef AASV_FEATURES_HPP
#define AASV_FEATURES_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "aasv/rng.hpp"
#include "aasv/tensor.hpp"

namespace aasv {

struct Waveform {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = 16000;

  double duration_s() const {
    return double(samples.size()) / double(sample_rate);
  }
};

/// frames x mels matrix of log filter-bank energies.
struct FeatureMatrix {
  std::size_t frames = 0;
  std::size_t mels = 0;
  std::vector<float> values;  // row-major [frames x mels]

  float& at(std::size_t f, std::size_t m) { return values[f * mels + m]; }
  float at(std::size_t f, std::size_t m) const { return values[f * mels + m]; }
};

struct LogMelConfig {
  std::size_t n_mels = 80;
  std::size_t window_samples = 400;  // 25 ms at 16 kHz
  std::size_t hop_samples = 160;     // 10 ms at 16 kHz
  std::size_t fft_size = 512;
  double f_min = 20.0;
  double f_max = 8000.0;
  double log_floor = 1e-10;
};

struct AugmentConfig {
  double snr_db_min = 5.0;
  double snr_db_max = 20.0;
  double rir_decay_ms = 100.0;
  std::size_t freq_mask_max = 10;  // mel bins
  std::size_t time_mask_max = 20;  // frames
};

enum class AugmentKind { AdditiveNoise, Reverb, FreqMask, TimeMask };

// Hamming-windowed power spectrum -> triangular mel filters -> natural log.
// frames = 1 + floor((N - window) / hop). Throws on short input or if the
// sample rate differs from 16 kHz.
FeatureMatrix logmel(const Waveform& w, const LogMelConfig& cfg = {});

// Per-mel-bin mean subtraction over frames.
FeatureMatrix cmn(const FeatureMatrix& f);

// Random contiguous crop if longer than target; wrap-around repeat then
// crop if shorter.
FeatureMatrix crop_or_pad(const FeatureMatrix& f, std::size_t target_frames,
                          Rng& rng);

// Individual augmentations.
Waveform add_noise(const Waveform& w, double snr_db, Rng& rng);
Waveform reverb(const Waveform& w, double decay_ms, Rng& rng);
FeatureMatrix freq_mask(const FeatureMatrix& f, std::size_t max_bins, Rng& rng);
FeatureMatrix time_mask(const FeatureMatrix& f, std::size_t max_frames,
                        Rng& rng);

// Picks one of the four augmentations uniformly at random and applies the
// whole waveform -> features chain: (noise|reverb) -> logmel -> (mask|-).
// Waveform-domain augmentations recompute logmel; feature-domain ones mask
// the precomputed clean features.
FeatureMatrix augment_features(const Waveform& w,
                               const FeatureMatrix& clean_features,
                               const AugmentConfig& cfg,
                               const LogMelConfig& mel_cfg, Rng& rng);

// WAV files: mono PCM16 or float32, 16 kHz only (resampling out of scope).
Waveform read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const Waveform& w);

// Feature cache: magic "AASVFEAT", u32 version, u32 frames, u32 mels,
// little-endian f32 values row-major.
void write_feature_cache(const std::filesystem::path& path,
                         const FeatureMatrix& f);
FeatureMatrix read_feature_cache(const std::filesystem::path& path);

}  // namespace aasv

#endif  // AASV_FEATURES_HPP

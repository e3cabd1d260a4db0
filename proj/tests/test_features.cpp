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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "doctest.h"

#include "aasv/features.hpp"

using namespace aasv;

namespace {

Waveform sine(double freq_hz, double duration_s, double amp = 0.5) {
  Waveform w;
  w.samples.resize(std::size_t(duration_s * 16000));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = float(amp * std::sin(2.0 * M_PI * freq_hz * i / 16000.0));
  return w;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

// Independent mel-bin arithmetic: which of n_mels triangular filters
// spanning [f_min, f_max] has its center nearest the given frequency.
std::size_t expected_mel_bin(double freq_hz, const LogMelConfig& cfg) {
  double lo = hz_to_mel(cfg.f_min), hi = hz_to_mel(cfg.f_max);
  double target = hz_to_mel(freq_hz);
  std::size_t best = 0;
  double best_d = 1e18;
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    double center = lo + (hi - lo) * double(m + 1) / double(cfg.n_mels + 1);
    if (std::abs(center - target) < best_d) {
      best_d = std::abs(center - target);
      best = m;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("logmel frame count: 2 s at 16 kHz gives 198 x 80") {
  auto f = logmel(sine(440.0, 2.0));
  CHECK(f.frames == 198);  // 1 + (32000 - 400) / 160
  CHECK(f.mels == 80);
}

TEST_CASE("logmel of silence is log(floor) everywhere") {
  Waveform w;
  w.samples.assign(16000, 0.0f);
  LogMelConfig cfg;
  auto f = logmel(w, cfg);
  for (float v : f.values) CHECK(v == doctest::Approx(std::log(cfg.log_floor)));
}

TEST_CASE("logmel of a 1 kHz sine peaks at the right mel bin") {
  LogMelConfig cfg;
  auto f = logmel(sine(1000.0, 2.0), cfg);
  std::size_t expect = expected_mel_bin(1000.0, cfg);
  for (std::size_t t = 0; t < f.frames; ++t) {
    std::size_t argmax = 0;
    for (std::size_t m = 1; m < f.mels; ++m)
      if (f.at(t, m) > f.at(t, argmax)) argmax = m;
    CHECK(std::abs(int(argmax) - int(expect)) <= 1);
  }
}

TEST_CASE("logmel rejects short input and wrong sample rate") {
  Waveform w;
  w.samples.assign(100, 0.1f);
  CHECK_THROWS(logmel(w));
  Waveform w2 = sine(440.0, 1.0);
  w2.sample_rate = 8000;
  CHECK_THROWS(logmel(w2));
}

TEST_CASE("logmel is deterministic") {
  Waveform w = sine(523.0, 1.5);
  auto a = logmel(w), b = logmel(w);
  CHECK(a.values == b.values);
}

TEST_CASE("cmn examples and zero-mean property") {
  FeatureMatrix f;
  f.frames = 2;
  f.mels = 1;
  f.values = {1.0f, 3.0f};
  auto g = cmn(f);
  CHECK(g.values[0] == doctest::Approx(-1.0));
  CHECK(g.values[1] == doctest::Approx(1.0));

  FeatureMatrix c;
  c.frames = 5;
  c.mels = 3;
  c.values.assign(15, 2.5f);
  for (float v : cmn(c).values) CHECK(v == doctest::Approx(0.0));

  auto h = cmn(g);  // already zero-mean: unchanged
  CHECK(h.values[0] == doctest::Approx(g.values[0]));

  auto real = logmel(sine(700.0, 1.0));
  auto n = cmn(real);
  for (std::size_t m = 0; m < n.mels; ++m) {
    double mean = 0.0;
    for (std::size_t t = 0; t < n.frames; ++t) mean += n.at(t, m);
    CHECK(std::abs(mean / n.frames) < 1e-5);
  }
}

TEST_CASE("crop_or_pad length contract and content oracles") {
  Rng rng(7);
  auto f = logmel(sine(300.0, 2.0));  // 198 frames

  SUBCASE("identity when already the target length") {
    auto g = crop_or_pad(f, f.frames, rng);
    CHECK(g.values == f.values);
  }

  SUBCASE("short input wraps around") {
    FeatureMatrix s;
    s.frames = 100;
    s.mels = 2;
    for (std::size_t t = 0; t < 100; ++t) {
      s.values.push_back(float(t));
      s.values.push_back(float(t) + 0.5f);
    }
    auto g = crop_or_pad(s, 198, rng);
    CHECK(g.frames == 198);
    for (std::size_t t = 0; t < 198; ++t)
      CHECK(g.at(t, 0) == doctest::Approx(float(t % 100)));
  }

  SUBCASE("long input yields a contiguous slice") {
    FeatureMatrix s;
    s.frames = 300;
    s.mels = 1;
    for (std::size_t t = 0; t < 300; ++t) s.values.push_back(float(t));
    for (int rep = 0; rep < 20; ++rep) {
      auto g = crop_or_pad(s, 198, rng);
      CHECK(g.frames == 198);
      float start = g.values.front();
      CHECK(start >= 0.0f);
      CHECK(start <= 102.0f);  // 300 - 198
      for (std::size_t t = 0; t < 198; ++t)
        CHECK(g.values[t] == doctest::Approx(start + float(t)));
    }
  }
}

TEST_CASE("masks are single contiguous blocks within configured maxima") {
  Rng rng(11);
  auto f = logmel(sine(600.0, 2.0));
  for (int rep = 0; rep < 30; ++rep) {
    auto g = freq_mask(f, 10, rng);
    std::set<std::size_t> masked;
    for (std::size_t m = 0; m < g.mels; ++m) {
      bool all_zero = true;
      for (std::size_t t = 0; t < g.frames; ++t)
        if (g.at(t, m) != 0.0f) all_zero = false;
      if (all_zero) masked.insert(m);
    }
    CHECK(masked.size() >= 1);
    CHECK(masked.size() <= 10);
    CHECK(*masked.rbegin() - *masked.begin() + 1 == masked.size());
  }
  for (int rep = 0; rep < 30; ++rep) {
    auto g = time_mask(f, 20, rng);
    std::set<std::size_t> masked;
    for (std::size_t t = 0; t < g.frames; ++t) {
      bool all_zero = true;
      for (std::size_t m = 0; m < g.mels; ++m)
        if (g.at(t, m) != 0.0f) all_zero = false;
      if (all_zero) masked.insert(t);
    }
    CHECK(masked.size() >= 1);
    CHECK(masked.size() <= 20);
    CHECK(*masked.rbegin() - *masked.begin() + 1 == masked.size());
  }
}

TEST_CASE("additive noise at 0 dB SNR matches signal power within 5%") {
  Waveform w = sine(440.0, 2.0);
  Rng rng(3);
  Waveform noisy = add_noise(w, 0.0, rng);
  double sig = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    sig += double(w.samples[i]) * w.samples[i];
    double d = double(noisy.samples[i]) - w.samples[i];
    noise += d * d;
  }
  CHECK(noise / sig == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("very high SNR noise leaves the waveform almost unchanged") {
  Waveform w = sine(440.0, 1.0);
  Rng rng(5);
  Waveform noisy = add_noise(w, 120.0, rng);
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(noisy.samples[i] - w.samples[i]) < 1e-4f);
}

TEST_CASE("reverb preserves length and stays in range") {
  Waveform w = sine(250.0, 1.0, 0.8);
  Rng rng(9);
  Waveform r = reverb(w, 100.0, rng);
  CHECK(r.samples.size() == w.samples.size());
  for (float v : r.samples) CHECK(std::abs(v) <= 1.0f);
}

TEST_CASE("augment_features output always matches clean feature shape") {
  Waveform w = sine(330.0, 2.0);
  auto clean = logmel(w);
  AugmentConfig cfg;
  Rng rng(42);
  for (int rep = 0; rep < 16; ++rep) {
    auto g = augment_features(w, clean, cfg, {}, rng);
    CHECK(g.frames == clean.frames);
    CHECK(g.mels == clean.mels);
    for (float v : g.values) CHECK(std::isfinite(v));
  }
}

TEST_CASE("wav round trip and feature cache round trip") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "aasv_feat_test";
  fs::create_directories(dir);

  Waveform w = sine(440.0, 0.5, 0.7);
  write_wav(dir / "t.wav", w);
  Waveform r = read_wav(dir / "t.wav");
  CHECK(r.sample_rate == 16000);
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    CHECK(std::abs(r.samples[i] - w.samples[i]) < 2.0f / 32768.0f);

  auto f = logmel(w);
  write_feature_cache(dir / "t.feat", f);
  auto g = read_feature_cache(dir / "t.feat");
  CHECK(g.frames == f.frames);
  CHECK(g.mels == f.mels);
  CHECK(g.values == f.values);
  fs::remove_all(dir);
}

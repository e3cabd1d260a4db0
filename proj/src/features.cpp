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

#include "aasv/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace aasv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// In-place iterative radix-2 FFT.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / double(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// Triangular mel filterbank over FFT bins [0, fft/2].
std::vector<std::vector<std::pair<std::size_t, double>>> mel_filters(
    const LogMelConfig& cfg, int sample_rate) {
  const std::size_t n_bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.f_min);
  const double mel_hi = hz_to_mel(cfg.f_max);
  std::vector<double> centers(cfg.n_mels + 2);
  for (std::size_t i = 0; i < centers.size(); ++i)
    centers[i] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * double(i) / double(cfg.n_mels + 1));
  const double bin_hz = double(sample_rate) / double(cfg.fft_size);
  std::vector<std::vector<std::pair<std::size_t, double>>> filters(cfg.n_mels);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = centers[m], c = centers[m + 1], hi = centers[m + 2];
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double f = double(b) * bin_hz;
      double wgt = 0.0;
      if (f > lo && f < c)
        wgt = (f - lo) / (c - lo);
      else if (f >= c && f < hi)
        wgt = (hi - f) / (hi - c);
      if (wgt > 0.0) filters[m].emplace_back(b, wgt);
    }
  }
  return filters;
}

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

FeatureMatrix logmel(const Waveform& w, const LogMelConfig& cfg) {
  if (w.sample_rate != 16000)
    throw std::invalid_argument(
        "logmel: only 16 kHz input is supported, got " +
        std::to_string(w.sample_rate) + " Hz (resampling is out of scope)");
  if (w.samples.size() < cfg.window_samples)
    throw std::invalid_argument("logmel: waveform shorter than one window");

  const std::size_t n_frames =
      1 + (w.samples.size() - cfg.window_samples) / cfg.hop_samples;
  static thread_local std::vector<double> hamming;
  if (hamming.size() != cfg.window_samples) {
    hamming.resize(cfg.window_samples);
    for (std::size_t i = 0; i < cfg.window_samples; ++i)
      hamming[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * double(i) /
                                          double(cfg.window_samples - 1));
  }
  const auto filters = mel_filters(cfg, w.sample_rate);
  const std::size_t n_bins = cfg.fft_size / 2 + 1;

  FeatureMatrix out;
  out.frames = n_frames;
  out.mels = cfg.n_mels;
  out.values.resize(n_frames * cfg.n_mels);

  std::vector<std::complex<double>> buf(cfg.fft_size);
  std::vector<double> power(n_bins);
  for (std::size_t fr = 0; fr < n_frames; ++fr) {
    const float* x = w.samples.data() + fr * cfg.hop_samples;
    for (std::size_t i = 0; i < cfg.window_samples; ++i)
      buf[i] = {double(x[i]) * hamming[i], 0.0};
    std::fill(buf.begin() + cfg.window_samples, buf.end(),
              std::complex<double>(0.0));
    fft(buf);
    for (std::size_t b = 0; b < n_bins; ++b) power[b] = std::norm(buf[b]);
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      for (auto [b, wgt] : filters[m]) e += wgt * power[b];
      out.at(fr, m) = float(std::log(e + cfg.log_floor));
    }
  }
  return out;
}

FeatureMatrix cmn(const FeatureMatrix& f) {
  if (f.frames == 0) throw std::invalid_argument("cmn: empty features");
  FeatureMatrix out = f;
  for (std::size_t m = 0; m < f.mels; ++m) {
    double mean = 0.0;
    for (std::size_t fr = 0; fr < f.frames; ++fr) mean += f.at(fr, m);
    mean /= double(f.frames);
    for (std::size_t fr = 0; fr < f.frames; ++fr)
      out.at(fr, m) = float(double(f.at(fr, m)) - mean);
  }
  return out;
}

FeatureMatrix crop_or_pad(const FeatureMatrix& f, std::size_t target_frames,
                          Rng& rng) {
  if (f.frames == 0) throw std::invalid_argument("crop_or_pad: empty input");
  if (target_frames == 0)
    throw std::invalid_argument("crop_or_pad: zero target");
  if (f.frames == target_frames) return f;
  FeatureMatrix out;
  out.frames = target_frames;
  out.mels = f.mels;
  out.values.resize(target_frames * f.mels);
  if (f.frames > target_frames) {
    const std::size_t start =
        std::size_t(uniform_int(rng, 0, std::int64_t(f.frames - target_frames)));
    std::memcpy(out.values.data(), f.values.data() + start * f.mels,
                target_frames * f.mels * sizeof(float));
  } else {
    for (std::size_t fr = 0; fr < target_frames; ++fr)
      std::memcpy(out.values.data() + fr * f.mels,
                  f.values.data() + (fr % f.frames) * f.mels,
                  f.mels * sizeof(float));
  }
  return out;
}

Waveform add_noise(const Waveform& w, double snr_db, Rng& rng) {
  double sig_power = 0.0;
  for (float s : w.samples) sig_power += double(s) * double(s);
  sig_power /= double(w.samples.size());
  const double noise_power = sig_power / std::pow(10.0, snr_db / 10.0);
  const double sigma = std::sqrt(noise_power);
  Waveform out = w;
  for (auto& s : out.samples) s = float(double(s) + sigma * normal(rng));
  return out;
}

Waveform reverb(const Waveform& w, double decay_ms, Rng& rng) {
  // Synthetic RIR: unit impulse followed by an exponentially decaying
  // noise tail; energy down 60 dB at decay_ms.
  const std::size_t tail =
      std::size_t(decay_ms / 1000.0 * double(w.sample_rate));
  std::vector<double> rir(tail + 1);
  rir[0] = 1.0;
  const double tau = double(tail) / std::log(1000.0);
  for (std::size_t i = 1; i <= tail; ++i)
    rir[i] = 0.3 * std::exp(-double(i) / tau) * normal(rng);
  Waveform out = w;
  std::vector<double> acc(w.samples.size(), 0.0);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const std::size_t kmax = std::min(i, tail);
    double s = 0.0;
    for (std::size_t k = 0; k <= kmax; ++k)
      s += rir[k] * double(w.samples[i - k]);
    acc[i] = s;
  }
  double peak = 1e-12;
  for (double v : acc) peak = std::max(peak, std::fabs(v));
  const double g = peak > 0.9 ? 0.9 / peak : 1.0;
  for (std::size_t i = 0; i < acc.size(); ++i) out.samples[i] = float(acc[i] * g);
  return out;
}

FeatureMatrix freq_mask(const FeatureMatrix& f, std::size_t max_bins,
                        Rng& rng) {
  if (max_bins >= f.mels)
    throw std::invalid_argument("freq_mask: mask max >= mel count");
  FeatureMatrix out = f;
  const std::size_t width = std::size_t(uniform_int(rng, 1, std::int64_t(max_bins)));
  const std::size_t start =
      std::size_t(uniform_int(rng, 0, std::int64_t(f.mels - width)));
  for (std::size_t fr = 0; fr < f.frames; ++fr)
    for (std::size_t m = start; m < start + width; ++m) out.at(fr, m) = 0.0f;
  return out;
}

FeatureMatrix time_mask(const FeatureMatrix& f, std::size_t max_frames,
                        Rng& rng) {
  if (max_frames >= f.frames)
    throw std::invalid_argument("time_mask: mask max >= frame count");
  FeatureMatrix out = f;
  const std::size_t width =
      std::size_t(uniform_int(rng, 1, std::int64_t(max_frames)));
  const std::size_t start =
      std::size_t(uniform_int(rng, 0, std::int64_t(f.frames - width)));
  for (std::size_t fr = start; fr < start + width; ++fr)
    for (std::size_t m = 0; m < f.mels; ++m) out.at(fr, m) = 0.0f;
  return out;
}

FeatureMatrix augment_features(const Waveform& w,
                               const FeatureMatrix& clean_features,
                               const AugmentConfig& cfg,
                               const LogMelConfig& mel_cfg, Rng& rng) {
  switch (AugmentKind(uniform_int(rng, 0, 3))) {
    case AugmentKind::AdditiveNoise: {
      const double snr = uniform(rng, cfg.snr_db_min, cfg.snr_db_max);
      return logmel(add_noise(w, snr, rng), mel_cfg);
    }
    case AugmentKind::Reverb:
      return logmel(reverb(w, cfg.rir_decay_ms, rng), mel_cfg);
    case AugmentKind::FreqMask:
      return freq_mask(clean_features, cfg.freq_mask_max, rng);
    case AugmentKind::TimeMask:
    default:
      return time_mask(clean_features, cfg.time_mask_max, rng);
  }
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_wav: cannot open " + path.string());
  char riff[4], wave[4];
  is.read(riff, 4);
  read_pod<std::uint32_t>(is);
  is.read(wave, 4);
  if (std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file");
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<char> data;
  while (is) {
    char id[4];
    is.read(id, 4);
    if (!is) break;
    const auto size = read_pod<std::uint32_t>(is);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      format = read_pod<std::uint16_t>(is);
      channels = read_pod<std::uint16_t>(is);
      rate = read_pod<std::uint32_t>(is);
      read_pod<std::uint32_t>(is);
      read_pod<std::uint16_t>(is);
      bits = read_pod<std::uint16_t>(is);
      is.ignore(std::streamsize(size) - 16);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data.resize(size);
      is.read(data.data(), std::streamsize(size));
    } else {
      is.ignore(std::streamsize(size));
    }
  }
  if (channels != 1)
    throw std::runtime_error("read_wav: only mono supported");
  if (rate != 16000)
    throw std::runtime_error("read_wav: expected 16 kHz, got " +
                             std::to_string(rate) + " Hz");
  Waveform w;
  w.sample_rate = int(rate);
  if (format == 1 && bits == 16) {
    const auto* p = reinterpret_cast<const std::int16_t*>(data.data());
    const std::size_t n = data.size() / 2;
    w.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) w.samples[i] = float(p[i]) / 32768.0f;
  } else if (format == 3 && bits == 32) {
    const auto* p = reinterpret_cast<const float*>(data.data());
    w.samples.assign(p, p + data.size() / 4);
  } else {
    throw std::runtime_error("read_wav: unsupported format (need PCM16 or f32)");
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_wav: cannot open " + path.string());
  const std::uint32_t data_size = std::uint32_t(w.samples.size() * 2);
  os.write("RIFF", 4);
  write_pod<std::uint32_t>(os, 36 + data_size);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  write_pod<std::uint32_t>(os, 16);
  write_pod<std::uint16_t>(os, 1);  // PCM
  write_pod<std::uint16_t>(os, 1);  // mono
  write_pod<std::uint32_t>(os, std::uint32_t(w.sample_rate));
  write_pod<std::uint32_t>(os, std::uint32_t(w.sample_rate * 2));
  write_pod<std::uint16_t>(os, 2);
  write_pod<std::uint16_t>(os, 16);
  os.write("data", 4);
  write_pod<std::uint32_t>(os, data_size);
  for (float s : w.samples) {
    const double clipped = std::clamp(double(s), -1.0, 1.0);
    write_pod<std::int16_t>(os, std::int16_t(std::lrint(clipped * 32767.0)));
  }
}

void write_feature_cache(const std::filesystem::path& path,
                         const FeatureMatrix& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("write_feature_cache: cannot open " +
                             path.string());
  os.write("AASVFEAT", 8);
  write_pod<std::uint32_t>(os, 1);
  write_pod<std::uint32_t>(os, std::uint32_t(f.frames));
  write_pod<std::uint32_t>(os, std::uint32_t(f.mels));
  os.write(reinterpret_cast<const char*>(f.values.data()),
           std::streamsize(f.values.size() * sizeof(float)));
}

FeatureMatrix read_feature_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("read_feature_cache: cannot open " +
                             path.string());
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, "AASVFEAT", 8) != 0)
    throw std::runtime_error("read_feature_cache: bad magic");
  const auto version = read_pod<std::uint32_t>(is);
  if (version != 1)
    throw std::runtime_error("read_feature_cache: unsupported version " +
                             std::to_string(version));
  FeatureMatrix f;
  f.frames = read_pod<std::uint32_t>(is);
  f.mels = read_pod<std::uint32_t>(is);
  f.values.resize(f.frames * f.mels);
  is.read(reinterpret_cast<char*>(f.values.data()),
          std::streamsize(f.values.size() * sizeof(float)));
  if (!is) throw std::runtime_error("read_feature_cache: truncated file");
  return f;
}

}  // namespace aasv

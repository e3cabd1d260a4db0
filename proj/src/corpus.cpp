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

#include "aasv/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace aasv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Two-pole resonator (constant-peak-gain bandpass).
struct Resonator {
  double b0, a1, a2;
  double z1 = 0.0, z2 = 0.0;

  Resonator(double fc, double bw, double fs) {
    const double r = std::exp(-kPi * bw / fs);
    a1 = -2.0 * r * std::cos(2.0 * kPi * fc / fs);
    a2 = r * r;
    b0 = (1.0 - r * r) / 2.0;
  }

  double step(double x) {
    // y[n] = b0*(x[n] - x[n-2]) - a1*y[n-1] - a2*y[n-2], direct form II.
    const double w = x - a1 * z1 - a2 * z2;
    const double y = b0 * (w - z2);
    z2 = z1;
    z1 = w;
    return y;
  }
};

}  // namespace

std::string domain_name(Domain d) {
  return d == Domain::Adult ? "adult" : "child";
}

Domain domain_from_name(const std::string& s) {
  if (s == "adult") return Domain::Adult;
  if (s == "child") return Domain::Child;
  throw std::invalid_argument("unknown domain: " + s);
}

const SpeakerProfile& Manifest::speaker(const std::string& id) const {
  for (const auto& s : speakers)
    if (s.speaker_id == id) return s;
  throw std::out_of_range("unknown speaker: " + id);
}

SpeakerProfile gen_speaker(Domain domain, double severity, Rng& rng) {
  if (severity < 0.0 || severity > 1.0)
    throw std::invalid_argument("gen_speaker: severity must be in [0,1]");
  if (domain == Domain::Adult && severity != 0.0)
    throw std::invalid_argument("gen_speaker: adult severity must be 0");
  SpeakerProfile p;
  p.domain = domain;
  p.severity = domain == Domain::Adult ? 0.0 : severity;

  // Base (adult-range) draw; children are the same distribution shifted up.
  const double f0 = uniform(rng, 90.0, 180.0);
  const double base_peaks[3] = {uniform(rng, 350.0, 900.0),
                                uniform(rng, 950.0, 2000.0),
                                uniform(rng, 2100.0, 3200.0)};
  const double base_bw[3] = {uniform(rng, 60.0, 110.0),
                             uniform(rng, 80.0, 150.0),
                             uniform(rng, 120.0, 220.0)};
  const double f0_mult = 1.0 + 0.8 * p.severity;
  const double peak_mult = 1.0 + 0.35 * p.severity;
  // Besides the frequency shifts, young voices have broader, less sharply
  // tuned resonances; widening bandwidths with severity gives the age
  // axis a spectral-shape component as well as a location component.
  const double bw_mult = 1.0 + 0.9 * p.severity;
  p.f0_hz = f0 * f0_mult;
  for (int i = 0; i < 3; ++i) {
    // per-speaker jitter keeps same-domain speakers separable
    p.peak_hz[i] = base_peaks[i] * peak_mult * uniform(rng, 0.95, 1.05);
    p.bandwidth_hz[i] = base_bw[i] * bw_mult;
  }
  p.syllable_rate_hz = uniform(rng, 2.5, 4.0);
  p.vibrato_rate_hz = uniform(rng, 4.0, 7.0);
  // Small vocal tracts put a fourth resonance well above the adult
  // range; adults have no energy there at all. Speaker-jittered like the
  // other peaks, amplitude handled in synthesis (scales with severity).
  if (domain == Domain::Child)
    p.hi_peak_hz = uniform(rng, 5000.0, 6000.0) * uniform(rng, 0.95, 1.05);
  return p;
}

Waveform synth_utterance(const SpeakerProfile& profile,
                         const UtteranceSpec& spec) {
  if (spec.duration_s < 1.0)
    throw std::invalid_argument("synth_utterance: duration >= 1 s required");
  Rng rng(spec.rng_seed);
  const int fs = 16000;
  const std::size_t n = std::size_t(spec.duration_s * fs);

  Waveform w;
  w.sample_rate = fs;
  w.samples.resize(n);

  // Per-utterance delivery variation. Absolute pitch moves +-5% and the
  // whole resonance stack +-2.5% between utterances of one speaker, so
  // nearby speakers overlap on any single number; identity has to come
  // from the joint spectrum shape (peak ratios, bandwidths, f0 range).
  const double utt_f0_mult = uniform(rng, 0.95, 1.05);
  const double utt_peak_mult = uniform(rng, 0.975, 1.025);
  double utt_peaks[3];
  for (int i = 0; i < 3; ++i)
    utt_peaks[i] =
        profile.peak_hz[i] * utt_peak_mult * uniform(rng, 0.99, 1.01);

  const bool hi_band = profile.hi_peak_hz > 0.0 && profile.severity > 0.0;
  const double hi_peak = hi_band ? profile.hi_peak_hz * utt_peak_mult *
                                       uniform(rng, 0.99, 1.01)
                                 : 4000.0;
  Resonator res[4] = {Resonator(utt_peaks[0], profile.bandwidth_hz[0], fs),
                      Resonator(utt_peaks[1], profile.bandwidth_hz[1], fs),
                      Resonator(utt_peaks[2], profile.bandwidth_hz[2], fs),
                      Resonator(hi_peak, 400.0, fs)};
  const double res_gain[4] = {1.0, 0.7, 0.45,
                              hi_band ? 0.9 * profile.severity : 0.0};

  const double vib_rate = profile.vibrato_rate_hz * uniform(rng, 0.95, 1.05);
  const double vib_phase = uniform(rng, 0.0, 2.0 * kPi);
  const double noise_amp =
      std::pow(10.0, (spec.noise_floor_db + uniform(rng, -2.0, 2.0)) / 20.0);
  // Young voices are breathy: strong aspiration hiss, high-pass filtered
  // so it sits above the resonance region and does not mask the speaker's
  // identity cues. Its level wobbles between utterances, so breathiness is
  // a domain cue but a poor speaker cue.
  const double breath_jitter_db = 2.0 + 4.0 * profile.severity;
  const double breath_amp =
      profile.severity > 0.0
          ? std::pow(10.0, (spec.noise_floor_db + 32.0 * profile.severity +
                            uniform(rng, -breath_jitter_db, breath_jitter_db)) /
                               20.0)
          : 0.0;

  // Syllable-like amplitude gating: raised-cosine voiced bursts with
  // silence between them. Without the gaps the signal is stationary and
  // per-utterance cepstral mean normalization would subtract away nearly
  // the whole spectral envelope; the voiced/silent contrast keeps the
  // resonance pattern visible in normalized features. Rate is a speaker
  // trait, so temporal structure also carries identity.
  // Young speech is faster-paced with shorter voiced stretches and a
  // less steady pitch; these severity terms vanish for adults.
  const double syl_rate = profile.syllable_rate_hz *
                          (1.0 + 1.0 * profile.severity) *
                          uniform(rng, 0.95, 1.05);
  const double syl_phase = uniform(rng, 0.0, 1.0);
  const double syl_duty =
      uniform(rng, 0.58, 0.68) * (1.0 - 0.15 * profile.severity);
  const double vib_depth = 0.03 + 0.06 * profile.severity;

  // Impulse-train glottal source with vibrato, shaped by the resonators,
  // plus a white noise floor that stays on through the gaps. Breathiness
  // is added after the filters as first-difference (high-pass) noise.
  double phase = uniform(rng, 0.0, 1.0);
  double prev_white = 0.0;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = double(i) / fs;
    const double f0 =
        profile.f0_hz * utt_f0_mult *
        (1.0 + vib_depth * std::sin(2.0 * kPi * vib_rate * t + vib_phase));
    phase += f0 / fs;
    double src = 0.0;
    if (phase >= 1.0) {
      phase -= 1.0;
      src = 1.0;
    }
    const double frac = std::fmod(syl_rate * t + syl_phase, 1.0);
    const double gate =
        frac < syl_duty ? 0.5 * (1.0 - std::cos(2.0 * kPi * frac / syl_duty))
                        : 0.0;
    src = src * gate + noise_amp * normal(rng);
    double y = 0.0;
    for (int r = 0; r < 4; ++r) y += res_gain[r] * res[r].step(src);
    if (breath_amp > 0.0) {
      const double white = normal(rng);
      y += breath_amp * 0.5 * (white - prev_white);
      prev_white = white;
    }
    out[i] = y;
  }
  double peak = 0.0;
  for (double v : out) peak = std::max(peak, std::fabs(v));
  const double g = peak > 0.0 ? 0.9 / peak : 0.0;
  for (std::size_t i = 0; i < n; ++i) w.samples[i] = float(out[i] * g);
  return w;
}

Manifest build_splits(const std::vector<SpeakerProfile>& speakers,
                      const CorpusConfig& cfg) {
  Manifest m;
  m.speakers = speakers;
  Rng rng(split_seed(cfg.seed, 0xA11));

  std::map<Domain, std::vector<const SpeakerProfile*>> by_domain;
  for (const auto& s : speakers) by_domain[s.domain].push_back(&s);

  std::set<std::string> test_speakers;
  for (auto& [domain, list] : by_domain) {
    const std::size_t n_test = std::size_t(double(list.size()) * cfg.test_fraction);
    if (list.size() < 4 || n_test == 0 || n_test >= list.size())
      throw std::invalid_argument("build_splits: insufficient speakers in " +
                                  domain_name(domain));
    std::shuffle(list.begin(), list.end(), rng);
    for (std::size_t i = 0; i < n_test; ++i)
      test_speakers.insert(list[i]->speaker_id);
  }

  std::size_t global_idx = 0;
  for (const auto& s : speakers) {
    const bool is_test = test_speakers.count(s.speaker_id) > 0;
    const bool dc_eligible =
        !is_test &&
        (s.domain == Domain::Adult || s.severity >= cfg.dc_train_severity);
    for (std::size_t u = 0; u < cfg.utterances_per_speaker; ++u) {
      ManifestEntry e;
      char buf[16];
      std::snprintf(buf, sizeof(buf), "_utt%02zu", u);
      e.utterance_id = s.speaker_id + buf;
      e.speaker_id = s.speaker_id;
      e.domain = s.domain;
      e.severity = s.severity;
      e.seed = split_seed(cfg.seed, global_idx);
      if (is_test) {
        e.splits = {Split::Test};
      } else if (dc_eligible && u % 3 == 2) {
        // every third utterance of dc-eligible speakers feeds the domain
        // classifier; splits stay disjoint by utterance
        e.splits = {Split::DcTrain};
      } else {
        e.splits = {Split::Train};
      }
      m.entries.push_back(std::move(e));
      ++global_idx;
    }
  }
  return m;
}

Manifest build_corpus(const CorpusConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<SpeakerProfile> speakers;
  for (std::size_t i = 0; i < cfg.adult_speakers; ++i) {
    auto s = gen_speaker(Domain::Adult, 0.0, rng);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "adult_%03zu", i);
    s.speaker_id = buf;
    speakers.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < cfg.child_speakers; ++i) {
    const double sev = uniform(rng, cfg.severity_min, cfg.severity_max);
    auto s = gen_speaker(Domain::Child, sev, rng);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "child_%03zu", i);
    s.speaker_id = buf;
    speakers.push_back(std::move(s));
  }
  return build_splits(speakers, cfg);
}

TrialList build_trials(const Manifest& manifest, Split split,
                       std::optional<Domain> domain, std::size_t n_pos,
                       std::size_t n_neg, Rng& rng, double severity_lo,
                       double severity_hi) {
  std::vector<const ManifestEntry*> pool;
  for (const auto& e : manifest.entries) {
    if (!e.in_split(split)) continue;
    if (domain && e.domain != *domain) continue;
    if (e.domain == Domain::Child &&
        (e.severity < severity_lo || e.severity > severity_hi))
      continue;
    pool.push_back(&e);
  }

  std::map<std::string, std::vector<const ManifestEntry*>> by_speaker;
  for (const auto* e : pool) by_speaker[e->speaker_id].push_back(e);

  std::vector<std::pair<const ManifestEntry*, const ManifestEntry*>> pos, neg;
  for (const auto& [spk, utts] : by_speaker)
    for (std::size_t i = 0; i < utts.size(); ++i)
      for (std::size_t j = i + 1; j < utts.size(); ++j)
        pos.emplace_back(utts[i], utts[j]);
  {
    std::vector<const std::vector<const ManifestEntry*>*> groups;
    for (const auto& [spk, utts] : by_speaker) groups.push_back(&utts);
    for (std::size_t a = 0; a < groups.size(); ++a)
      for (std::size_t b = a + 1; b < groups.size(); ++b)
        for (const auto* e1 : *groups[a])
          for (const auto* e2 : *groups[b])
            if (e1->domain == e2->domain) neg.emplace_back(e1, e2);
  }
  if (pos.size() < n_pos || neg.size() < n_neg)
    throw std::invalid_argument(
        "build_trials: infeasible counts (have " + std::to_string(pos.size()) +
        " positive and " + std::to_string(neg.size()) +
        " negative candidate pairs)");

  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  TrialList out;
  for (std::size_t i = 0; i < n_pos; ++i)
    out.trials.push_back({1, pos[i].first->utterance_id,
                          pos[i].second->utterance_id});
  for (std::size_t i = 0; i < n_neg; ++i)
    out.trials.push_back({0, neg[i].first->utterance_id,
                          neg[i].second->utterance_id});
  out.n_positive = n_pos;
  out.n_negative = n_neg;
  return out;
}

Waveform utterance_waveform(const Manifest& manifest,
                            const ManifestEntry& entry, double duration_s) {
  if (!entry.wav_path.empty()) return read_wav(entry.wav_path);
  UtteranceSpec spec;
  spec.utterance_id = entry.utterance_id;
  spec.speaker_id = entry.speaker_id;
  spec.duration_s = duration_s;
  spec.rng_seed = entry.seed;
  return synth_utterance(manifest.speaker(entry.speaker_id), spec);
}

namespace {

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::DcTrain: return "dc-train";
    default: return "test";
  }
}

Split split_from_name(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dc-train") return Split::DcTrain;
  if (s == "test") return Split::Test;
  throw std::invalid_argument("unknown split tag: " + s);
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream os(path);
  if (!os)
    throw std::runtime_error("write_manifest: cannot open " + path.string());
  for (const auto& s : m.speakers) {
    nlohmann::json j;
    j["type"] = "speaker";
    j["speaker_id"] = s.speaker_id;
    j["domain"] = domain_name(s.domain);
    j["severity"] = s.severity;
    j["f0_hz"] = s.f0_hz;
    j["peaks_hz"] = {s.peak_hz[0], s.peak_hz[1], s.peak_hz[2]};
    j["bandwidths_hz"] = {s.bandwidth_hz[0], s.bandwidth_hz[1],
                          s.bandwidth_hz[2]};
    j["syllable_rate_hz"] = s.syllable_rate_hz;
    j["vibrato_rate_hz"] = s.vibrato_rate_hz;
    j["hi_peak_hz"] = s.hi_peak_hz;
    os << j.dump() << "\n";
  }
  for (const auto& e : m.entries) {
    nlohmann::json j;
    j["type"] = "utterance";
    j["utterance_id"] = e.utterance_id;
    j["speaker_id"] = e.speaker_id;
    j["domain"] = domain_name(e.domain);
    j["severity"] = e.severity;
    j["seed"] = e.seed;
    std::vector<std::string> tags;
    for (Split s : e.splits) tags.emplace_back(split_name(s));
    j["splits"] = tags;
    if (!e.wav_path.empty()) j["wav_path"] = e.wav_path;
    os << j.dump() << "\n";
  }
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("read_manifest: cannot open " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.at("type") == "speaker") {
      SpeakerProfile s;
      s.speaker_id = j.at("speaker_id");
      s.domain = domain_from_name(j.at("domain"));
      s.severity = j.at("severity");
      s.f0_hz = j.at("f0_hz");
      for (int i = 0; i < 3; ++i) {
        s.peak_hz[i] = j.at("peaks_hz")[i];
        s.bandwidth_hz[i] = j.at("bandwidths_hz")[i];
      }
      s.syllable_rate_hz = j.at("syllable_rate_hz");
      s.vibrato_rate_hz = j.at("vibrato_rate_hz");
      s.hi_peak_hz = j.at("hi_peak_hz");
      m.speakers.push_back(std::move(s));
    } else {
      ManifestEntry e;
      e.utterance_id = j.at("utterance_id");
      e.speaker_id = j.at("speaker_id");
      e.domain = domain_from_name(j.at("domain"));
      e.severity = j.at("severity");
      e.seed = j.at("seed");
      for (const auto& t : j.at("splits"))
        e.splits.push_back(split_from_name(t));
      if (j.contains("wav_path")) e.wav_path = j.at("wav_path");
      m.entries.push_back(std::move(e));
    }
  }
  return m;
}

}  // namespace aasv

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

#include "aasv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace aasv {

namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------
// Config plumbing.

std::vector<std::pair<std::string, std::string>> config_lines(
    const ExperimentConfig& c) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  return {
      {"work_dir", c.work_dir.string()},
      {"virtual_audio", c.virtual_audio ? "true" : "false"},
      {"threads", std::to_string(c.threads)},
      {"seed", std::to_string(c.seed)},
      {"corpus.adult_speakers", std::to_string(c.corpus.adult_speakers)},
      {"corpus.child_speakers", std::to_string(c.corpus.child_speakers)},
      {"corpus.utterances_per_speaker",
       std::to_string(c.corpus.utterances_per_speaker)},
      {"corpus.duration_s", num(c.corpus.duration_s)},
      {"corpus.severity_min", num(c.corpus.severity_min)},
      {"corpus.severity_max", num(c.corpus.severity_max)},
      {"corpus.test_fraction", num(c.corpus.test_fraction)},
      {"corpus.dc_train_severity", num(c.corpus.dc_train_severity)},
      {"train.epochs", std::to_string(c.train.epochs)},
      {"train.batch_size", std::to_string(c.train.batch_size)},
      {"train.crop_frames", std::to_string(c.train.crop_frames)},
      {"train.aam_scale", num(c.train.aam.scale)},
      {"train.aam_margin", num(c.train.aam.margin)},
      {"train.base_lr", num(c.train.base_lr)},
      {"train.max_lr", num(c.train.max_lr)},
      {"train.weight_decay", num(c.train.weight_decay)},
      {"train.augment", c.train.augment ? "true" : "false"},
      {"finetune.epochs", std::to_string(c.finetune_epochs)},
      {"dc.hidden", std::to_string(c.dc.hidden)},
      {"dc.epochs", std::to_string(c.dc.epochs)},
      {"dc.batch_size", std::to_string(c.dc.batch_size)},
      {"dc.holdout_fraction", num(c.dc.holdout_fraction)},
      {"dc.augment_copies", std::to_string(c.dc_augment_copies)},
      {"wse_alpha", num(c.wse_alpha)},
      {"trial_pos", std::to_string(c.trial_pos)},
      {"trial_neg", std::to_string(c.trial_neg)},
  };
}

void apply_key(ExperimentConfig& c, const std::string& key,
               const std::string& value) {
  auto as_size = [&] { return std::size_t(std::stoull(value)); };
  auto as_num = [&] { return std::stod(value); };
  auto as_bool = [&] {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key);
  };
  if (key == "work_dir") c.work_dir = value;
  else if (key == "virtual_audio") c.virtual_audio = as_bool();
  else if (key == "threads") c.threads = as_size();
  else if (key == "seed") c.seed = std::stoull(value);
  else if (key == "corpus.adult_speakers") c.corpus.adult_speakers = as_size();
  else if (key == "corpus.child_speakers") c.corpus.child_speakers = as_size();
  else if (key == "corpus.utterances_per_speaker")
    c.corpus.utterances_per_speaker = as_size();
  else if (key == "corpus.duration_s") c.corpus.duration_s = as_num();
  else if (key == "corpus.severity_min") c.corpus.severity_min = as_num();
  else if (key == "corpus.severity_max") c.corpus.severity_max = as_num();
  else if (key == "corpus.test_fraction") c.corpus.test_fraction = as_num();
  else if (key == "corpus.dc_train_severity")
    c.corpus.dc_train_severity = as_num();
  else if (key == "train.epochs") c.train.epochs = as_size();
  else if (key == "train.batch_size") c.train.batch_size = as_size();
  else if (key == "train.crop_frames") c.train.crop_frames = as_size();
  else if (key == "train.aam_scale") c.train.aam.scale = as_num();
  else if (key == "train.aam_margin") c.train.aam.margin = as_num();
  else if (key == "train.base_lr") c.train.base_lr = as_num();
  else if (key == "train.max_lr") c.train.max_lr = as_num();
  else if (key == "train.weight_decay") c.train.weight_decay = as_num();
  else if (key == "train.augment") c.train.augment = as_bool();
  else if (key == "finetune.epochs") c.finetune_epochs = as_size();
  else if (key == "dc.hidden") c.dc.hidden = as_size();
  else if (key == "dc.epochs") c.dc.epochs = as_size();
  else if (key == "dc.batch_size") c.dc.batch_size = as_size();
  else if (key == "dc.holdout_fraction") c.dc.holdout_fraction = as_num();
  else if (key == "dc.augment_copies") c.dc_augment_copies = as_size();
  else if (key == "wse_alpha") c.wse_alpha = as_num();
  else if (key == "trial_pos") c.trial_pos = as_size();
  else if (key == "trial_neg") c.trial_neg = as_size();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::pair<std::string, std::string> parse_kv(const std::string& line) {
  auto eq = line.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("config: expected key=value, got '" + line +
                                "'");
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  return {trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

// Keys each stage's output depends on; a stage hash changes iff one of
// its keys changes, so downstream stamps go stale exactly when needed.
bool stage_uses_key(const std::string& stage, const std::string& key) {
  if (key == "work_dir" || key == "threads") return false;  // placement only
  bool gen = key.rfind("corpus.", 0) == 0 || key == "seed" ||
             key == "virtual_audio";
  bool train = gen || key.rfind("train.", 0) == 0;
  bool finetune = train || key.rfind("finetune.", 0) == 0 ||
                  key == "wse_alpha";
  bool dc = train || key.rfind("dc.", 0) == 0;
  bool embed = finetune || dc;
  bool eval = embed || key.rfind("trial_", 0) == 0;
  if (stage == "gen") return gen;
  if (stage == "train") return train;
  if (stage == "finetune") return finetune;
  if (stage == "dc") return dc;
  if (stage == "embed") return embed;
  if (stage == "eval") return eval;
  throw std::logic_error("unknown stage " + stage);
}

// ---------------------------------------------------------------------
// Stamp files: each artifact carries the hash of the config subset it
// was built from.

bool fresh(const fs::path& artifact, const std::string& hash) {
  if (!fs::exists(artifact)) return false;
  std::ifstream in(artifact.string() + ".stamp");
  std::string stored;
  return in && std::getline(in, stored) && stored == hash;
}

void write_stamp(const fs::path& artifact, const std::string& hash) {
  std::ofstream out(artifact.string() + ".stamp");
  if (!out) throw std::runtime_error("cannot write stamp for " +
                                     artifact.string());
  out << hash << '\n';
}

void require_fresh(const fs::path& artifact, const std::string& hash,
                   const std::string& producer) {
  if (!fresh(artifact, hash))
    throw std::runtime_error("missing or stale prerequisite " +
                             artifact.string() + "; run '" + producer +
                             "' first");
}

void echo_config(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.work_dir);
  std::ofstream out(cfg.work_dir / "config.effective");
  if (!out) throw std::runtime_error("cannot write effective config");
  out << config_text(cfg);
}

// ---------------------------------------------------------------------
// Shared data assembly.

Encoder load_encoder(const fs::path& path) {
  return Encoder::from_checkpoint(load_checkpoint(path));
}

// Labeled utterances of one split+domain, speaker indices assigned in
// manifest order.
std::vector<TrainUtterance> training_data(const Manifest& m, Split split,
                                          Domain domain,
                                          const ExperimentConfig& cfg,
                                          std::size_t* num_speakers) {
  std::vector<std::string> speakers;
  std::vector<TrainUtterance> out;
  for (const auto& e : m.entries) {
    if (e.domain != domain || !e.in_split(split)) continue;
    auto it = std::find(speakers.begin(), speakers.end(), e.speaker_id);
    std::size_t idx = it - speakers.begin();
    if (it == speakers.end()) speakers.push_back(e.speaker_id);
    TrainUtterance u;
    u.utterance_id = e.utterance_id;
    u.speaker_index = idx;
    u.wave = utterance_waveform(m, e, cfg.corpus.duration_s);
    u.features = logmel(u.wave, cfg.train.mel);
    out.push_back(std::move(u));
  }
  *num_speakers = speakers.size();
  return out;
}

void save_trained(const fs::path& path, const TrainedEncoder& trained,
                  std::uint64_t seed) {
  Checkpoint ck = trained.encoder.to_checkpoint();
  ck.header["seed"] = seed;
  ck.header["epochs"] = trained.log.epoch_loss.size();
  ck.tensors.emplace_back("head.w", trained.head.value);
  save_checkpoint(path, ck);
}

void save_train_log(const fs::path& path, const TrainLog& log) {
  nlohmann::json j{{"step_loss", log.step_loss},
                   {"step_lr", log.step_lr},
                   {"epoch_loss", log.epoch_loss}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

FeatureMatrix clean_features(const Manifest& m, const ManifestEntry& e,
                             const ExperimentConfig& cfg) {
  return cmn(logmel(utterance_waveform(m, e, cfg.corpus.duration_s),
                    cfg.train.mel));
}

const std::vector<std::string> kSystems = {"a_sv", "c_sv", "aasv",
                                           "plain_concat", "wse"};

fs::path scores_path(const ExperimentConfig& cfg, const std::string& system,
                     const std::string& cond) {
  return cfg.work_dir / "report" / ("scores_" + system + "_" + cond + ".txt");
}

}  // namespace

// ---------------------------------------------------------------------

ExperimentConfig load_config(const std::optional<fs::path>& file,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot read config " + file->string());
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto [k, v] = parse_kv(line);
      apply_key(cfg, k, v);
    }
  }
  for (const auto& o : overrides) {
    auto [k, v] = parse_kv(o);
    apply_key(cfg, k, v);
  }
  // The master seed drives every stage through fixed stream offsets.
  cfg.corpus.seed = cfg.seed;
  cfg.train.seed = split_seed(cfg.seed, 101);
  cfg.dc.seed = split_seed(cfg.seed, 103);
  return cfg;
}

std::string config_text(const ExperimentConfig& cfg) {
  std::ostringstream os;
  for (const auto& [k, v] : config_lines(cfg)) os << k << " = " << v << '\n';
  return os.str();
}

std::string config_hash(const ExperimentConfig& cfg,
                        const std::string& stage) {
  std::ostringstream os;
  for (const auto& [k, v] : config_lines(cfg))
    if (stage_uses_key(stage, k)) os << k << " = " << v << '\n';
  return fnv1a_hex(os.str());
}

fs::path manifest_path(const ExperimentConfig& cfg) {
  return cfg.work_dir / "corpus" / "manifest.jsonl";
}
fs::path checkpoint_path(const ExperimentConfig& cfg,
                         const std::string& which) {
  return cfg.work_dir / "ckpt" / (which + ".ckpt");
}
fs::path embeddings_path(const ExperimentConfig& cfg,
                         const std::string& system) {
  return cfg.work_dir / "emb" / (system + ".emb");
}
fs::path report_path(const ExperimentConfig& cfg, const std::string& ext) {
  return cfg.work_dir / "report" / ("report." + ext);
}

std::vector<EvalCondition> eval_conditions() {
  // Child bands ordered young (largest acoustic shift) to old; band
  // edges split the default severity range into thirds.
  return {
      {"child_young", Domain::Child, 0.7334, 1.0},
      {"child_mid", Domain::Child, 0.4667, 0.7334},
      {"child_old", Domain::Child, 0.0, 0.4667},
      {"adult", Domain::Adult, 0.0, 1.0},
  };
}

void stage_gen(const ExperimentConfig& cfg) {
  echo_config(cfg);
  auto hash = config_hash(cfg, "gen");
  auto path = manifest_path(cfg);
  if (fresh(path, hash)) return;
  fs::create_directories(path.parent_path());
  Manifest m = build_corpus(cfg.corpus);
  if (!cfg.virtual_audio) {
    fs::path wav_dir = path.parent_path() / "wav";
    fs::create_directories(wav_dir);
    for (auto& e : m.entries) {
      fs::path wav = wav_dir / (e.utterance_id + ".wav");
      write_wav(wav, utterance_waveform(m, e, cfg.corpus.duration_s));
      e.wav_path = wav.string();
    }
  }
  write_manifest(path, m);
  write_stamp(path, hash);
}

void stage_train(const ExperimentConfig& cfg) {
  auto hash = config_hash(cfg, "train");
  auto path = checkpoint_path(cfg, "adult");
  if (fresh(path, hash)) return;
  require_fresh(manifest_path(cfg), config_hash(cfg, "gen"), "gen");
  Manifest m = read_manifest(manifest_path(cfg));
  std::size_t n_speakers = 0;
  auto data = training_data(m, Split::Train, Domain::Adult, cfg, &n_speakers);
  TrainConfig tc = cfg.train;
  tc.seed = split_seed(cfg.seed, 101);
  TrainedEncoder trained = train_encoder(data, n_speakers, tc);
  fs::create_directories(path.parent_path());
  save_trained(path, trained, tc.seed);
  save_train_log(cfg.work_dir / "ckpt" / "adult_log.json", trained.log);
  write_stamp(path, hash);
}

void stage_finetune(const ExperimentConfig& cfg) {
  auto hash = config_hash(cfg, "finetune");
  auto child_path = checkpoint_path(cfg, "child");
  auto wse_path = checkpoint_path(cfg, "wse");
  if (fresh(child_path, hash) && fresh(wse_path, hash)) return;
  require_fresh(checkpoint_path(cfg, "adult"), config_hash(cfg, "train"),
                "train");
  Manifest m = read_manifest(manifest_path(cfg));
  Encoder adult = load_encoder(checkpoint_path(cfg, "adult"));
  std::size_t n_speakers = 0;
  auto data = training_data(m, Split::Train, Domain::Child, cfg, &n_speakers);
  TrainConfig tc = cfg.train;
  tc.epochs = cfg.finetune_epochs;
  tc.seed = split_seed(cfg.seed, 102);
  TrainedEncoder trained = finetune(adult, data, n_speakers, tc);
  save_trained(child_path, trained, tc.seed);
  save_train_log(cfg.work_dir / "ckpt" / "child_log.json", trained.log);
  write_stamp(child_path, hash);
  Encoder merged = wse_merge(adult, trained.encoder, cfg.wse_alpha);
  Checkpoint ck = merged.to_checkpoint();
  ck.header["wse_alpha"] = cfg.wse_alpha;
  save_checkpoint(wse_path, ck);
  write_stamp(wse_path, hash);
}

std::vector<LabeledEmbedding> dc_training_embeddings(
    const Manifest& manifest, Encoder& encoder, const ExperimentConfig& cfg) {
  std::vector<LabeledEmbedding> out;
  std::uint64_t stream = split_seed(cfg.seed, 104);
  std::size_t index = 0;
  for (const auto& e : manifest.entries) {
    if (!e.in_split(Split::DcTrain)) continue;
    int label = e.domain == Domain::Child ? 0 : 1;
    Waveform w = utterance_waveform(manifest, e, cfg.corpus.duration_s);
    FeatureMatrix clean = logmel(w, cfg.train.mel);
    out.push_back({embed(cmn(clean), encoder).values, label});
    Rng rng(split_seed(stream, index++));
    for (std::size_t k = 0; k < cfg.dc_augment_copies; ++k) {
      FeatureMatrix aug =
          augment_features(w, clean, cfg.train.aug, cfg.train.mel, rng);
      out.push_back({embed(cmn(aug), encoder).values, label});
    }
  }
  return out;
}

void stage_train_dc(const ExperimentConfig& cfg) {
  auto hash = config_hash(cfg, "dc");
  auto path = checkpoint_path(cfg, "dc");
  if (fresh(path, hash)) return;
  require_fresh(checkpoint_path(cfg, "adult"), config_hash(cfg, "train"),
                "train");
  Manifest m = read_manifest(manifest_path(cfg));
  Encoder adult = load_encoder(checkpoint_path(cfg, "adult"));
  auto data = dc_training_embeddings(m, adult, cfg);
  DomainTrainConfig dcfg = cfg.dc;
  dcfg.seed = split_seed(cfg.seed, 103);
  auto result = train_domain_classifier(data, dcfg);
  save_checkpoint(path, result.classifier.to_checkpoint());
  nlohmann::json j{{"holdout_accuracy", result.holdout_accuracy},
                   {"holdout_f1", result.holdout_f1},
                   {"epoch_loss", result.epoch_loss},
                   {"n_examples", data.size()}};
  std::ofstream log(cfg.work_dir / "ckpt" / "dc_log.json");
  log << j.dump(2) << '\n';
  write_stamp(path, hash);
}

std::map<std::string, Tensor> embed_split(const Manifest& manifest,
                                          Split split, Encoder& encoder,
                                          const ExperimentConfig& cfg) {
  std::map<std::string, Tensor> out;
  for (const auto& e : manifest.entries)
    if (e.in_split(split))
      out.emplace(e.utterance_id,
                  embed(clean_features(manifest, e, cfg), encoder).values);
  return out;
}

void stage_embed(const ExperimentConfig& cfg) {
  auto hash = config_hash(cfg, "embed");
  bool all_fresh = true;
  for (const auto& s : kSystems)
    all_fresh = all_fresh && fresh(embeddings_path(cfg, s), hash);
  if (all_fresh) return;
  require_fresh(checkpoint_path(cfg, "child"), config_hash(cfg, "finetune"),
                "finetune");
  require_fresh(checkpoint_path(cfg, "dc"), config_hash(cfg, "dc"),
                "train-dc");
  Manifest m = read_manifest(manifest_path(cfg));
  Encoder adult = load_encoder(checkpoint_path(cfg, "adult"));
  Encoder child = load_encoder(checkpoint_path(cfg, "child"));
  Encoder wse = load_encoder(checkpoint_path(cfg, "wse"));
  DomainClassifier dc =
      DomainClassifier::from_checkpoint(load_checkpoint(
          checkpoint_path(cfg, "dc")));

  auto unit = [](const Tensor& t) {
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) ss += double(t[i]) * t[i];
    const float g = ss > 0.0 ? float(1.0 / std::sqrt(ss)) : 0.0f;
    Tensor out = t;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= g;
    return out;
  };
  std::map<std::string, std::vector<FusedEmbedding>> tables;
  for (const auto& e : m.entries) {
    if (!e.in_split(Split::Test)) continue;
    FeatureMatrix f = clean_features(m, e, cfg);
    Tensor e_a = embed(f, adult).values;
    Tensor e_c = embed(f, child).values;
    Tensor e_w = embed(f, wse).values;
    DomainPosterior p = dc.classify(e_a);
    tables["a_sv"].push_back({e.utterance_id, e_a, 0.5, 0.5});
    tables["c_sv"].push_back({e.utterance_id, e_c, 0.5, 0.5});
    tables["wse"].push_back({e.utterance_id, e_w, 0.5, 0.5});
    // Branch embeddings enter fusion unit-length so the posterior weights,
    // not the raw norms, set the branch balance.
    Tensor nc = unit(e_c);
    Tensor na = unit(e_a);
    tables["aasv"].push_back(
        {e.utterance_id, fuse(nc, na, p), p.p_child, p.p_adult});
    tables["plain_concat"].push_back(
        {e.utterance_id, plain_concat(nc, na), 0.5, 0.5});
  }
  fs::create_directories(cfg.work_dir / "emb");
  for (const auto& s : kSystems) {
    write_embeddings(embeddings_path(cfg, s), tables.at(s));
    write_stamp(embeddings_path(cfg, s), hash);
  }
}

void stage_eval(const ExperimentConfig& cfg) {
  auto hash = config_hash(cfg, "eval");
  if (fresh(report_path(cfg, "tsv"), hash) &&
      fresh(report_path(cfg, "txt"), hash))
    return;
  for (const auto& s : kSystems)
    require_fresh(embeddings_path(cfg, s), config_hash(cfg, "embed"),
                  "embed");
  Manifest m = read_manifest(manifest_path(cfg));
  fs::create_directories(cfg.work_dir / "report");

  std::map<std::string, std::map<std::string, Tensor>> tables;
  for (const auto& s : kSystems)
    for (const auto& e : read_embeddings(embeddings_path(cfg, s)))
      tables[s].emplace(e.utterance_id, e.values);

  Report rep;
  for (const auto& s : kSystems) rep.systems.push_back(s);
  for (const auto& c : eval_conditions()) rep.conditions.push_back(c.name);
  rep.cells.assign(rep.systems.size(),
                   std::vector<ReportCell>(rep.conditions.size()));

  std::size_t ci = 0;
  for (const auto& cond : eval_conditions()) {
    Rng rng(split_seed(cfg.seed, 105 + ci));
    TrialList trials;
    try {
      trials =
          build_trials(m, Split::Test, cond.domain, cfg.trial_pos,
                       cfg.trial_neg, rng, cond.severity_lo, cond.severity_hi);
    } catch (const std::exception&) {
      // Too few speakers in this severity band: excluded cells, not an
      // error, mirrored as "-" in the report.
      ++ci;
      continue;
    }
    write_trials(cfg.work_dir / "report" / ("trials_" + cond.name + ".txt"),
                 trials);
    for (std::size_t si = 0; si < kSystems.size(); ++si) {
      auto scored = score_trials(trials, tables.at(kSystems[si]));
      write_scores(scores_path(cfg, kSystems[si], cond.name), scored);
      rep.cells[si][ci] = {true, eer(scored).eer};
    }
    ++ci;
  }
  write_report_tsv(report_path(cfg, "tsv"), rep);
  std::ofstream txt(report_path(cfg, "txt"));
  if (!txt) throw std::runtime_error("cannot write report");
  txt << format_report(rep);
  txt.close();
  write_stamp(report_path(cfg, "tsv"), hash);
  write_stamp(report_path(cfg, "txt"), hash);
}

Report load_report(const ExperimentConfig& cfg) {
  std::ifstream in(report_path(cfg, "tsv"));
  if (!in)
    throw std::runtime_error("no report at " +
                             report_path(cfg, "tsv").string());
  Report rep;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty report");
  std::istringstream head(line);
  std::string tok;
  std::getline(head, tok, '\t');  // "system"
  while (std::getline(head, tok, '\t')) rep.conditions.push_back(tok);
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::getline(row, tok, '\t');
    rep.systems.push_back(tok);
    std::vector<ReportCell> cells;
    while (std::getline(row, tok, '\t')) {
      if (tok == "-") cells.push_back({false, 0.0});
      else cells.push_back({true, std::stod(tok) / 100.0});
    }
    rep.cells.push_back(cells);
  }
  return rep;
}

double silhouette(const std::vector<Tensor>& cluster_a,
                  const std::vector<Tensor>& cluster_b) {
  if (cluster_a.size() < 2 || cluster_b.size() < 2)
    throw std::invalid_argument("silhouette: need >= 2 points per cluster");
  auto widen = [](const Tensor& t) {
    std::vector<double> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) v[i] = t[i];
    return v;
  };
  std::vector<std::vector<double>> a, b;
  for (const auto& t : cluster_a) a.push_back(widen(t));
  for (const auto& t : cluster_b) b.push_back(widen(t));
  auto dist = [](const std::vector<double>& x, const std::vector<double>& y) {
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      ss += (x[i] - y[i]) * (x[i] - y[i]);
    return std::sqrt(ss);
  };
  double total = 0.0;
  std::size_t count = 0;
  auto accumulate = [&](const std::vector<std::vector<double>>& own,
                        const std::vector<std::vector<double>>& other) {
    for (std::size_t i = 0; i < own.size(); ++i) {
      double ai = 0.0;
      for (std::size_t j = 0; j < own.size(); ++j)
        if (j != i) ai += dist(own[i], own[j]);
      ai /= double(own.size() - 1);
      double bi = 0.0;
      for (const auto& q : other) bi += dist(own[i], q);
      bi /= double(other.size());
      double denom = std::max(ai, bi);
      total += denom > 0.0 ? (bi - ai) / denom : 0.0;
      ++count;
    }
  };
  accumulate(a, b);
  accumulate(b, a);
  return total / double(count);
}

namespace {

std::vector<ScoredTrial> load_system_scores(const ExperimentConfig& cfg,
                                            const std::string& system,
                                            const std::string& cond) {
  return read_scores(scores_path(cfg, system, cond));
}

double pooled_child_eer(const ExperimentConfig& cfg,
                        const std::string& system) {
  std::vector<ScoredTrial> all;
  for (const auto& cond : eval_conditions()) {
    if (cond.domain != Domain::Child) continue;
    if (!fs::exists(scores_path(cfg, system, cond.name))) continue;
    auto part = load_system_scores(cfg, system, cond.name);
    all.insert(all.end(), part.begin(), part.end());
  }
  return eer(all).eer;
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * v);
  return buf;
}

}  // namespace

PatternSummary reproduce_pattern(const ExperimentConfig& cfg,
                                 bool skip_train) {
  auto run = [&](const char* name, void (*stage)(const ExperimentConfig&)) {
    try {
      stage(cfg);
    } catch (const std::exception& err) {
      throw std::runtime_error(std::string("stage ") + name + ": " +
                               err.what());
    }
  };
  if (skip_train) {
    for (const auto* which : {"adult", "child", "wse", "dc"})
      if (!fs::exists(checkpoint_path(cfg, which)))
        throw std::runtime_error(
            std::string("--skip-train: missing checkpoint ") + which);
  } else {
    run("gen", stage_gen);
    run("train", stage_train);
    run("finetune", stage_finetune);
    run("train-dc", stage_train_dc);
  }
  run("embed", stage_embed);
  run("eval", stage_eval);

  PatternSummary sum;
  sum.report = load_report(cfg);

  double asv_child = pooled_child_eer(cfg, "a_sv");
  double csv_child = pooled_child_eer(cfg, "c_sv");
  double aasv_child = pooled_child_eer(cfg, "aasv");
  double plain_child = pooled_child_eer(cfg, "plain_concat");
  double asv_adult = eer(load_system_scores(cfg, "a_sv", "adult")).eer;
  double csv_adult = eer(load_system_scores(cfg, "c_sv", "adult")).eer;
  double aasv_adult = eer(load_system_scores(cfg, "aasv", "adult")).eer;

  auto check = [&](const std::string& name, bool pass,
                   const std::string& detail) {
    sum.checks.push_back({name, pass, detail});
  };
  check("adult-specialist cross-domain gap >= 10 pts",
        asv_child - asv_adult >= 0.10,
        "a_sv child " + pct(asv_child) + " vs adult " + pct(asv_adult));
  check("fine-tuned model forgets adults by >= 5 pts",
        csv_adult - asv_adult >= 0.05,
        "c_sv adult " + pct(csv_adult) + " vs a_sv adult " + pct(asv_adult));
  double best_child = std::min(asv_child, csv_child);
  double best_adult = std::min(asv_adult, csv_adult);
  check("fused system within 2 pts of best specialist on both domains",
        aasv_child <= best_child + 0.02 && aasv_adult <= best_adult + 0.02,
        "aasv child " + pct(aasv_child) + " (best " + pct(best_child) +
            "), adult " + pct(aasv_adult) + " (best " + pct(best_adult) +
            ")");
  check("posterior weighting beats plain concat on children by >= 2 pts",
        plain_child - aasv_child >= 0.02,
        "plain_concat child " + pct(plain_child) + " vs aasv " +
            pct(aasv_child));
  bool wse_ok = true;
  std::size_t wse_row =
      std::find(sum.report.systems.begin(), sum.report.systems.end(), "wse") -
      sum.report.systems.begin();
  for (const auto& cell : sum.report.cells.at(wse_row))
    wse_ok = wse_ok && cell.present && std::isfinite(cell.eer) &&
             cell.eer >= 0.0 && cell.eer <= 1.0;
  check("weight-space ensemble row is complete and finite", wse_ok,
        "4 cells");

  sum.all_pass = true;
  for (const auto& c : sum.checks) sum.all_pass = sum.all_pass && c.pass;
  return sum;
}

}  // namespace aasv

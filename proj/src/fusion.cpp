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

#include "aasv/fusion.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace aasv {

std::string fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::Aasv: return "aasv";
    case FusionMode::PlainConcat: return "plain_concat";
    case FusionMode::ChildOnly: return "child_only";
    case FusionMode::AdultOnly: return "adult_only";
  }
  throw std::logic_error("unknown fusion mode");
}

FusionMode parse_fusion_mode(const std::string& name) {
  if (name == "aasv") return FusionMode::Aasv;
  if (name == "plain_concat") return FusionMode::PlainConcat;
  if (name == "child_only") return FusionMode::ChildOnly;
  if (name == "adult_only") return FusionMode::AdultOnly;
  throw std::invalid_argument("unknown fusion mode: " + name);
}

namespace {

std::vector<float> normalized(const Tensor& e, const char* which) {
  double ss = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) ss += double(e[i]) * e[i];
  double norm = std::sqrt(ss);
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw std::invalid_argument(std::string("fuse: ") + which +
                                " embedding has zero or non-finite norm");
  std::vector<float> out(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) out[i] = float(e[i] / norm);
  return out;
}

}  // namespace

Tensor fuse(const Tensor& e_child, const Tensor& e_adult,
            const DomainPosterior& p) {
  if (e_child.size() != e_adult.size() || e_child.size() == 0)
    throw std::invalid_argument("fuse: branch dimension mismatch");
  if (!(p.p_child >= 0.0) || !(p.p_adult >= 0.0) ||
      std::abs(p.p_child + p.p_adult - 1.0) > 1e-6)
    throw std::invalid_argument("fuse: posterior must be a distribution");
  auto c = normalized(e_child, "child");
  auto a = normalized(e_adult, "adult");
  std::size_t d = c.size();
  Tensor out({2 * d});
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = float(p.p_child * c[i]);
    out[d + i] = float(p.p_adult * a[i]);
  }
  return out;
}

Tensor plain_concat(const Tensor& e_child, const Tensor& e_adult) {
  Tensor out = fuse(e_child, e_adult, DomainPosterior{0.5, 0.5});
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= 2.0f;
  return out;
}

void write_embeddings(const std::filesystem::path& path,
                      const std::vector<FusedEmbedding>& embeddings) {
  if (embeddings.empty())
    throw std::invalid_argument("write_embeddings: empty set");
  std::size_t d = embeddings.front().values.size();
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path.string());
  std::ofstream side(path.string() + ".jsonl");
  if (!side) throw std::runtime_error("cannot write sidecar for " +
                                      path.string());
  const char magic[8] = {'A', 'A', 'S', 'V', 'E', 'M', 'B', '1'};
  bin.write(magic, 8);
  std::uint32_t n = std::uint32_t(embeddings.size()), dim = std::uint32_t(d);
  bin.write(reinterpret_cast<const char*>(&n), 4);
  bin.write(reinterpret_cast<const char*>(&dim), 4);
  for (const auto& e : embeddings) {
    if (e.values.size() != d)
      throw std::invalid_argument("write_embeddings: mixed dimensions");
    std::uint32_t len = std::uint32_t(e.utterance_id.size());
    bin.write(reinterpret_cast<const char*>(&len), 4);
    bin.write(e.utterance_id.data(), len);
    bin.write(reinterpret_cast<const char*>(e.values.data()),
              std::streamsize(d * sizeof(float)));
    nlohmann::json j{{"utterance_id", e.utterance_id},
                     {"p_child", e.p_child},
                     {"p_adult", e.p_adult}};
    side << j.dump() << '\n';
  }
}

std::vector<FusedEmbedding> read_embeddings(
    const std::filesystem::path& path) {
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot read " + path.string());
  char magic[8];
  bin.read(magic, 8);
  if (!bin || std::string(magic, 8) != "AASVEMB1")
    throw std::runtime_error("bad embedding file magic in " + path.string());
  std::uint32_t n = 0, d = 0;
  bin.read(reinterpret_cast<char*>(&n), 4);
  bin.read(reinterpret_cast<char*>(&d), 4);
  std::vector<FusedEmbedding> out(n);
  for (auto& e : out) {
    std::uint32_t len = 0;
    bin.read(reinterpret_cast<char*>(&len), 4);
    e.utterance_id.resize(len);
    bin.read(e.utterance_id.data(), len);
    e.values = Tensor({d});
    bin.read(reinterpret_cast<char*>(e.values.data()),
             std::streamsize(d * sizeof(float)));
    if (!bin) throw std::runtime_error("truncated embedding file " +
                                       path.string());
  }
  std::ifstream side(path.string() + ".jsonl");
  if (side) {
    std::string line;
    for (auto& e : out) {
      if (!std::getline(side, line)) break;
      auto j = nlohmann::json::parse(line);
      e.p_child = j.value("p_child", 0.5);
      e.p_adult = j.value("p_adult", 0.5);
    }
  }
  return out;
}

}  // namespace aasv

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
#include <filesystem>
#include <map>

#include "doctest.h"

#include "aasv/eval.hpp"
#include "aasv/fusion.hpp"
#include "aasv/rng.hpp"

using namespace aasv;

namespace {

Tensor random_unit(std::size_t d, Rng& rng) {
  Tensor t({d});
  double ss = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    t[i] = float(normal(rng));
    ss += double(t[i]) * t[i];
  }
  double n = std::sqrt(ss);
  for (std::size_t i = 0; i < d; ++i) t[i] = float(t[i] / n);
  return t;
}

double norm(const Tensor& t) {
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) ss += double(t[i]) * t[i];
  return std::sqrt(ss);
}

}  // namespace

TEST_CASE("fuse block order and norm identities") {
  Rng rng(1);
  auto ec = random_unit(8, rng);
  auto ea = random_unit(8, rng);

  SUBCASE("hard child posterior keeps only the first block") {
    auto f = fuse(ec, ea, {1.0, 0.0});
    REQUIRE(f.size() == 16);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(f[i] == doctest::Approx(ec[i]).epsilon(1e-6));
      CHECK(f[8 + i] == 0.0f);
    }
  }

  SUBCASE("uniform posterior gives norm sqrt(0.5)") {
    auto f = fuse(ec, ea, {0.5, 0.5});
    CHECK(norm(f) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-6));
  }

  SUBCASE("(0.6, 0.4) gives norm sqrt(0.52)") {
    auto f = fuse(ec, ea, {0.6, 0.4});
    CHECK(norm(f) == doctest::Approx(std::sqrt(0.52)).epsilon(1e-6));
  }

  SUBCASE("blocks are the weighted inputs") {
    auto f = fuse(ec, ea, {0.7, 0.3});
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(f[i] == doctest::Approx(0.7 * ec[i]).epsilon(1e-6));
      CHECK(f[8 + i] == doctest::Approx(0.3 * ea[i]).epsilon(1e-6));
    }
  }
}

TEST_CASE("fuse validates inputs") {
  Rng rng(2);
  auto ec = random_unit(8, rng);
  auto ea = random_unit(8, rng);
  CHECK_THROWS(fuse(ec, random_unit(4, rng), {0.5, 0.5}));
  CHECK_THROWS(fuse(ec, ea, {0.7, 0.7}));  // not a distribution
  Tensor zero({8});
  CHECK_THROWS(fuse(zero, ea, {0.5, 0.5}));
}

TEST_CASE("plain concat equals twice the uniform fusion") {
  Rng rng(3);
  auto ec = random_unit(8, rng);
  auto ea = random_unit(8, rng);
  auto p = plain_concat(ec, ea);
  auto f = fuse(ec, ea, {0.5, 0.5});
  REQUIRE(p.size() == f.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(p[i] == doctest::Approx(2.0f * f[i]));
  // e_c=(1,0), e_a=(0,1) -> (1,0,0,1).
  Tensor c({2}, {1.0f, 0.0f}), a({2}, {0.0f, 1.0f});
  auto q = plain_concat(c, a);
  CHECK(q[0] == 1.0f);
  CHECK(q[1] == 0.0f);
  CHECK(q[2] == 0.0f);
  CHECK(q[3] == 1.0f);
}

TEST_CASE("decomposition identity on 1000 random draws") {
  // cos(f1, f2) must equal
  // (pc1 pc2 <ec1,ec2> + pa1 pa2 <ea1,ea2>) / (|f1| |f2|).
  Rng rng(4);
  for (int rep = 0; rep < 1000; ++rep) {
    auto ec1 = random_unit(16, rng), ea1 = random_unit(16, rng);
    auto ec2 = random_unit(16, rng), ea2 = random_unit(16, rng);
    double pc1 = uniform(rng, 0.01, 0.99), pc2 = uniform(rng, 0.01, 0.99);
    DomainPosterior p1{pc1, 1.0 - pc1}, p2{pc2, 1.0 - pc2};
    auto f1 = fuse(ec1, ea1, p1);
    auto f2 = fuse(ec2, ea2, p2);
    double direct = cosine(f1, f2);
    double cc = cosine(ec1, ec2), ca = cosine(ea1, ea2);
    double expect = (p1.p_child * p2.p_child * cc +
                     p1.p_adult * p2.p_adult * ca) /
                    (std::sqrt(p1.p_child * p1.p_child +
                               p1.p_adult * p1.p_adult) *
                     std::sqrt(p2.p_child * p2.p_child +
                               p2.p_adult * p2.p_adult));
    CHECK(std::abs(direct - expect) < 1e-6);
  }
}

TEST_CASE("decomposition example: 0.7077") {
  // p1=p2=(0.6,0.4), branch cosines 0.8 and 0.5:
  // (0.36*0.8 + 0.16*0.5)/0.52.
  Tensor ec1({2}, {1.0f, 0.0f});
  Tensor ec2({2}, {0.8f, 0.6f});  // cosine 0.8 with ec1
  Tensor ea1({2}, {1.0f, 0.0f});
  Tensor ea2({2}, {0.5f, float(std::sqrt(0.75))});  // cosine 0.5
  auto f1 = fuse(ec1, ea1, {0.6, 0.4});
  auto f2 = fuse(ec2, ea2, {0.6, 0.4});
  CHECK(cosine(f1, f2) ==
        doctest::Approx((0.36 * 0.8 + 0.16 * 0.5) / 0.52).epsilon(1e-5));
}

TEST_CASE("hard-opposite posteriors score exactly zero") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    auto f1 = fuse(random_unit(8, rng), random_unit(8, rng), {1.0, 0.0});
    auto f2 = fuse(random_unit(8, rng), random_unit(8, rng), {0.0, 1.0});
    CHECK(cosine(f1, f2) == 0.0);
  }
}

TEST_CASE("uniform fusion and plain concat give identical EER") {
  Rng rng(6);
  std::map<std::string, Tensor> fused, concat;
  TrialList trials;
  std::vector<Tensor> ecs, eas;
  for (int i = 0; i < 20; ++i) {
    auto ec = random_unit(8, rng), ea = random_unit(8, rng);
    std::string id = "u" + std::to_string(i);
    fused.emplace(id, fuse(ec, ea, {0.5, 0.5}));
    concat.emplace(id, plain_concat(ec, ea));
  }
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) {
      trials.trials.push_back({(i + j) % 2, "u" + std::to_string(i),
                               "u" + std::to_string(j)});
      ((i + j) % 2 ? trials.n_positive : trials.n_negative)++;
    }
  auto ef = eer(score_trials(trials, fused)).eer;
  auto ec = eer(score_trials(trials, concat)).eer;
  CHECK(ef == doctest::Approx(ec).epsilon(1e-12));
}

TEST_CASE("embedding file round trip with posterior sidecar") {
  namespace fs = std::filesystem;
  Rng rng(7);
  std::vector<FusedEmbedding> embs;
  for (int i = 0; i < 5; ++i) {
    double pc = uniform(rng, 0.0, 1.0);
    embs.push_back({"utt_" + std::to_string(i),
                    fuse(random_unit(4, rng), random_unit(4, rng),
                         {pc, 1.0 - pc}),
                    pc, 1.0 - pc});
  }
  auto path = fs::temp_directory_path() / "aasv_emb_test.emb";
  write_embeddings(path, embs);
  auto back = read_embeddings(path);
  REQUIRE(back.size() == embs.size());
  for (std::size_t i = 0; i < embs.size(); ++i) {
    CHECK(back[i].utterance_id == embs[i].utterance_id);
    CHECK(back[i].p_child == doctest::Approx(embs[i].p_child));
    for (std::size_t j = 0; j < embs[i].values.size(); ++j)
      CHECK(back[i].values[j] == embs[i].values[j]);
  }
  fs::remove(path);
  fs::remove(path.string() + ".jsonl");
}

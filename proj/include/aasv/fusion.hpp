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

#ifndef AASV_FUSION_HPP
#define AASV_FUSION_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "aasv/domain.hpp"
#include "aasv/tensor.hpp"

namespace aasv {

enum class FusionMode { Aasv, PlainConcat, ChildOnly, AdultOnly };

std::string fusion_mode_name(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& name);

// Posterior-weighted concatenation: inputs are L2-normalized, output is
// [p_child * e_child ; p_adult * e_adult] with dimension 2d. Its norm is
// sqrt(p_child^2 + p_adult^2), so fused cosines decompose as
// (p_c^2 cos_c + p_a^2 cos_a) / ... over the per-branch cosines.
Tensor fuse(const Tensor& e_child, const Tensor& e_adult,
            const DomainPosterior& p);

// Unweighted variant: fuse with p_child = p_adult = 0.5, rescaled by 2
// (both branch weights 1).
Tensor plain_concat(const Tensor& e_child, const Tensor& e_adult);

/// One fused embedding with the posterior that produced it.
struct FusedEmbedding {
  std::string utterance_id;
  Tensor values;
  double p_child = 0.5;
  double p_adult = 0.5;
};

// Binary embedding matrix keyed by utterance id, with a JSON-lines
// sidecar recording the posterior used per utterance.
void write_embeddings(const std::filesystem::path& path,
                      const std::vector<FusedEmbedding>& embeddings);
std::vector<FusedEmbedding> read_embeddings(const std::filesystem::path& path);

}  // namespace aasv

#endif  // AASV_FUSION_HPP

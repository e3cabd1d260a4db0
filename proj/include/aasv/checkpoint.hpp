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

#ifndef AASV_CHECKPOINT_HPP
#define AASV_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "aasv/tensor.hpp"

namespace aasv {

// Model checkpoint: magic "AASVCKPT", u32 header length, JSON header
// (architecture descriptor, format version, seed, epoch, tensor
// name/shape table), then concatenated little-endian f32 blobs in
// header-declared order.
struct Checkpoint {
  nlohmann::json header;  // everything except the tensor table
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aasv

#endif  // AASV_CHECKPOINT_HPP

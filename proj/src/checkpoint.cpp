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

#include "aasv/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace aasv {

namespace {
constexpr char kMagic[8] = {'A', 'A', 'S', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
}  // namespace

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw std::out_of_range("checkpoint tensor not found: " + name);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  nlohmann::json header = ck.header;
  header["format_version"] = kFormatVersion;
  auto& table = header["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : ck.tensors)
    table.push_back({{"name", name}, {"shape", t.shape()}});
  const std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  os.write(kMagic, 8);
  const std::uint32_t hlen = std::uint32_t(hs.size());
  os.write(reinterpret_cast<const char*>(&hlen), 4);
  os.write(hs.data(), std::streamsize(hs.size()));
  for (const auto& [name, t] : ck.tensors)
    os.write(reinterpret_cast<const char*>(t.data()),
             std::streamsize(t.size() * sizeof(float)));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path.string());
  std::uint32_t hlen = 0;
  is.read(reinterpret_cast<char*>(&hlen), 4);
  std::string hs(hlen, '\0');
  is.read(hs.data(), hlen);
  Checkpoint ck;
  ck.header = nlohmann::json::parse(hs);
  if (ck.header.at("format_version") != kFormatVersion)
    throw std::runtime_error("load_checkpoint: unsupported format version");
  for (const auto& entry : ck.header.at("tensors")) {
    std::vector<std::size_t> shape = entry.at("shape");
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            std::streamsize(t.size() * sizeof(float)));
    ck.tensors.emplace_back(entry.at("name"), std::move(t));
  }
  if (!is) throw std::runtime_error("load_checkpoint: truncated file");
  ck.header.erase("tensors");
  return ck;
}

}  // namespace aasv

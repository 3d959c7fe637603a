// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "resnerf/errors.hpp"

namespace resnerf {

namespace {
constexpr const char* kFormatTag = "resnerf-checkpoint";
constexpr int kFormatVersion = 1;
}  // namespace

void Checkpoint::add(std::string name, Tensor t) {
  if (!t.defined()) throw DataError("checkpoint: undefined tensor for '" + name + "'");
  tensors.push_back(Entry{std::move(name), std::move(t)});
}

const Tensor* Checkpoint::find(std::string_view name) const {
  for (const Entry& e : tensors) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

const Tensor& Checkpoint::at(std::string_view name) const {
  const Tensor* t = find(name);
  if (!t) throw DataError("checkpoint: missing tensor '" + std::string(name) + "'");
  return *t;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  nlohmann::json header;
  header["format"] = kFormatTag;
  header["version"] = kFormatVersion;
  header["dtype"] = "f32";
  header["config"] = ckpt.config.is_null() ? nlohmann::json::object() : ckpt.config;
  auto& list = header["tensors"] = nlohmann::json::array();
  for (const auto& e : ckpt.tensors) {
    list.push_back({{"name", e.name}, {"shape", e.tensor.shape()}});
  }
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open '" + path.string() + "' for writing");
  const std::uint64_t len = header_str.size();
  char len_bytes[8];
  for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(len_bytes, 8);
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  std::vector<float> buf;
  for (const auto& e : ckpt.tensors) {
    buf.resize(static_cast<std::size_t>(e.tensor.numel()));
    const auto vals = e.tensor.values();
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(vals[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw DataError("checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open '" + path.string() + "'");
  char len_bytes[8];
  in.read(len_bytes, 8);
  if (!in) throw DataError("checkpoint: truncated header length in '" + path.string() + "'");
  std::uint64_t len = 0;
  for (int i = 0; i < 8; ++i) {
    len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
  }
  if (len == 0 || len > (1u << 26)) {
    throw DataError("checkpoint: implausible header size in '" + path.string() + "'");
  }
  std::string header_str(len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("checkpoint: truncated header in '" + path.string() + "'");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint: bad header JSON in '" + path.string() + "': " + e.what());
  }
  if (header.value("format", "") != kFormatTag) {
    throw DataError("checkpoint: '" + path.string() + "' is not a " + kFormatTag + " file");
  }
  if (header.value("dtype", "") != "f32") {
    throw DataError("checkpoint: unsupported dtype in '" + path.string() + "'");
  }

  Checkpoint ckpt;
  ckpt.config = header.value("config", nlohmann::json::object());
  std::vector<float> buf;
  for (const auto& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    if (n < 0) throw DataError("checkpoint: bad shape for tensor '" + name + "'");
    buf.resize(static_cast<std::size_t>(n));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw DataError("checkpoint: truncated payload for tensor '" + name + "'");
    std::vector<Real> vals(buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i) vals[i] = static_cast<Real>(buf[i]);
    ckpt.add(name, make_tensor(shape, std::move(vals), false));
  }
  return ckpt;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("digest: cannot open '" + path.string() + "'");
  std::uint64_t h = 1469598103934665603ull;
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace resnerf

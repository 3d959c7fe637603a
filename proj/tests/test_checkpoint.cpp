// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "resnerf/checkpoint.hpp"
#include "resnerf/rng.hpp"

using namespace resnerf;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  fs::path dir = fs::temp_directory_path() / "resnerf_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("checkpoint round-trips tensors and config") {
  Checkpoint ckpt;
  RngStream rng(3, "ckpt");
  std::vector<Real> w(12);
  for (Real& v : w) v = rng.uniform(-1, 1);
  ckpt.add("layer.weight", make_tensor({3, 4}, w, true));
  ckpt.add("layer.bias", Tensor::from_values({4}, {0, 1, 2, 3}));
  ckpt.config = {{"width", 64}, {"name", "bg"}};

  const fs::path path = temp_file("roundtrip.ckpt");
  save_checkpoint(ckpt, path);
  Checkpoint loaded = load_checkpoint(path);

  REQUIRE(loaded.tensors.size() == 2);
  CHECK(loaded.tensors[0].name == "layer.weight");
  CHECK(loaded.at("layer.weight").shape() == std::vector<int>{3, 4});
  for (int i = 0; i < 12; ++i) {
    CHECK(loaded.at("layer.weight").values()[i] ==
          doctest::Approx(w[i]).epsilon(1e-7));
  }
  CHECK(loaded.at("layer.bias").values()[2] == Real(2));
  CHECK(loaded.config["width"] == 64);
  CHECK(loaded.config["name"] == "bg");
  // Loaded tensors are plain data, not graph leaves.
  CHECK_FALSE(loaded.at("layer.weight").requires_grad());
  CHECK(loaded.find("missing") == nullptr);
  CHECK_THROWS_AS(ckpt.at("missing"), DataError);
}

TEST_CASE("checkpoint save is byte-stable") {
  Checkpoint ckpt;
  ckpt.add("t", Tensor::from_values({2, 2}, {1, 2, 3, 4}));
  ckpt.config = {{"k", 1}};
  const fs::path p1 = temp_file("stable1.ckpt");
  const fs::path p2 = temp_file("stable2.ckpt");
  save_checkpoint(ckpt, p1);
  save_checkpoint(ckpt, p2);
  CHECK(file_digest(p1) == file_digest(p2));

  Checkpoint loaded = load_checkpoint(p1);
  const fs::path p3 = temp_file("stable3.ckpt");
  loaded.config = nlohmann::json{{"k", 1}};
  save_checkpoint(loaded, p3);
  CHECK(file_digest(p1) == file_digest(p3));
}

TEST_CASE("checkpoint rejects malformed files") {
  const fs::path path = temp_file("garbage.ckpt");
  {
    std::ofstream out(path, std::ios::binary);
    out << "this is not a checkpoint at all, just some text padding";
  }
  CHECK_THROWS_AS(load_checkpoint(path), DataError);
  CHECK_THROWS_AS(load_checkpoint(temp_file("does_not_exist.ckpt")), DataError);

  // Valid header, truncated payload.
  Checkpoint ckpt;
  ckpt.add("t", Tensor::full({128}, 7));
  const fs::path full = temp_file("full.ckpt");
  save_checkpoint(ckpt, full);
  const fs::path cut = temp_file("cut.ckpt");
  {
    std::ifstream in(full, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    std::ofstream out(cut, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 64));
  }
  CHECK_THROWS_AS(load_checkpoint(cut), DataError);
}

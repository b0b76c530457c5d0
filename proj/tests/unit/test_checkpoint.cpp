#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "adatag/checkpoint.hpp"
#include "adatag/error.hpp"
#include "adatag/evaluation.hpp"
#include "fixtures.hpp"

using namespace adatag;
namespace fs = std::filesystem;

TEST_CASE("round trip is bit exact for every variant") {
  testing::TempDir dir("checkpoint");
  for (const Variant v : testing::all_variants()) {
    CAPTURE(to_string(v));
    const Model m = testing::tiny_model(v, 4);
    const auto path = dir.path / to_string(v);
    checkpoint::save(m, path);
    const Model back = checkpoint::load(fs::path(path).concat(".json"));
    CHECK(to_key_values(back.config()) == to_key_values(m.config()));
    CHECK(back.words().words() == m.words().words());
    CHECK(back.attributes().ids() == m.attributes().ids());
    for (const auto& p : m.params().all()) {
      const auto& q = back.params().at(p.name);
      CHECK(q.value.values() == p.value.values());
      CHECK(q.frozen == p.frozen);
      CHECK(q.group == p.group);
    }
    const auto ex = testing::tiny_examples();
    CHECK(eval::score(eval::predict(back, ex)).macro_f1() == eval::score(eval::predict(m, ex)).macro_f1());
  }
}

TEST_CASE("same model gives identical files") {
  testing::TempDir dir("checkpoint_det");
  checkpoint::save(testing::tiny_model(Variant::kAdaTag, 9), dir.path / "a");
  checkpoint::save(testing::tiny_model(Variant::kAdaTag, 9), dir.path / "b");
  CHECK(io::read_file(dir.path / "a.bin") == io::read_file(dir.path / "b.bin"));
  std::string ma = io::read_file(dir.path / "a.json");
  const std::string mb = io::read_file(dir.path / "b.json");
  ma.replace(ma.find("\"a.bin\""), 7, "\"b.bin\"");
  CHECK(ma == mb);
}

TEST_CASE("truncated or corrupted payloads are rejected") {
  testing::TempDir dir("checkpoint_bad");
  const auto stem = dir.path / "m";
  checkpoint::save(testing::tiny_model(Variant::kBiLstmMultiCrf), stem);
  const auto bin = fs::path(stem).concat(".bin");
  const auto size = fs::file_size(bin);
  fs::resize_file(bin, size - 4);
  try {
    checkpoint::load(stem);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
  }
  fs::resize_file(bin, size);
  CHECK_THROWS_AS(checkpoint::load(stem), DataError);  // zero bytes: hash mismatch
}

TEST_CASE("architecture and version mismatches are rejected") {
  testing::TempDir dir("checkpoint_cfg");
  const auto stem = dir.path / "m";
  const Model m = testing::tiny_model(Variant::kAdaTag);
  checkpoint::save(m, stem);
  TrainConfig other = m.config();
  CHECK_NOTHROW(checkpoint::load(stem, &other));
  other.d_h = 8;
  try {
    checkpoint::load(stem, &other);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("d_h=4") != std::string::npos);
  }

  const auto manifest = fs::path(stem).concat(".json");
  std::string text = io::read_file(manifest);
  const auto pos = text.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"format_version\": 2");
  std::ofstream(manifest) << text;
  CHECK_THROWS_AS(checkpoint::load(stem), DataError);
}

TEST_CASE("stem handling") {
  CHECK(checkpoint::stem("a/b.json") == fs::path("a/b"));
  CHECK(checkpoint::stem("a/b.bin") == fs::path("a/b"));
  CHECK(checkpoint::stem("a/b") == fs::path("a/b"));
}

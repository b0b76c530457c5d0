#include <doctest.h>

#include <sstream>

#include "adatag/attribute_embeddings.hpp"
#include "adatag/error.hpp"
#include "helpers.hpp"

using namespace adatag;
using namespace adatag::attributes;

namespace {

io::WordVectors vectors() {
  io::WordVectors v;
  v.dim = 2;
  v.table["skin"] = {1, 0};
  v.table["type"] = {0, 1};
  v.table["dry"] = {2, 2};
  v.table["sensitive"] = {4, 0};
  v.table["oily"] = {0, 4};
  return v;
}

}  // namespace

TEST_CASE("instances are collected per labelled span") {
  const auto vocab = corpus::parse_vocab(R"(["SkinType", "Color"])");
  const std::vector<corpus::LabeledExample> train{
      testing::example("a", "SkinType", "Cream for Dry , Sensitive Skin", {"dry", "sensitive"}),
      testing::example("b", "SkinType", "Gel for Oily Skin", {"oily"}),
      testing::example("c", "Color", "Black mug", {"black"})};
  const auto inst = collect_instances(train, "SkinType", vocab);
  REQUIRE(inst.size() == 3);
  CHECK(inst[0].phrase == "Skin Type");
  CHECK(inst[0].value == "Dry");
  CHECK(inst[2].value == "Oily");
  CHECK(inst[2].source == &train[1]);
}

TEST_CASE("static phrase embeddings skip unknown words") {
  const auto v = vectors();
  CHECK(static_phrase_embedding("Skin Type", v) == std::vector<double>{0.5, 0.5});
  CHECK(static_phrase_embedding("Skin Tone", v) == std::vector<double>{1, 0});
  CHECK(static_phrase_embedding("Tone", v) == std::vector<double>{0, 0});
}

TEST_CASE("mean pooling is order independent") {
  const std::vector<std::vector<double>> a{{0.1, 0.7}, {0.2, 1e-17}, {0.3, -0.7}};
  const std::vector<std::vector<double>> b{a[2], a[0], a[1]};
  CHECK(mean_pool(a, 2) == mean_pool(b, 2));
  CHECK(mean_pool({}, 3) == std::vector<double>{0, 0, 0});
}

TEST_CASE("uncontextualized attribute embedding") {
  const auto vocab = corpus::parse_vocab(R"(["SkinType", "Color"])");
  const std::vector<corpus::LabeledExample> train{
      testing::example("a", "SkinType", "Cream for Dry , Sensitive Skin", {"dry", "sensitive"}),
      testing::example("b", "SkinType", "Gel for Oily Skin", {"oily"})};
  bool flagged = true;
  const auto r = uncontextualized_embedding("SkinType", train, vocab, vectors(), &flagged);
  CHECK_FALSE(flagged);
  REQUIRE(r.size() == 4);
  CHECK(r[0] == 0.5);
  CHECK(r[2] == doctest::Approx(2.0));
  CHECK(r[3] == doctest::Approx(2.0));

  const auto table = uncontextualized_table(train, vocab, vectors());
  CHECK(table.dim() == 4);
  CHECK(table.provenance() == Provenance::kUncontextualized);
  CHECK(table.flagged().count("Color") == 1);
  CHECK(table.get("Color")[2] == 0.0);
  const Tensor m = table.matrix(vocab);
  CHECK(m.shape() == Shape{2, 4});
  CHECK(m.at(0, 2) == r[2]);
}

TEST_CASE("contextualized ingestion pools name and value vectors") {
  std::istringstream in(
      R"({"attribute": "Scent", "name_vec": [1, 0], "value_vec": [2, 2]})" "\n"
      R"({"attribute": "Scent", "name_vec": [3, 0], "value_vec": [0, 2]})" "\n");
  const auto t = ingest_contextualized(in);
  CHECK(t.dim() == 4);
  CHECK(t.get("Scent") == std::vector<double>{2, 0, 1, 2});

  std::istringstream bad(
      R"({"attribute": "Scent", "name_vec": [1, 0], "value_vec": [2, 2]})" "\n"
      R"({"attribute": "Color", "name_vec": [1], "value_vec": [2, 2]})" "\n");
  try {
    ingest_contextualized(bad);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("tables round trip and random tables are seeded") {
  const auto vocab = corpus::parse_vocab(R"(["A", "B"])");
  const auto t = random_table(vocab, 5, 9);
  CHECK_FALSE(t.frozen());
  CHECK(t.provenance() == Provenance::kRandom);
  for (double v : t.get("A")) CHECK(std::abs(v) <= 0.1);
  CHECK(random_table(vocab, 5, 9).get("B") == t.get("B"));
  CHECK(random_table(vocab, 5, 10).get("B") != t.get("B"));

  std::stringstream buf;
  write_table(t, buf);
  const auto back = read_table(buf);
  CHECK(back.get("A") == t.get("A"));
  CHECK(back.provenance() == Provenance::kRandom);
  CHECK_THROWS_AS(t.matrix(corpus::parse_vocab(R"(["A", "C"])")), DataError);
  AttributeEmbeddingTable narrow(3, Provenance::kContextualized, true);
  CHECK_THROWS_AS(narrow.set("A", {1, 2}), DataError);
}

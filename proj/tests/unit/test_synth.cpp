#include <doctest.h>

#include <fstream>
#include <sstream>

#include "adatag/corpus.hpp"
#include "adatag/error.hpp"
#include "adatag/synth.hpp"
#include "helpers.hpp"

using namespace adatag;

namespace {

const char* kSpec = R"({
  "seed": 4, "vector_dim": 8,
  "attributes": [
    {"id": "SkinType", "train": 6, "dev": 2, "test": 3,
     "values": ["Dry", "Oily", "Sensitive"],
     "templates": ["Cream for {value} and {value} Skin", "{value} Skin Serum"]},
    {"id": "Color", "train": 4, "values": ["Navy Blue"], "templates": ["Mug in {value}"]}
  ]
})";

}  // namespace

TEST_CASE("generation follows the spec") {
  const auto data = synth::generate(synth::parse_spec(kSpec));
  CHECK(data.products.size() == 15);
  CHECK(data.splits.train.size() == 10);
  CHECK(data.splits.dev.size() == 2);
  CHECK(data.splits.test.size() == 3);
  CHECK(data.vocab.phrase("SkinType") == "Skin Type");
  for (const auto& p : data.products) {
    REQUIRE(p.gold_values.size() == 1);
    const auto& [attr, values] = *p.gold_values.begin();
    for (const auto& v : values) CHECK(p.title.find(v) != std::string::npos);
    if (p.title.rfind("Cream", 0) == 0) {
      CHECK(values.size() == 2);
      CHECK(values[0] != values[1]);
    }
  }
  CHECK(data.vectors.dim == 8);
  CHECK(data.vectors.find("navy") != nullptr);
  CHECK(data.vectors.find("Navy") != nullptr);
}

TEST_CASE("generation is seeded and word vectors depend only on the word") {
  const auto a = synth::generate(synth::parse_spec(kSpec));
  const auto b = synth::generate(synth::parse_spec(kSpec));
  for (std::size_t i = 0; i < a.products.size(); ++i) CHECK(a.products[i].title == b.products[i].title);
  auto spec = synth::parse_spec(kSpec);
  spec.attributes.erase(spec.attributes.begin());
  const auto c = synth::generate(spec);
  CHECK(*c.vectors.find("Blue") == *a.vectors.find("Blue"));
}

TEST_CASE("written files label cleanly") {
  testing::TempDir dir("synth");
  const auto data = synth::generate(synth::parse_spec(kSpec));
  synth::write_dataset(data, dir.path);
  std::ifstream in(dir.path / "products.jsonl");
  const auto parsed = corpus::parse_products(in);
  CHECK(parsed.errors.empty());
  const auto built = corpus::build_corpus(parsed.products, corpus::load_vocab(dir.path / "vocab.json"), {});
  CHECK(built.examples.size() == 15);
  CHECK(built.report.unmatched_values == 0);
  CHECK(corpus::load_splits(dir.path / "splits.json").test == data.splits.test);
  CHECK(io::load_word_vectors(dir.path / "vectors.txt").table.size() == data.vectors.table.size());
}

TEST_CASE("bad specs") {
  CHECK_THROWS_AS(synth::parse_spec("{}"), DataError);
  CHECK_THROWS_AS(synth::parse_spec(R"({"attributes": [{"id": "A", "values": ["x"], "templates": ["no slot"]}]})"),
                  DataError);
  CHECK_THROWS_AS(synth::parse_spec(R"({"attributes": [{"id": "A", "values": [], "templates": ["{value}"]}]})"),
                  DataError);
}

#pragma once

#include <string>
#include <vector>

#include "adatag/attribute_embeddings.hpp"
#include "adatag/model.hpp"
#include "helpers.hpp"

namespace testing {

inline std::vector<adatag::corpus::LabeledExample> tiny_examples() {
  return {
      example("p1", "Scent", "Lavender body wash , 16 oz", {"lavender"}),
      example("p1", "Size", "Lavender body wash , 16 oz", {"16 oz"}),
      example("p2", "Scent", "Cherry Pie scented candle", {"cherry pie"}),
      example("p3", "Color", "Black ceramic mug", {"black"}),
      example("p4", "Size", "Travel mug 12 oz , Black", {"12 oz"}),
      example("p4", "Color", "Travel mug 12 oz , Black", {"black"}),
  };
}

inline adatag::corpus::AttributeVocab tiny_vocab() {
  return adatag::corpus::parse_vocab(R"(["Scent", "Size", "Color"])");
}

inline adatag::attributes::AttributeEmbeddingTable tiny_table(std::size_t d_r, std::uint64_t seed = 5) {
  adatag::Rng rng(seed);
  adatag::attributes::AttributeEmbeddingTable t(d_r, adatag::attributes::Provenance::kContextualized, true);
  for (const auto& id : tiny_vocab().ids()) {
    std::vector<double> v(d_r);
    for (double& x : v) x = rng.uniform(-1, 1);
    t.set(id, v);
  }
  return t;
}

inline adatag::TrainConfig tiny_config(adatag::Variant variant, std::uint64_t seed = 1) {
  adatag::TrainConfig c;
  c.variant = variant;
  c.d_word = 5;
  c.d_h = 4;
  c.d_r = variant == adatag::Variant::kAdaTagRandomEmb ? 6 : 0;
  c.k = 2;
  c.seed = seed;
  c.batch_size = 4;
  return c;
}

inline adatag::Model tiny_model(adatag::Variant variant, std::uint64_t seed = 1) {
  const auto table = tiny_table(6);
  return adatag::Model::build(tiny_config(variant, seed),
                              adatag::encoder::WordVocab::from_examples(tiny_examples()), tiny_vocab(),
                              &table, nullptr);
}

inline const std::vector<adatag::Variant>& all_variants() {
  static const std::vector<adatag::Variant> v{
      adatag::Variant::kAdaTag,     adatag::Variant::kAdaTagRandomEmb, adatag::Variant::kBiLstmMultiCrf,
      adatag::Variant::kNTagSets,   adatag::Variant::kPerAttribute,    adatag::Variant::kSharedEmb};
  return v;
}

}  // namespace testing

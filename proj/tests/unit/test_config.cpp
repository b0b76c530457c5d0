#include <doctest.h>

#include "adatag/config.hpp"
#include "adatag/error.hpp"

using namespace adatag;

TEST_CASE("defaults follow the reference hyperparameters") {
  const TrainConfig c;
  CHECK(c.d_h == 200);
  CHECK(c.d_word == 50);
  CHECK(c.k == 3);
  CHECK(c.batch_size == 32);
  CHECK(c.learning_rate == 1e-3);
  CHECK(c.beta1 == 0.9);
  CHECK(c.beta2 == 0.999);
  CHECK(c.epsilon == 1e-8);
  CHECK(c.patience == 3);
  CHECK(c.max_epochs == 100);
}

TEST_CASE("key/value round trip") {
  TrainConfig c;
  c.variant = Variant::kSharedEmb;
  c.learning_rate = 0.0003;
  c.attributes = {"Scent", "Color"};
  c.setting = corpus::SourceField::kTitlePlusBullets;
  const auto kv = to_key_values(c);
  CHECK(std::stod(kv.at("learning_rate")) == 0.0003);
  const TrainConfig back = from_key_values(parse_key_values(format_key_values(kv)));
  CHECK(to_key_values(back) == kv);
  CHECK(back.attributes == c.attributes);
}

TEST_CASE("parsing keeps base values and rejects unknown keys") {
  const auto kv = parse_key_values("# comment\n d_h = 50 \n\nseed=7 # trailing\n");
  const TrainConfig c = from_key_values(kv);
  CHECK(c.d_h == 50);
  CHECK(c.seed == 7);
  CHECK(c.k == 3);
  CHECK_THROWS_AS(from_key_values({{"hidden", "3"}}), DataError);
  CHECK_THROWS_AS(from_key_values({{"d_h", "abc"}}), DataError);
  CHECK_THROWS_AS(parse_key_values("no equals sign"), DataError);
}

TEST_CASE("validation") {
  TrainConfig c;
  c.d_h = 7;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.patience = 0;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.learning_rate = -1;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = {};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("variants and presets") {
  CHECK(parse_variant("n_tag_sets") == Variant::kNTagSets);
  try {
    parse_variant("crf");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("bilstm_multicrf") != std::string::npos);
  }
  CHECK(is_preset("adatag_default"));
  CHECK(preset("adatag_default").d_r == 1536);
  CHECK(preset("adatag_random_default").variant == Variant::kAdaTagRandomEmb);
  CHECK(preset("n_tag_sets_default").num_attributes == 12);
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), Error);
}

#include <doctest.h>

#include <set>

#include "adatag/crf.hpp"
#include "adatag/error.hpp"
#include "adatag/model.hpp"
#include "fixtures.hpp"

using namespace adatag;

namespace {

std::set<std::string> names(const ParamStore& s) {
  std::set<std::string> out;
  for (const auto& p : s.all()) out.insert(p.name);
  return out;
}

std::size_t count_of(const ParamCount& c, const std::string& name) {
  for (const auto& t : c.tensors) {
    if (t.name == name) return t.count;
  }
  return 0;
}

}  // namespace

TEST_CASE("adatag parameters split into encoder, hyper and moe groups") {
  const Model m = testing::tiny_model(Variant::kAdaTag);
  const auto counts = param_count(m.params());
  CHECK(counts.groups.count("encoder") == 1);
  CHECK(counts.groups.count("hyper") == 1);
  CHECK(counts.groups.count("moe") == 1);
  CHECK(counts.groups.count("attribute") == 1);
  CHECK(counts.groups.count("decoder") == 0);
  CHECK(m.params().at("attribute.W_att").frozen);
  CHECK(m.params().at("hyper.W_hyper_w").value.shape() == Shape{16, 6});
  CHECK(m.params().at("moe.T_experts").value.shape() == Shape{2, 4, 4});
  CHECK(counts.trainable == counts.total - 18);
}

TEST_CASE("full-scale parameter counts from a config") {
  const auto c = param_count(preset("adatag_default"));
  CHECK(count_of(c, "hyper.W_hyper_w") == 1228800);
  TrainConfig k3 = preset("adatag_default");
  CHECK(count_of(param_count(k3), "moe.T_experts") == 48);
  const auto n = param_count(preset("n_tag_sets_default"));
  CHECK(count_of(n, "crf.T") == 1369);
  TrainConfig no_dr = preset("adatag_default");
  no_dr.d_r = 0;
  CHECK_THROWS_AS(param_count(no_dr), DataError);
}

TEST_CASE("baseline layouts") {
  SUBCASE("multicrf has one encoder and a CRF triple per attribute") {
    const Model m = testing::tiny_model(Variant::kBiLstmMultiCrf);
    const auto n = names(m.params());
    for (const auto& a : {"Scent", "Size", "Color"}) {
      for (const auto& p : {"W", "b", "T"}) CHECK(n.count("crf." + std::string(a) + "." + p) == 1);
    }
    CHECK(n.count("encoder.W_word") == 1);
    CHECK(n.count("encoder.lstm_fwd.W") == 1);
    CHECK(m.params().size() == 5 + 9);
  }
  SUBCASE("n tag sets decode 3N+1 tags with one head") {
    const Model m = testing::tiny_model(Variant::kNTagSets);
    CHECK(m.num_tags() == 10);
    CHECK(m.num_heads() == 1);
    CHECK(m.params().at("crf.T").value.shape() == Shape{10, 10});
  }
  SUBCASE("per-attribute models share nothing") {
    const Model m = testing::tiny_model(Variant::kPerAttribute);
    const auto n = names(m.params());
    CHECK(n.count("encoder.W_word") == 0);
    CHECK(n.count("encoder.Size.W_word") == 1);
    CHECK(n.count("encoder.Size.lstm_bwd.b") == 1);
    CHECK(m.params().size() == 3 * 8);
  }
  SUBCASE("shared embedding variant shares only W_word") {
    const Model m = testing::tiny_model(Variant::kSharedEmb);
    const auto n = names(m.params());
    CHECK(n.count("encoder.W_word") == 1);
    CHECK(n.count("encoder.Color.lstm_fwd.W") == 1);
    CHECK(m.params().size() == 1 + 3 * 7);
  }
}

TEST_CASE("initialization is seeded and float32-representable") {
  const Model a = testing::tiny_model(Variant::kAdaTag, 3);
  const Model b = testing::tiny_model(Variant::kAdaTag, 3);
  const Model c = testing::tiny_model(Variant::kAdaTag, 4);
  for (const auto& p : a.params().all()) {
    CHECK(p.value.values() == b.params().at(p.name).value.values());
    for (double v : p.value.data()) CHECK(v == static_cast<double>(static_cast<float>(v)));
  }
  CHECK(a.params().at("hyper.W_hyper_w").value.values() != c.params().at("hyper.W_hyper_w").value.values());
  const double s = 1.0 / std::sqrt(6.0);
  for (double v : a.params().at("hyper.W_hyper_w").value.data()) CHECK(std::abs(v) <= s);
  for (double v : a.params().at("encoder.W_word").value.row(0)) CHECK(v == 0.0);
}

TEST_CASE("plain and graph paths agree for every variant") {
  const auto examples = testing::tiny_examples();
  for (const Variant v : testing::all_variants()) {
    CAPTURE(to_string(v));
    const Model m = testing::tiny_model(v);
    const auto items = m.prepare(examples);
    REQUIRE(!items.empty());
    for (const auto& item : items) {
      ad::Graph g;
      const auto hv = m.head_vars(g, item.head);
      const auto h = m.encode(g, item.attribute, item.words);
      const double graph_nll =
          crf::nll(decoder::emissions(h, hv.weight, hv.bias), hv.transitions, item.tags).value().item();
      const auto inst = m.head_instance(item.head);
      const Tensor P = decoder::emissions(m.encode(item.attribute, item.words), inst.weight, inst.bias);
      CHECK(graph_nll == doctest::Approx(crf::nll(P, inst.transitions, item.tags)).epsilon(1e-13));
    }
  }
}

TEST_CASE("joint tag-set items merge sentences") {
  const Model m = testing::tiny_model(Variant::kNTagSets);
  std::size_t dropped = 0;
  const auto items = m.prepare(testing::tiny_examples(), &dropped);
  CHECK(items.size() == 4);
  CHECK(dropped == 0);
  const auto& set = *m.tag_set();
  // "Travel mug 12 oz , Black": Size then Color.
  CHECK(items[3].tags == set.parse_sequence("O O B-Size E-Size O B-Color"));
  CHECK(m.predict_tags(2, testing::tiny_examples()[5].tokens).size() == 6);
}

TEST_CASE("examples outside the model are skipped; subsets restrict attributes") {
  TrainConfig c = testing::tiny_config(Variant::kBiLstmMultiCrf);
  c.attributes = {"Color"};
  const Model m = Model::build(c, encoder::WordVocab::from_examples(testing::tiny_examples()),
                               testing::tiny_vocab(), nullptr, nullptr);
  CHECK(m.attributes().ids() == std::vector<std::string>{"Color"});
  CHECK(m.prepare(testing::tiny_examples()).size() == 2);
  CHECK_THROWS_AS(m.attribute_index("Scent"), DataError);
}

TEST_CASE("trainable parameters") {
  Model m = testing::tiny_model(Variant::kPerAttribute);
  const auto scent = m.trainable_parameters(0);
  CHECK(scent.size() == 8);
  for (const auto* p : scent) CHECK(p->name.find(".Scent.") != std::string::npos);
  Model a = testing::tiny_model(Variant::kAdaTag);
  for (const auto* p : a.trainable_parameters()) CHECK(p->name != "attribute.W_att");
  Model r = testing::tiny_model(Variant::kAdaTagRandomEmb);
  bool has_att = false;
  for (const auto* p : r.trainable_parameters()) has_att |= p->name == "attribute.W_att";
  CHECK(has_att);
}

TEST_CASE("the adaptive decoder needs an attribute table") {
  CHECK_THROWS_AS(Model::build(testing::tiny_config(Variant::kAdaTag), encoder::WordVocab(),
                               testing::tiny_vocab(), nullptr, nullptr),
                  DataError);
  const auto table = testing::tiny_table(6);
  TrainConfig c = testing::tiny_config(Variant::kAdaTag);
  c.d_r = 8;
  CHECK_THROWS_AS(Model::build(c, encoder::WordVocab(), testing::tiny_vocab(), &table, nullptr), DataError);
}

TEST_CASE("constructor validates tensors against the layout") {
  Model m = testing::tiny_model(Variant::kBiLstmMultiCrf);
  ParamStore store;
  for (const auto& p : m.params().all()) {
    Tensor v = p.name == "crf.Size.T" ? Tensor({3, 3}) : p.value;
    store.add(p.name, p.group, v, p.frozen);
  }
  CHECK_THROWS_AS(Model(m.config(), m.words(), m.attributes(), std::move(store)), DataError);
}

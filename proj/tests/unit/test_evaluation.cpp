#include <doctest.h>

#include <sstream>

#include "adatag/error.hpp"
#include "adatag/evaluation.hpp"
#include "fixtures.hpp"

using namespace adatag;
using namespace adatag::eval;

TEST_CASE("prf1 hand cases") {
  const auto partial = prf1(ValueSet{"dry", "sensitive"}, ValueSet{"dry"});
  CHECK(partial.precision == 1.0);
  CHECK(partial.recall == 0.5);
  CHECK(partial.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const auto exact = prf1(ValueSet{"a", "b"}, ValueSet{"a", "b"});
  CHECK(exact.precision == 1.0);
  CHECK(exact.recall == 1.0);
  CHECK(exact.f1 == 1.0);

  const auto c = count(ValueSet{"dry"}, ValueSet{"dry skin"});
  CHECK(c.tp == 0);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(prf1(c).f1 == 0.0);
}

TEST_CASE("empty conventions") {
  const auto none = prf1(ValueSet{"x"}, ValueSet{});
  CHECK(none.precision == 1.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  const auto spurious = prf1(ValueSet{}, ValueSet{"x"});
  CHECK(spurious.precision == 0.0);
  CHECK(spurious.recall == 1.0);
  CHECK(spurious.f1 == 0.0);
}

TEST_CASE("macro averages") {
  const std::vector<PRF1> two{{1, 1, 1.0}, {0, 0, 0.0}};
  CHECK(macro(two).f1 == 0.5);
  const std::vector<PRF1> one{{0.3, 0.6, 0.4}};
  CHECK(macro(one).f1 == 0.4);
  CHECK(macro(one).recall == 0.6);
  const std::vector<PRF1> three{{1, 1, 0.6}, {1, 1, 0.6}, {1, 1, 0.6}};
  CHECK(macro(three).f1 == doctest::Approx(0.6).epsilon(1e-15));
  // Mean of F1s, not F1 of the mean P and R.
  const std::vector<PRF1> skew{{1.0, 0.2, 1.0 / 3.0}, {0.2, 1.0, 1.0 / 3.0}};
  CHECK(macro(skew).f1 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("scores aggregate per attribute and skip zero support") {
  const std::vector<ExtractionResult> results{
      {"1", "A", {"x"}, {"x", "y"}},
      {"2", "A", {"z"}, {}},
      {"3", "B", {"q"}, {}},
      {"4", "C", {"m"}, {"m"}},
  };
  const auto r = score(results);
  REQUIRE(r.attributes.size() == 3);
  CHECK(r.attributes[0].counts.tp == 1);
  CHECK(r.attributes[0].counts.fp == 1);
  CHECK(r.attributes[0].counts.fn == 1);
  CHECK(r.attributes[0].support() == 2);
  CHECK(r.warnings.size() == 1);
  REQUIRE(r.macro);
  CHECK(r.macro->f1 == doctest::Approx((0.5 + 1.0) / 2));

  // Reordering attributes or scaling support leaves macro unchanged.
  std::vector<ExtractionResult> shuffled{results[3], results[1], results[0], results[2], results[3]};
  CHECK(score(shuffled).macro->f1 == r.macro->f1);
}

TEST_CASE("stratification by training counts") {
  const std::vector<ExtractionResult> results{{"1", "A", {"x"}, {"x"}}, {"2", "B", {}, {"y"}}};
  auto r = score(results);
  stratify(r, {{"A", 5000}, {"B", 200}});
  CHECK(r.high->attributes == std::vector<std::string>{"A"});
  CHECK(r.low->attributes == std::vector<std::string>{"B"});
  CHECK(r.high->macro->f1 == 1.0);
  CHECK(r.low->macro->f1 == 0.0);

  auto all_high = score(results);
  stratify(all_high, {{"A", 1000}, {"B", 1000}});
  CHECK(all_high.high->attributes.size() == 2);
  CHECK_FALSE(all_high.low->macro.has_value());
  CHECK(report_json(all_high).find("\"n/a\"") != std::string::npos);
  CHECK(report_table(all_high).find("n/a") != std::string::npos);
}

TEST_CASE("values of gold tags and extraction") {
  const auto tokens = corpus::tokenize("Orchid , Cherry Pie , Mango Ice Cream scented wash");
  const auto tags = tagging::parse_tags("B O B E O B I E O O");
  CHECK(values_of(tokens, tags) == ValueSet{"Orchid", "Cherry Pie", "Mango Ice Cream"});
  CHECK(values_of(tokens, tagging::TagSeq(10, tagging::Tag::O)).empty());

  const Model m = testing::tiny_model(Variant::kAdaTag);
  const auto ex = testing::tiny_examples();
  const auto results = predict(m, ex);
  REQUIRE(results.size() == ex.size());
  CHECK(results[1].gold == ValueSet{"16 oz"});
  CHECK(results[1].predicted == extract(m, ex[1].tokens, "Size"));
  CHECK_THROWS_AS(extract(m, ex[0].tokens, "Material"), DataError);
}

TEST_CASE("report outputs") {
  const std::vector<ExtractionResult> results{{"1", "Scent", {"rose"}, {"rose", "musk"}}};
  const auto r = score(results);
  CHECK(report_json(r).find("\"support\": 2") != std::string::npos);
  const auto table = report_table(r);
  CHECK(table.find("Scent") != std::string::npos);
  CHECK(table.find("0.6667") != std::string::npos);
  std::ostringstream out;
  write_predictions(results, out);
  CHECK(out.str() == R"({"attribute":"Scent","gold":["musk","rose"],"id":"1","predicted":["rose"]})" "\n");
}

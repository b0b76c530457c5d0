#include <doctest.h>

#include "adatag/error.hpp"
#include "adatag/tagging.hpp"

using namespace adatag::tagging;

TEST_CASE("spans to tags for the scent example") {
  const std::vector<Span> spans{{0, 0}, {2, 3}, {5, 7}};
  const TagSeq tags = spans_to_tags(spans, 9);
  CHECK(to_string(tags) == "B O B E O B I E O");
  CHECK(tags_to_spans(tags) == spans);
  CHECK(is_valid(tags));
}

TEST_CASE("single-token value is a lone B") {
  const std::vector<Span> spans{{1, 1}};
  CHECK(to_string(spans_to_tags(spans, 3)) == "O B O");
}

TEST_CASE("overlapping or out-of-range spans are rejected") {
  CHECK_THROWS_AS(spans_to_tags(std::vector<Span>{{0, 2}, {2, 3}}, 5), adatag::DataError);
  CHECK_THROWS_AS(spans_to_tags(std::vector<Span>{{3, 5}}, 5), adatag::DataError);
  CHECK_THROWS_AS(spans_to_tags(std::vector<Span>{{2, 1}}, 5), adatag::DataError);
}

TEST_CASE("lenient decoding of invalid sequences") {
  // I without B is ignored; B B gives two spans; trailing open span closes.
  CHECK(tags_to_spans(parse_tags("I E O")).empty());
  CHECK(tags_to_spans(parse_tags("B B O")) == std::vector<Span>{{0, 0}, {1, 1}});
  CHECK(tags_to_spans(parse_tags("O B I")) == std::vector<Span>{{1, 2}});
  CHECK(tags_to_spans(parse_tags("B I O B E")) == std::vector<Span>{{0, 1}, {3, 4}});
  CHECK(tags_to_spans(parse_tags("O O")).empty());
}

TEST_CASE("validity rules") {
  CHECK(is_valid(parse_tags("B I I E")));
  CHECK(is_valid(parse_tags("B B E")));
  CHECK_FALSE(is_valid(parse_tags("O E")));
  CHECK_FALSE(is_valid(parse_tags("I")));
  CHECK_FALSE(is_valid(parse_tags("B I O")));
  CHECK_FALSE(is_valid(parse_tags("B I")));
  CHECK(is_valid(TagSeq{}));
}

TEST_CASE("tag parsing and indices") {
  CHECK(parse_tag("E") == Tag::E);
  CHECK_THROWS_AS(parse_tag("X"), adatag::DataError);
  const TagSeq t = parse_tags("B I O E");
  const auto z = index_sequence(t);
  CHECK(z == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(from_indices(z) == t);
  CHECK_THROWS_AS(from_indices(std::vector<std::size_t>{4}), adatag::DataError);
}

TEST_CASE("expanded tag set layout") {
  const ExpandedTagSet set({"Scent", "Color"});
  CHECK(set.size() == 7);
  CHECK(set.outside() == 6);
  CHECK(set.index(1, Tag::B) == 3);
  CHECK(set.index(1, Tag::O) == 6);
  CHECK(set.name(2) == "E-Scent");
  CHECK(set.name(6) == "O");
  CHECK(set.parse("I-Color") == 4);
  CHECK_THROWS_AS(set.parse("B-Size"), adatag::DataError);
  CHECK(ExpandedTagSet(std::vector<std::string>(12, "")).size() == 37);
}

TEST_CASE("expanded sequences project and merge") {
  const ExpandedTagSet set({"Scent", "Color"});
  const auto z = set.parse_sequence("B-Scent E-Scent O B-Color");
  CHECK(to_string(set.project(z, 0)) == "B E O O");
  CHECK(to_string(set.project(z, 1)) == "O O O B");

  const std::vector<std::pair<std::size_t, TagSeq>> parts{
      {0, parse_tags("B E O O")}, {1, parse_tags("O B E B")}};
  const auto merged = set.merge(parts, 4);
  CHECK(merged.dropped_spans == 1);
  CHECK(merged.tags == set.parse_sequence("B-Scent E-Scent O B-Color"));
}

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// BIOE tag scheme. Tag order (and therefore the tag index used by the CRF)
// is V = [B, I, O, E]. Single-token values are a lone B; there is no S tag.
namespace adatag::tagging {

enum class Tag : std::uint8_t { B = 0, I = 1, O = 2, E = 3 };
inline constexpr std::size_t kNumTags = 4;

using TagSeq = std::vector<Tag>;

// Inclusive token range [start, end].
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  auto operator<=>(const Span&) const = default;
};

char tag_char(Tag t);
Tag parse_tag(std::string_view s);  // "B" | "I" | "O" | "E"; DataError otherwise
std::string to_string(const TagSeq& tags);  // space separated
TagSeq parse_tags(std::string_view text);   // inverse of to_string

// Z: index of each tag in V (0-based).
std::vector<std::size_t> index_sequence(const TagSeq& tags);
TagSeq from_indices(std::span<const std::size_t> z);

// Rejects overlapping or out-of-range spans with DataError.
TagSeq spans_to_tags(std::span<const Span> spans, std::size_t n);

// Lenient decode; never fails and never returns overlapping spans. A span
// opens at B, runs through following I's and absorbs one E. A run that is
// interrupted by O, B or the end closes at its last token. Stray I/E are
// dropped.
std::vector<Span> tags_to_spans(const TagSeq& tags);

bool is_valid(const TagSeq& tags);

// Joint tag vocabulary for the "N tag sets" baseline: B-a, I-a, E-a for each
// attribute in order, then a single shared O (3N+1 tags).
class ExpandedTagSet {
 public:
  explicit ExpandedTagSet(std::vector<std::string> attributes);

  std::size_t size() const { return 3 * attributes_.size() + 1; }
  std::size_t num_attributes() const { return attributes_.size(); }
  const std::vector<std::string>& attributes() const { return attributes_; }
  std::size_t attribute_index(std::string_view attribute) const;  // DataError if unknown

  std::size_t outside() const { return 3 * attributes_.size(); }
  std::size_t index(std::size_t attribute, Tag tag) const;
  std::string name(std::size_t index) const;  // "B-Scent", "O"
  std::size_t parse(std::string_view name) const;
  std::vector<std::size_t> parse_sequence(std::string_view text) const;

  // Per-attribute view of an expanded sequence: this attribute's B/I/E,
  // everything else O.
  TagSeq project(std::span<const std::size_t> expanded, std::size_t attribute) const;

  struct Merged {
    std::vector<std::size_t> tags;
    std::size_t dropped_spans = 0;  // spans that overlapped an earlier attribute
  };
  // Merges per-attribute sequences of equal length n. Attributes are placed
  // in the order given; a span overlapping one already placed is dropped.
  Merged merge(std::span<const std::pair<std::size_t, TagSeq>> per_attribute,
               std::size_t n) const;

 private:
  std::vector<std::string> attributes_;
};

}  // namespace adatag::tagging

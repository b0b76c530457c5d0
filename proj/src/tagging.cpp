#include "adatag/tagging.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "adatag/error.hpp"

namespace adatag::tagging {

char tag_char(Tag t) {
  switch (t) {
    case Tag::B: return 'B';
    case Tag::I: return 'I';
    case Tag::O: return 'O';
    case Tag::E: return 'E';
  }
  return '?';
}

Tag parse_tag(std::string_view s) {
  if (s == "B") return Tag::B;
  if (s == "I") return Tag::I;
  if (s == "O") return Tag::O;
  if (s == "E") return Tag::E;
  throw DataError("unknown tag '" + std::string(s) + "' (expected B, I, O or E)");
}

std::string to_string(const TagSeq& tags) {
  std::string out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i) out += ' ';
    out += tag_char(tags[i]);
  }
  return out;
}

TagSeq parse_tags(std::string_view text) {
  TagSeq out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(parse_tag(tok));
  return out;
}

std::vector<std::size_t> index_sequence(const TagSeq& tags) {
  std::vector<std::size_t> z(tags.size());
  std::transform(tags.begin(), tags.end(), z.begin(),
                 [](Tag t) { return static_cast<std::size_t>(t); });
  return z;
}

TagSeq from_indices(std::span<const std::size_t> z) {
  TagSeq out;
  out.reserve(z.size());
  for (std::size_t v : z) {
    if (v >= kNumTags) throw DataError("tag index " + std::to_string(v) + " out of range");
    out.push_back(static_cast<Tag>(v));
  }
  return out;
}

TagSeq spans_to_tags(std::span<const Span> spans, std::size_t n) {
  std::vector<Span> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end());
  TagSeq tags(n, Tag::O);
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const Span& s = sorted[k];
    if (s.start > s.end || s.end >= n) {
      throw DataError("span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") out of range for length " + std::to_string(n));
    }
    if (k > 0 && sorted[k - 1].end >= s.start) {
      throw DataError("spans (" + std::to_string(sorted[k - 1].start) + "," +
                      std::to_string(sorted[k - 1].end) + ") and (" +
                      std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") overlap");
    }
    tags[s.start] = Tag::B;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = Tag::I;
    if (s.end > s.start) tags[s.end] = Tag::E;
  }
  return tags;
}

std::vector<Span> tags_to_spans(const TagSeq& tags) {
  std::vector<Span> spans;
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case Tag::B:
        if (open) spans.push_back({*open, i - 1});
        open = i;
        break;
      case Tag::I:
        break;  // extends an open span; ignored otherwise
      case Tag::E:
        if (open) {
          spans.push_back({*open, i});
          open.reset();
        }
        break;
      case Tag::O:
        if (open) {
          spans.push_back({*open, i - 1});
          open.reset();
        }
        break;
    }
  }
  if (open) spans.push_back({*open, tags.size() - 1});
  return spans;
}

bool is_valid(const TagSeq& tags) {
  std::optional<Tag> prev;
  for (Tag t : tags) {
    const bool inside = prev && (*prev == Tag::B || *prev == Tag::I);
    if ((t == Tag::I || t == Tag::E) && !inside) return false;
    if (prev == Tag::I && t != Tag::I && t != Tag::E) return false;
    prev = t;
  }
  return prev != Tag::I;
}

// ---- ExpandedTagSet ---------------------------------------------------------

ExpandedTagSet::ExpandedTagSet(std::vector<std::string> attributes)
    : attributes_(std::move(attributes)) {
  if (attributes_.empty()) throw DataError("expanded tag set needs at least one attribute");
}

std::size_t ExpandedTagSet::attribute_index(std::string_view attribute) const {
  auto it = std::find(attributes_.begin(), attributes_.end(), attribute);
  if (it == attributes_.end()) {
    throw DataError("attribute '" + std::string(attribute) + "' not in tag set");
  }
  return static_cast<std::size_t>(it - attributes_.begin());
}

std::size_t ExpandedTagSet::index(std::size_t attribute, Tag tag) const {
  switch (tag) {
    case Tag::B: return 3 * attribute;
    case Tag::I: return 3 * attribute + 1;
    case Tag::E: return 3 * attribute + 2;
    case Tag::O: return outside();
  }
  return outside();
}

std::string ExpandedTagSet::name(std::size_t index) const {
  if (index == outside()) return "O";
  if (index > outside()) throw DataError("expanded tag index " + std::to_string(index) + " out of range");
  static constexpr char kPrefix[] = {'B', 'I', 'E'};
  return std::string(1, kPrefix[index % 3]) + "-" + attributes_[index / 3];
}

std::size_t ExpandedTagSet::parse(std::string_view name) const {
  if (name == "O") return outside();
  if (name.size() < 3 || name[1] != '-') {
    throw DataError("malformed expanded tag '" + std::string(name) + "'");
  }
  const std::size_t a = attribute_index(name.substr(2));
  switch (name[0]) {
    case 'B': return index(a, Tag::B);
    case 'I': return index(a, Tag::I);
    case 'E': return index(a, Tag::E);
    default: break;
  }
  throw DataError("malformed expanded tag '" + std::string(name) + "'");
}

std::vector<std::size_t> ExpandedTagSet::parse_sequence(std::string_view text) const {
  std::vector<std::size_t> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) out.push_back(parse(tok));
  return out;
}

TagSeq ExpandedTagSet::project(std::span<const std::size_t> expanded,
                               std::size_t attribute) const {
  TagSeq out(expanded.size(), Tag::O);
  for (std::size_t i = 0; i < expanded.size(); ++i) {
    const std::size_t t = expanded[i];
    if (t == outside() || t / 3 != attribute) continue;
    static constexpr Tag kTags[] = {Tag::B, Tag::I, Tag::E};
    out[i] = kTags[t % 3];
  }
  return out;
}

ExpandedTagSet::Merged ExpandedTagSet::merge(
    std::span<const std::pair<std::size_t, TagSeq>> per_attribute,
    std::size_t n) const {
  Merged m;
  m.tags.assign(n, outside());
  std::vector<bool> taken(n, false);
  for (const auto& [attribute, tags] : per_attribute) {
    if (tags.size() != n) {
      throw DataError("merge: tag sequence length " + std::to_string(tags.size()) +
                      " differs from " + std::to_string(n));
    }
    for (const Span& s : tags_to_spans(tags)) {
      bool clash = false;
      for (std::size_t i = s.start; i <= s.end; ++i) clash = clash || taken[i];
      if (clash) {
        ++m.dropped_spans;
        continue;
      }
      for (std::size_t i = s.start; i <= s.end; ++i) {
        taken[i] = true;
        const Tag t = i == s.start ? Tag::B : (i == s.end ? Tag::E : Tag::I);
        m.tags[i] = index(attribute, t);
      }
    }
  }
  return m;
}

}  // namespace adatag::tagging

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adatag/tagging.hpp"

namespace adatag::corpus {

// Byte offsets into the UTF-8 source text; [char_start, char_end).
struct Token {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;
  bool operator==(const Token&) const = default;
};

struct Product {
  std::string id;
  std::string title;
  std::vector<std::string> bullets;
  std::optional<std::string> description;  // parsed, never labeled
  std::map<std::string, std::vector<std::string>> gold_values;
};

enum class SourceField { kTitle, kTitlePlusBullets };
std::string to_string(SourceField field);
SourceField parse_source_field(std::string_view name);

struct LabeledExample {
  std::string id;  // product id
  std::string attribute;
  SourceField source = SourceField::kTitle;
  std::string text;
  std::vector<Token> tokens;
  tagging::TagSeq tags;
};

struct AttributeInfo {
  std::string id;
  std::string phrase;
};

class AttributeVocab {
 public:
  AttributeVocab() = default;
  explicit AttributeVocab(std::vector<AttributeInfo> entries);

  std::size_t size() const { return entries_.size(); }
  const std::vector<AttributeInfo>& entries() const { return entries_; }
  std::vector<std::string> ids() const;
  bool contains(std::string_view id) const;
  std::size_t index(std::string_view id) const;  // DataError if unknown
  const std::string& phrase(std::string_view id) const;

  // Keeps only the listed ids, in vocabulary order.
  AttributeVocab subset(const std::vector<std::string>& ids) const;

 private:
  std::vector<AttributeInfo> entries_;
};

// JSON list of {"id": str, "phrase": str?}.
AttributeVocab load_vocab(const std::filesystem::path& path);
AttributeVocab parse_vocab(std::string_view json_text);
std::string vocab_json(const AttributeVocab& vocab);

// Whitespace split, then leading and trailing ASCII punctuation characters are
// peeled off one at a time as their own tokens.
std::vector<Token> tokenize(std::string_view text);

// Camel-case boundaries become spaces: "SkinType" -> "Skin Type".
std::string attribute_phrase(std::string_view id);

// Token texts joined by single spaces.
std::string join_tokens(const std::vector<Token>& tokens, tagging::Span span);
std::vector<std::string> span_strings(const std::vector<Token>& tokens,
                                      const std::vector<tagging::Span>& spans);

struct MatchResult {
  std::vector<tagging::Span> spans;
  std::vector<std::string> unmatched;  // values with no accepted occurrence
};

// Case-insensitive, token-aligned matching. Longer values claim tokens first;
// among equal lengths the leftmost occurrence wins; a match overlapping an
// accepted one is dropped.
MatchResult match_values(const std::vector<Token>& tokens,
                         const std::vector<std::string>& values);
tagging::TagSeq distant_label(const std::vector<Token>& tokens,
                              const std::vector<std::string>& values);

// Source text for a product under a setting. Fields are joined with " . " so
// the separator is a standalone "." token.
std::string source_text(const Product& product, SourceField field);

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct ProductParse {
  std::vector<Product> products;
  std::vector<LineError> errors;
};

ProductParse parse_products(std::istream& in);
Product parse_product(std::string_view json_line);

struct CoverageReport {
  std::size_t products = 0;
  std::size_t pairs = 0;            // (product, attribute) pairs with gold values
  std::size_t examples = 0;
  std::size_t dropped_pairs = 0;    // pairs where no value matched the text
  std::size_t matched_values = 0;
  std::size_t unmatched_values = 0;
  std::size_t unknown_attribute_keys = 0;
  std::map<std::string, std::size_t> examples_per_attribute;
  std::vector<LineError> malformed_lines;

  std::string to_json() const;
};

struct BuildOptions {
  SourceField field = SourceField::kTitle;
  bool include_negatives = false;
};

struct Corpus {
  std::vector<LabeledExample> examples;  // sorted by (product id, attribute)
  CoverageReport report;
};

Corpus build_corpus(const std::vector<Product>& products, const AttributeVocab& vocab,
                    const BuildOptions& options);

// Labeled example files: one JSON object per line.
void write_examples(const std::vector<LabeledExample>& examples, std::ostream& out);
std::vector<LabeledExample> read_examples(std::istream& in);
std::vector<LabeledExample> load_examples(const std::filesystem::path& path);

struct SplitManifest {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

SplitManifest load_splits(const std::filesystem::path& path);
SplitManifest parse_splits(std::string_view json_text);
std::string splits_json(const SplitManifest& splits);

struct SplitExamples {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;
};
SplitExamples apply_splits(const std::vector<LabeledExample>& examples,
                           const SplitManifest& splits);

}  // namespace adatag::corpus

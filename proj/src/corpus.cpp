#include "adatag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "adatag/error.hpp"
#include "adatag/io.hpp"

namespace adatag::corpus {

using nlohmann::json;
using tagging::Span;

namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_ascii_punct(unsigned char c) { return c < 128 && std::ispunct(c); }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

std::string to_string(SourceField field) {
  return field == SourceField::kTitle ? "title" : "title_plus_bullets";
}

SourceField parse_source_field(std::string_view name) {
  if (name == "title") return SourceField::kTitle;
  if (name == "title_plus_bullets") return SourceField::kTitlePlusBullets;
  throw DataError("unknown setting '" + std::string(name) +
                  "' (expected title or title_plus_bullets)");
}

// ---- vocabulary -------------------------------------------------------------

AttributeVocab::AttributeVocab(std::vector<AttributeInfo> entries)
    : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  for (auto& e : entries_) {
    if (e.id.empty()) throw DataError("attribute vocabulary: empty id");
    if (!seen.insert(e.id).second) {
      throw DataError("attribute vocabulary: duplicate id '" + e.id + "'");
    }
    if (e.phrase.empty()) e.phrase = attribute_phrase(e.id);
  }
}

std::vector<std::string> AttributeVocab::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

bool AttributeVocab::contains(std::string_view id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const AttributeInfo& e) { return e.id == id; });
}

std::size_t AttributeVocab::index(std::string_view id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  throw DataError("unknown attribute '" + std::string(id) + "'");
}

const std::string& AttributeVocab::phrase(std::string_view id) const {
  return entries_[index(id)].phrase;
}

AttributeVocab AttributeVocab::subset(const std::vector<std::string>& ids) const {
  for (const auto& id : ids) index(id);
  std::vector<AttributeInfo> kept;
  for (const auto& e : entries_) {
    if (std::find(ids.begin(), ids.end(), e.id) != ids.end()) kept.push_back(e);
  }
  return AttributeVocab(std::move(kept));
}

AttributeVocab parse_vocab(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("attribute vocabulary: ") + e.what());
  }
  if (!j.is_array()) throw DataError("attribute vocabulary must be a JSON list");
  std::vector<AttributeInfo> entries;
  for (const auto& item : j) {
    AttributeInfo info;
    if (item.is_string()) {
      info.id = item.get<std::string>();
    } else if (item.is_object() && item.contains("id") && item["id"].is_string()) {
      info.id = item["id"].get<std::string>();
      if (item.contains("phrase") && item["phrase"].is_string()) {
        info.phrase = item["phrase"].get<std::string>();
      }
    } else {
      throw DataError("attribute vocabulary: entry without string id: " + item.dump());
    }
    entries.push_back(std::move(info));
  }
  return AttributeVocab(std::move(entries));
}

AttributeVocab load_vocab(const std::filesystem::path& path) {
  return parse_vocab(io::read_file(path));
}

std::string vocab_json(const AttributeVocab& vocab) {
  json j = json::array();
  for (const auto& e : vocab.entries()) j.push_back({{"id", e.id}, {"phrase", e.phrase}});
  return j.dump(2);
}

// ---- tokenization -----------------------------------------------------------

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto emit = [&](std::size_t a, std::size_t b) {
    out.push_back(Token{std::string(text.substr(a, b - a)), a, b});
  };
  while (i < n) {
    while (i < n && is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= n) break;
    std::size_t end = i;
    while (end < n && !is_space(static_cast<unsigned char>(text[end]))) ++end;
    std::size_t lo = i, hi = end;
    while (lo < hi && is_ascii_punct(static_cast<unsigned char>(text[lo]))) ++lo;
    std::size_t core_hi = hi;
    while (core_hi > lo && is_ascii_punct(static_cast<unsigned char>(text[core_hi - 1]))) --core_hi;
    for (std::size_t p = i; p < lo; ++p) emit(p, p + 1);
    if (lo < core_hi) emit(lo, core_hi);
    for (std::size_t p = core_hi; p < hi; ++p) emit(p, p + 1);
    i = end;
  }
  return out;
}

std::string attribute_phrase(std::string_view id) {
  std::string out;
  auto lower = [](char c) { return c >= 'a' && c <= 'z'; };
  auto upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  for (std::size_t i = 0; i < id.size(); ++i) {
    const char c = id[i];
    if (i > 0 && upper(c) && !out.empty() && out.back() != ' ') {
      const char prev = id[i - 1];
      const bool next_lower = i + 1 < id.size() && lower(id[i + 1]);
      if (lower(prev) || digit(prev) || (upper(prev) && next_lower)) out += ' ';
    }
    out += c;
  }
  return out;
}

std::string join_tokens(const std::vector<Token>& tokens, Span span) {
  std::string out;
  for (std::size_t i = span.start; i <= span.end; ++i) {
    if (i > span.start) out += ' ';
    out += tokens.at(i).text;
  }
  return out;
}

std::vector<std::string> span_strings(const std::vector<Token>& tokens,
                                      const std::vector<Span>& spans) {
  std::vector<std::string> out;
  for (const Span& s : spans) out.push_back(join_tokens(tokens, s));
  return out;
}

// ---- distant supervision ----------------------------------------------------

MatchResult match_values(const std::vector<Token>& tokens,
                         const std::vector<std::string>& values) {
  struct Candidate {
    std::size_t length;
    std::size_t start;
    std::size_t value;
  };
  std::vector<std::string> lowered(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) lowered[i] = ascii_lower(tokens[i].text);

  std::vector<Candidate> candidates;
  for (std::size_t v = 0; v < values.size(); ++v) {
    std::vector<std::string> pattern;
    for (const Token& t : tokenize(values[v])) pattern.push_back(ascii_lower(t.text));
    if (pattern.empty() || pattern.size() > tokens.size()) continue;
    for (std::size_t s = 0; s + pattern.size() <= tokens.size(); ++s) {
      if (std::equal(pattern.begin(), pattern.end(), lowered.begin() + static_cast<std::ptrdiff_t>(s))) {
        candidates.push_back({pattern.size(), s, v});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.length != b.length) return a.length > b.length;
    return a.start < b.start;
  });

  MatchResult result;
  std::vector<bool> taken(tokens.size(), false);
  std::vector<bool> value_hit(values.size(), false);
  for (const Candidate& c : candidates) {
    bool clash = false;
    for (std::size_t i = c.start; i < c.start + c.length; ++i) clash = clash || taken[i];
    if (clash) continue;
    for (std::size_t i = c.start; i < c.start + c.length; ++i) taken[i] = true;
    result.spans.push_back({c.start, c.start + c.length - 1});
    value_hit[c.value] = true;
  }
  std::sort(result.spans.begin(), result.spans.end());
  for (std::size_t v = 0; v < values.size(); ++v) {
    if (!value_hit[v]) result.unmatched.push_back(values[v]);
  }
  return result;
}

tagging::TagSeq distant_label(const std::vector<Token>& tokens,
                              const std::vector<std::string>& values) {
  return tagging::spans_to_tags(match_values(tokens, values).spans, tokens.size());
}

std::string source_text(const Product& product, SourceField field) {
  std::string text = product.title;
  if (field == SourceField::kTitlePlusBullets) {
    for (const auto& b : product.bullets) {
      text += " . ";
      text += b;
    }
  }
  return text;
}

// ---- product ingestion ------------------------------------------------------

Product parse_product(std::string_view json_line) {
  json j = json::parse(json_line);
  if (!j.is_object()) throw DataError("product line is not a JSON object");
  auto need_string = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) {
      throw DataError(std::string("missing string field '") + key + "'");
    }
    return j[key].get<std::string>();
  };
  Product p;
  p.id = need_string("id");
  p.title = need_string("title");
  if (j.contains("bullets")) {
    if (!j["bullets"].is_array()) throw DataError("'bullets' must be a list");
    for (const auto& b : j["bullets"]) {
      if (!b.is_string()) throw DataError("'bullets' entries must be strings");
      p.bullets.push_back(b.get<std::string>());
    }
  }
  if (j.contains("description") && !j["description"].is_null()) {
    if (!j["description"].is_string()) throw DataError("'description' must be a string");
    p.description = j["description"].get<std::string>();
  }
  if (j.contains("attributes")) {
    if (!j["attributes"].is_object()) throw DataError("'attributes' must be an object");
    for (const auto& [attr, vals] : j["attributes"].items()) {
      if (!vals.is_array()) throw DataError("attribute '" + attr + "' values must be a list");
      auto& dst = p.gold_values[attr];
      for (const auto& v : vals) {
        if (!v.is_string()) throw DataError("attribute '" + attr + "' has a non-string value");
        dst.push_back(v.get<std::string>());
      }
    }
  }
  return p;
}

ProductParse parse_products(std::istream& in) {
  ProductParse out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      Product p = parse_product(line);
      if (!ids.insert(p.id).second) throw DataError("duplicate product id '" + p.id + "'");
      out.products.push_back(std::move(p));
    } catch (const json::exception& e) {
      out.errors.push_back({lineno, e.what()});
    } catch (const DataError& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

std::string CoverageReport::to_json() const {
  json j;
  j["products"] = products;
  j["pairs"] = pairs;
  j["examples"] = examples;
  j["dropped_pairs"] = dropped_pairs;
  j["matched_values"] = matched_values;
  j["unmatched_values"] = unmatched_values;
  j["unknown_attribute_keys"] = unknown_attribute_keys;
  j["examples_per_attribute"] = examples_per_attribute;
  json bad = json::array();
  for (const auto& e : malformed_lines) bad.push_back({{"line", e.line}, {"error", e.message}});
  j["malformed_lines"] = bad;
  return j.dump(2);
}

Corpus build_corpus(const std::vector<Product>& products, const AttributeVocab& vocab,
                    const BuildOptions& options) {
  struct PerProduct {
    std::vector<LabeledExample> examples;
    CoverageReport counts;
  };
  std::vector<const Product*> order;
  for (const auto& p : products) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->id < b->id; });

  std::vector<AttributeInfo> attrs = vocab.entries();
  std::sort(attrs.begin(), attrs.end(), [](auto& a, auto& b) { return a.id < b.id; });

  std::vector<PerProduct> partial(order.size());
  const auto count = static_cast<std::ptrdiff_t>(order.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const Product& p = *order[static_cast<std::size_t>(k)];
    PerProduct& out = partial[static_cast<std::size_t>(k)];
    for (const auto& [key, vals] : p.gold_values) {
      if (!vocab.contains(key)) ++out.counts.unknown_attribute_keys;
    }
    const std::string text = source_text(p, options.field);
    const std::vector<Token> tokens = tokenize(text);
    for (const auto& attr : attrs) {
      auto it = p.gold_values.find(attr.id);
      const bool has_gold = it != p.gold_values.end() && !it->second.empty();
      if (!has_gold && !options.include_negatives) continue;
      MatchResult m;
      if (has_gold) {
        ++out.counts.pairs;
        std::set<std::string> unique(it->second.begin(), it->second.end());
        m = match_values(tokens, std::vector<std::string>(unique.begin(), unique.end()));
        out.counts.unmatched_values += m.unmatched.size();
        out.counts.matched_values += unique.size() - m.unmatched.size();
        if (m.spans.empty()) ++out.counts.dropped_pairs;
      }
      if (m.spans.empty() && !options.include_negatives) continue;
      if (tokens.empty()) continue;
      LabeledExample ex;
      ex.id = p.id;
      ex.attribute = attr.id;
      ex.source = options.field;
      ex.text = text;
      ex.tokens = tokens;
      ex.tags = tagging::spans_to_tags(m.spans, tokens.size());
      out.examples.push_back(std::move(ex));
    }
  }

  Corpus corpus;
  corpus.report.products = products.size();
  for (auto& part : partial) {
    corpus.report.pairs += part.counts.pairs;
    corpus.report.dropped_pairs += part.counts.dropped_pairs;
    corpus.report.matched_values += part.counts.matched_values;
    corpus.report.unmatched_values += part.counts.unmatched_values;
    corpus.report.unknown_attribute_keys += part.counts.unknown_attribute_keys;
    for (auto& ex : part.examples) {
      ++corpus.report.examples_per_attribute[ex.attribute];
      corpus.examples.push_back(std::move(ex));
    }
  }
  corpus.report.examples = corpus.examples.size();
  return corpus;
}

// ---- labeled example files --------------------------------------------------

void write_examples(const std::vector<LabeledExample>& examples, std::ostream& out) {
  for (const auto& ex : examples) {
    json j;
    j["id"] = ex.id;
    j["attribute"] = ex.attribute;
    j["source_field"] = to_string(ex.source);
    j["text"] = ex.text;
    json toks = json::array();
    json offs = json::array();
    json tags = json::array();
    for (const auto& t : ex.tokens) {
      toks.push_back(t.text);
      offs.push_back({t.char_start, t.char_end});
    }
    for (auto t : ex.tags) tags.push_back(std::string(1, tagging::tag_char(t)));
    j["tokens"] = toks;
    j["offsets"] = offs;
    j["tags"] = tags;
    out << j.dump() << '\n';
  }
}

std::vector<LabeledExample> read_examples(std::istream& in) {
  std::vector<LabeledExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      LabeledExample ex;
      ex.id = j.at("id").get<std::string>();
      ex.attribute = j.at("attribute").get<std::string>();
      ex.source = parse_source_field(j.value("source_field", std::string("title")));
      ex.text = j.value("text", std::string());
      const auto& toks = j.at("tokens");
      const auto& tags = j.at("tags");
      if (toks.size() != tags.size()) {
        throw DataError("tokens/tags length mismatch (" + std::to_string(toks.size()) +
                        " vs " + std::to_string(tags.size()) + ")");
      }
      const bool has_offsets = j.contains("offsets");
      for (std::size_t i = 0; i < toks.size(); ++i) {
        Token t;
        t.text = toks[i].get<std::string>();
        if (has_offsets) {
          t.char_start = j["offsets"].at(i).at(0).get<std::size_t>();
          t.char_end = j["offsets"].at(i).at(1).get<std::size_t>();
        }
        ex.tokens.push_back(std::move(t));
        ex.tags.push_back(tagging::parse_tag(tags[i].get<std::string>()));
      }
      if (ex.tokens.empty()) throw DataError("example has no tokens");
      out.push_back(std::move(ex));
    } catch (const json::exception& e) {
      throw DataError("labeled examples line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("labeled examples line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledExample> load_examples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labeled examples " + path.string());
  return read_examples(in);
}

// ---- splits -----------------------------------------------------------------

SplitManifest parse_splits(std::string_view json_text) {
  try {
    json j = json::parse(json_text);
    SplitManifest s;
    auto get = [&](const char* key) {
      return j.contains(key) ? j[key].get<std::vector<std::string>>()
                             : std::vector<std::string>{};
    };
    s.train = get("train");
    s.dev = get("dev");
    s.test = get("test");
    std::unordered_set<std::string> seen;
    for (const auto* part : {&s.train, &s.dev, &s.test}) {
      for (const auto& id : *part) {
        if (!seen.insert(id).second) throw DataError("split manifest: id '" + id + "' listed twice");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("split manifest: ") + e.what());
  }
}

SplitManifest load_splits(const std::filesystem::path& path) {
  return parse_splits(io::read_file(path));
}

std::string splits_json(const SplitManifest& splits) {
  json j;
  j["train"] = splits.train;
  j["dev"] = splits.dev;
  j["test"] = splits.test;
  return j.dump(2);
}

SplitExamples apply_splits(const std::vector<LabeledExample>& examples,
                           const SplitManifest& splits) {
  std::unordered_set<std::string> train(splits.train.begin(), splits.train.end());
  std::unordered_set<std::string> dev(splits.dev.begin(), splits.dev.end());
  std::unordered_set<std::string> test(splits.test.begin(), splits.test.end());
  SplitExamples out;
  for (const auto& ex : examples) {
    if (train.count(ex.id)) out.train.push_back(ex);
    else if (dev.count(ex.id)) out.dev.push_back(ex);
    else if (test.count(ex.id)) out.test.push_back(ex);
  }
  return out;
}

}  // namespace adatag::corpus

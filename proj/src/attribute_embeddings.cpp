#include "adatag/attribute_embeddings.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "adatag/error.hpp"
#include "adatag/random.hpp"

namespace adatag::attributes {

using nlohmann::json;

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kUncontextualized: return "uncontextualized";
    case Provenance::kContextualized: return "contextualized";
    case Provenance::kRandom: return "random";
  }
  return "contextualized";
}

Provenance parse_provenance(const std::string& name) {
  if (name == "uncontextualized") return Provenance::kUncontextualized;
  if (name == "contextualized") return Provenance::kContextualized;
  if (name == "random") return Provenance::kRandom;
  throw DataError("unknown embedding provenance '" + name + "'");
}

std::vector<AttributeInstance> collect_instances(
    const std::vector<corpus::LabeledExample>& train, const std::string& attribute,
    const corpus::AttributeVocab& vocab) {
  const std::string& phrase = vocab.phrase(attribute);
  std::vector<AttributeInstance> out;
  for (const auto& ex : train) {
    if (ex.attribute != attribute) continue;
    for (const auto& span : tagging::tags_to_spans(ex.tags)) {
      out.push_back({phrase, corpus::join_tokens(ex.tokens, span), &ex});
    }
  }
  return out;
}

std::vector<double> static_phrase_embedding(const std::string& phrase,
                                            const io::WordVectors& vectors) {
  std::vector<std::vector<double>> found;
  for (const auto& tok : corpus::tokenize(phrase)) {
    const auto* v = vectors.find(tok.text);
    if (!v) {
      std::string lower = tok.text;
      for (char& c : lower) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      v = vectors.find(lower);
    }
    if (v) found.push_back(*v);
  }
  std::vector<double> out(vectors.dim, 0.0);
  if (found.empty()) return out;
  for (const auto& v : found) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
  }
  for (double& x : out) x /= static_cast<double>(found.size());
  return out;
}

std::vector<double> mean_pool(std::vector<std::vector<double>> vectors, std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  if (vectors.empty()) return out;
  std::sort(vectors.begin(), vectors.end());
  for (const auto& v : vectors) {
    if (v.size() != dim) throw DataError("mean_pool: vector width mismatch");
    for (std::size_t i = 0; i < dim; ++i) out[i] += v[i];
  }
  for (double& x : out) x /= static_cast<double>(vectors.size());
  return out;
}

// ---- table ------------------------------------------------------------------

AttributeEmbeddingTable::AttributeEmbeddingTable(std::size_t dim, Provenance provenance,
                                                 bool frozen)
    : dim_(dim), provenance_(provenance), frozen_(frozen) {}

void AttributeEmbeddingTable::set(const std::string& attribute, std::vector<double> vec) {
  if (dim_ == 0) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw DataError("attribute embedding for '" + attribute + "' has width " +
                    std::to_string(vec.size()) + ", table width is " + std::to_string(dim_));
  }
  rows_[attribute] = std::move(vec);
}

const std::vector<double>& AttributeEmbeddingTable::get(const std::string& attribute) const {
  auto it = rows_.find(attribute);
  if (it == rows_.end()) throw DataError("no attribute embedding for '" + attribute + "'");
  return it->second;
}

Tensor AttributeEmbeddingTable::matrix(const corpus::AttributeVocab& vocab) const {
  Tensor out(Shape{vocab.size(), dim_});
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const auto& v = get(vocab.entries()[i].id);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

// ---- builders ---------------------------------------------------------------

std::vector<double> uncontextualized_embedding(const std::string& attribute,
                                               const std::vector<corpus::LabeledExample>& train,
                                               const corpus::AttributeVocab& vocab,
                                               const io::WordVectors& vectors, bool* flagged) {
  const auto instances = collect_instances(train, attribute, vocab);
  const std::vector<double> name = static_phrase_embedding(vocab.phrase(attribute), vectors);
  std::vector<std::vector<double>> values;
  for (const auto& inst : instances) values.push_back(static_phrase_embedding(inst.value, vectors));
  // The name phrase is the same for every instance, so its pooled mean is the
  // phrase embedding itself; an attribute without instances keeps it too.
  std::vector<double> r = name;
  const std::vector<double> value = mean_pool(std::move(values), vectors.dim);
  r.insert(r.end(), value.begin(), value.end());
  if (flagged) *flagged = instances.empty();
  return r;
}

AttributeEmbeddingTable uncontextualized_table(const std::vector<corpus::LabeledExample>& train,
                                               const corpus::AttributeVocab& vocab,
                                               const io::WordVectors& vectors) {
  if (vectors.dim == 0) throw DataError("uncontextualized embeddings need word vectors");
  AttributeEmbeddingTable table(2 * vectors.dim, Provenance::kUncontextualized, true);
  for (const auto& info : vocab.entries()) {
    bool flagged = false;
    table.set(info.id, uncontextualized_embedding(info.id, train, vocab, vectors, &flagged));
    if (flagged) table.flag(info.id);
  }
  return table;
}

AttributeEmbeddingTable ingest_contextualized(std::istream& in) {
  std::map<std::string, std::vector<std::vector<double>>> names, values;
  std::size_t name_dim = 0, value_dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = "contextualized instances row " + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.contains("attribute") || !j.contains("name_vec") || !j.contains("value_vec")) {
      throw DataError(where + ": needs attribute, name_vec and value_vec");
    }
    auto nv = j["name_vec"].get<std::vector<double>>();
    auto vv = j["value_vec"].get<std::vector<double>>();
    if (name_dim == 0) {
      name_dim = nv.size();
      value_dim = vv.size();
    }
    if (nv.size() != name_dim || vv.size() != value_dim || name_dim == 0) {
      throw DataError(where + ": vector widths " + std::to_string(nv.size()) + "/" +
                      std::to_string(vv.size()) + " differ from " + std::to_string(name_dim) +
                      "/" + std::to_string(value_dim));
    }
    const std::string attr = j["attribute"].get<std::string>();
    names[attr].push_back(std::move(nv));
    values[attr].push_back(std::move(vv));
  }
  AttributeEmbeddingTable table(name_dim + value_dim, Provenance::kContextualized, true);
  for (auto& [attr, rows] : names) {
    std::vector<double> r = mean_pool(std::move(rows), name_dim);
    const std::vector<double> v = mean_pool(std::move(values[attr]), value_dim);
    r.insert(r.end(), v.begin(), v.end());
    table.set(attr, std::move(r));
  }
  return table;
}

AttributeEmbeddingTable ingest_contextualized(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return ingest_contextualized(in);
}

AttributeEmbeddingTable random_table(const corpus::AttributeVocab& vocab, std::size_t d_r,
                                     std::uint64_t seed) {
  if (d_r == 0) throw DataError("random attribute embeddings need d_r >= 1");
  Rng rng(seed);
  AttributeEmbeddingTable table(d_r, Provenance::kRandom, false);
  for (const auto& info : vocab.entries()) {
    std::vector<double> v(d_r);
    for (double& x : v) x = rng.uniform(-0.1, 0.1);
    table.set(info.id, std::move(v));
  }
  return table;
}

// ---- files ------------------------------------------------------------------

void write_table(const AttributeEmbeddingTable& table, std::ostream& out) {
  for (const auto& [attr, vec] : table.rows()) {
    json j;
    j["attribute"] = attr;
    j["vec"] = vec;
    j["provenance"] = to_string(table.provenance());
    if (table.flagged().count(attr)) j["no_instances"] = true;
    out << j.dump() << '\n';
  }
}

AttributeEmbeddingTable read_table(std::istream& in) {
  AttributeEmbeddingTable table;
  bool first = true;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    const std::string where = "attribute table row " + std::to_string(lineno);
    try {
      json j = json::parse(line);
      const Provenance p = parse_provenance(j.value("provenance", std::string("contextualized")));
      auto vec = j.at("vec").get<std::vector<double>>();
      if (first) {
        table = AttributeEmbeddingTable(vec.size(), p, p != Provenance::kRandom);
        first = false;
      } else if (p != table.provenance()) {
        throw DataError("mixes provenance " + to_string(p) + " into a " +
                        to_string(table.provenance()) + " table");
      }
      const std::string attr = j.at("attribute").get<std::string>();
      table.set(attr, std::move(vec));
      if (j.value("no_instances", false)) table.flag(attr);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return table;
}

AttributeEmbeddingTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open attribute table " + path.string());
  return read_table(in);
}

}  // namespace adatag::attributes

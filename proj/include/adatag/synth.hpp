#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "adatag/corpus.hpp"
#include "adatag/io.hpp"

// Templated synthetic catalogues. A spec is JSON:
//
//   {"seed": 1, "vector_dim": 50,
//    "attributes": [{"id": "Scent", "phrase": "scent",
//                    "train": 50, "dev": 20, "test": 20,
//                    "values": ["lavender", "green tea"],
//                    "templates": ["{value} scented body wash"]}]}
//
// Each product carries one attribute; every "{value}" in its template is
// replaced by a value drawn without replacement from that attribute's list.
namespace adatag::synth {

struct AttributeSpec {
  std::string id;
  std::string phrase;  // empty: derived from the id
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
  std::vector<std::string> values;
  std::vector<std::string> templates;
};

struct Spec {
  std::uint64_t seed = 1;
  std::size_t vector_dim = 50;
  std::vector<AttributeSpec> attributes;
};

Spec parse_spec(std::string_view json_text);
Spec load_spec(const std::filesystem::path& path);

struct Dataset {
  std::vector<corpus::Product> products;
  corpus::AttributeVocab vocab;
  corpus::SplitManifest splits;
  io::WordVectors vectors;  // one vector per distinct token (and its lower-case form)
};

Dataset generate(const Spec& spec);

// products.jsonl, vocab.json, splits.json, vectors.txt
void write_dataset(const Dataset& data, const std::filesystem::path& dir);
std::string product_json(const corpus::Product& product);

}  // namespace adatag::synth

#include "adatag/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "adatag/error.hpp"
#include "adatag/random.hpp"

namespace adatag::synth {

namespace fs = std::filesystem;
using nlohmann::json;

Spec parse_spec(std::string_view json_text) {
  Spec spec;
  try {
    const json j = json::parse(json_text);
    spec.seed = j.value("seed", std::uint64_t{1});
    spec.vector_dim = j.value("vector_dim", std::size_t{50});
    for (const auto& a : j.at("attributes")) {
      AttributeSpec s;
      s.id = a.at("id").get<std::string>();
      s.phrase = a.value("phrase", std::string());
      s.train = a.value("train", std::size_t{0});
      s.dev = a.value("dev", std::size_t{0});
      s.test = a.value("test", std::size_t{0});
      s.values = a.at("values").get<std::vector<std::string>>();
      s.templates = a.at("templates").get<std::vector<std::string>>();
      if (s.values.empty()) throw DataError("synth attribute " + s.id + " has no values");
      if (s.templates.empty()) throw DataError("synth attribute " + s.id + " has no templates");
      for (const auto& t : s.templates) {
        if (t.find("{value}") == std::string::npos) {
          throw DataError("synth template without {value}: " + t);
        }
      }
      spec.attributes.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad synth spec: ") + e.what());
  }
  if (spec.attributes.empty()) throw DataError("synth spec has no attributes");
  if (spec.vector_dim == 0) throw DataError("synth vector_dim must be positive");
  return spec;
}

Spec load_spec(const fs::path& path) { return parse_spec(io::read_file(path)); }

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<double> word_vector(const std::string& word, std::size_t dim, std::uint64_t seed) {
  Rng rng(io::fnv1a(word) ^ (seed * 0x9E3779B97F4A7C15ULL));
  std::vector<double> v(dim);
  for (double& x : v) x = rng.normal() * 0.5;
  return v;
}

}  // namespace

Dataset generate(const Spec& spec) {
  Dataset data;
  std::vector<corpus::AttributeInfo> infos;
  for (const auto& a : spec.attributes) {
    infos.push_back({a.id, a.phrase.empty() ? corpus::attribute_phrase(a.id) : a.phrase});
  }
  data.vocab = corpus::AttributeVocab(infos);

  Rng rng(spec.seed);
  std::size_t next_id = 0;
  std::set<std::string> words;
  auto note_words = [&](const std::string& text) {
    for (const auto& t : corpus::tokenize(text)) {
      words.insert(t.text);
      words.insert(lower(t.text));
    }
  };

  for (const auto& a : spec.attributes) {
    note_words(data.vocab.phrase(a.id));
    for (const auto& v : a.values) note_words(v);
    const std::size_t counts[3] = {a.train, a.dev, a.test};
    std::vector<std::string>* split_ids[3] = {&data.splits.train, &data.splits.dev, &data.splits.test};
    for (int s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < counts[s]; ++i) {
        const std::string& tmpl = a.templates[rng.below(a.templates.size())];
        std::vector<std::string> pool = a.values;
        std::string title;
        std::vector<std::string> used;
        std::size_t pos = 0;
        for (;;) {
          const std::size_t hit = tmpl.find("{value}", pos);
          title += tmpl.substr(pos, hit == std::string::npos ? std::string::npos : hit - pos);
          if (hit == std::string::npos) break;
          if (pool.empty()) pool = a.values;
          const std::size_t k = rng.below(pool.size());
          title += pool[k];
          used.push_back(pool[k]);
          pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
          pos = hit + 7;
        }
        char id[32];
        std::snprintf(id, sizeof id, "p%06zu", next_id++);
        corpus::Product p;
        p.id = id;
        p.title = title;
        p.gold_values[a.id] = used;
        note_words(title);
        split_ids[s]->push_back(p.id);
        data.products.push_back(std::move(p));
      }
    }
  }

  data.vectors.dim = spec.vector_dim;
  for (const auto& w : words) data.vectors.table[w] = word_vector(w, spec.vector_dim, spec.seed);
  return data;
}

std::string product_json(const corpus::Product& product) {
  json j;
  j["id"] = product.id;
  j["title"] = product.title;
  j["bullets"] = product.bullets;
  if (product.description) j["description"] = *product.description;
  j["attributes"] = product.gold_values;
  return j.dump();
}

void write_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  io::write_file_atomic(dir / "products.jsonl", [&](std::ostream& out) {
    for (const auto& p : data.products) out << product_json(p) << '\n';
  });
  io::write_file_atomic(dir / "vocab.json",
                        [&](std::ostream& out) { out << corpus::vocab_json(data.vocab) << '\n'; });
  io::write_file_atomic(dir / "splits.json",
                        [&](std::ostream& out) { out << corpus::splits_json(data.splits) << '\n'; });
  io::write_file_atomic(dir / "vectors.txt",
                        [&](std::ostream& out) { io::save_word_vectors(data.vectors, out); });
}

}  // namespace adatag::synth

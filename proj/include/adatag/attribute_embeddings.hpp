#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "adatag/corpus.hpp"
#include "adatag/io.hpp"
#include "adatag/tensor.hpp"

namespace adatag::attributes {

enum class Provenance { kUncontextualized, kContextualized, kRandom };
std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& name);

// One labeled value occurrence of an attribute in a training sentence.
struct AttributeInstance {
  std::string phrase;  // attribute phrase, e.g. "Skin Type"
  std::string value;   // span text
  const corpus::LabeledExample* source = nullptr;
};

std::vector<AttributeInstance> collect_instances(
    const std::vector<corpus::LabeledExample>& train, const std::string& attribute,
    const corpus::AttributeVocab& vocab);

// Mean of the static vectors of the phrase's tokens (exact form, then
// lower-cased). OOV tokens are skipped; an all-OOV phrase gives zeros.
std::vector<double> static_phrase_embedding(const std::string& phrase,
                                            const io::WordVectors& vectors);

// Element-wise mean. Vectors are summed in sorted order so the result does
// not depend on the order of the input.
std::vector<double> mean_pool(std::vector<std::vector<double>> vectors, std::size_t dim);

class AttributeEmbeddingTable {
 public:
  AttributeEmbeddingTable() = default;
  AttributeEmbeddingTable(std::size_t dim, Provenance provenance, bool frozen);

  std::size_t dim() const { return dim_; }
  Provenance provenance() const { return provenance_; }
  bool frozen() const { return frozen_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  void set(const std::string& attribute, std::vector<double> vec);
  bool contains(const std::string& attribute) const { return rows_.count(attribute) > 0; }
  const std::vector<double>& get(const std::string& attribute) const;
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

  // Attributes with no training instances (value half is zero).
  const std::set<std::string>& flagged() const { return flagged_; }
  void flag(const std::string& attribute) { flagged_.insert(attribute); }

  // [N, d_r] in vocabulary order; DataError if an attribute has no row.
  Tensor matrix(const corpus::AttributeVocab& vocab) const;

 private:
  std::size_t dim_ = 0;
  Provenance provenance_ = Provenance::kContextualized;
  bool frozen_ = true;
  std::map<std::string, std::vector<double>> rows_;
  std::set<std::string> flagged_;
};

// r = concat(mean name embedding, mean value embedding); d_r = 2 * vector dim.
std::vector<double> uncontextualized_embedding(const std::string& attribute,
                                               const std::vector<corpus::LabeledExample>& train,
                                               const corpus::AttributeVocab& vocab,
                                               const io::WordVectors& vectors,
                                               bool* flagged = nullptr);
AttributeEmbeddingTable uncontextualized_table(const std::vector<corpus::LabeledExample>& train,
                                               const corpus::AttributeVocab& vocab,
                                               const io::WordVectors& vectors);

// Rows {"attribute": id, "name_vec": [...], "value_vec": [...]}; pooled by mean
// per attribute and concatenated name then value.
AttributeEmbeddingTable ingest_contextualized(std::istream& in);
AttributeEmbeddingTable ingest_contextualized(const std::filesystem::path& path);

// iid uniform(-0.1, 0.1), trainable.
AttributeEmbeddingTable random_table(const corpus::AttributeVocab& vocab, std::size_t d_r,
                                     std::uint64_t seed);

// Pooled table rows {"attribute": id, "vec": [...], "provenance": str?}.
void write_table(const AttributeEmbeddingTable& table, std::ostream& out);
AttributeEmbeddingTable read_table(std::istream& in);
AttributeEmbeddingTable load_table(const std::filesystem::path& path);

}  // namespace adatag::attributes

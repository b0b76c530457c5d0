#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "adatag/attribute_embeddings.hpp"
#include "adatag/autodiff.hpp"
#include "adatag/config.hpp"
#include "adatag/corpus.hpp"
#include "adatag/decoder.hpp"
#include "adatag/encoder.hpp"
#include "adatag/io.hpp"
#include "adatag/tagging.hpp"

namespace adatag {

// Named tensors with stable addresses (graphs borrow them by pointer).
class ParamStore {
 public:
  ad::Parameter& add(std::string name, std::string group, Tensor value, bool frozen = false);
  ad::Parameter& at(std::string_view name);
  const ad::Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::deque<ad::Parameter>& all() { return params_; }
  const std::deque<ad::Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }

  // Rounds every value through float32, the checkpoint storage type.
  void round_to_float();

 private:
  std::deque<ad::Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct ParamSpec {
  std::string name;
  std::string group;  // encoder | hyper | moe | decoder | attribute
  Shape shape;
  bool frozen = false;
  double init_scale = 0.0;  // uniform(-s, s); 0 for tables filled elsewhere
};

struct LayoutInputs {
  std::size_t vocab_size = 0;
  std::vector<std::string> attributes;
  std::size_t d_r = 0;
};

std::vector<ParamSpec> parameter_layout(const TrainConfig& config, const LayoutInputs& inputs);

struct ParamCount {
  struct Entry {
    std::string name;
    std::string group;
    Shape shape;
    std::size_t count = 0;
    bool frozen = false;
  };
  std::vector<Entry> tensors;
  std::map<std::string, std::size_t> groups;
  std::size_t total = 0;
  std::size_t trainable = 0;
};

ParamCount param_count(const std::vector<ParamSpec>& layout);
ParamCount param_count(const ParamStore& store);
// Counts from a config alone (vocab_size / num_attributes / d_r keys).
ParamCount param_count(const TrainConfig& config);

// Training target for one sequence in the model's tag space.
struct TrainItem {
  std::size_t attribute = 0;  // index into the model's attribute vocabulary
  std::size_t head = 0;
  std::vector<std::size_t> words;
  std::vector<std::size_t> tags;
  std::string source_id;
};

class Model {
 public:
  // Builds and initializes parameters for config.variant. `table` is required
  // by the adatag variant; word vectors (if any) initialize W_word.
  static Model build(const TrainConfig& config, encoder::WordVocab words,
                     corpus::AttributeVocab attributes,
                     const attributes::AttributeEmbeddingTable* table,
                     const io::WordVectors* word_vectors);

  Model(TrainConfig config, encoder::WordVocab words, corpus::AttributeVocab attributes,
        ParamStore params);

  const TrainConfig& config() const { return config_; }
  const encoder::WordVocab& words() const { return words_; }
  const corpus::AttributeVocab& attributes() const { return attributes_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  const std::optional<tagging::ExpandedTagSet>& tag_set() const { return tag_set_; }

  std::size_t num_tags() const;
  std::size_t num_heads() const;
  std::size_t head_of(std::size_t attribute) const;
  std::size_t attribute_index(std::string_view id) const { return attributes_.index(id); }

  // ---- graph path (training)
  decoder::DecoderVars head_vars(ad::Graph& g, std::size_t head) const;
  ad::Var encode(ad::Graph& g, std::size_t attribute, const std::vector<std::size_t>& words) const;

  // ---- plain path (inference)
  decoder::DecoderInstance head_instance(std::size_t head) const;
  Tensor encode(std::size_t attribute, const std::vector<std::size_t>& words) const;
  Tensor emissions(std::size_t attribute, const std::vector<corpus::Token>& tokens,
                   const decoder::DecoderInstance& head) const;
  // Viterbi path mapped back to per-attribute BIOE tags.
  tagging::TagSeq predict_tags(std::size_t attribute, const std::vector<corpus::Token>& tokens,
                               const decoder::DecoderInstance& head) const;
  tagging::TagSeq predict_tags(std::size_t attribute,
                               const std::vector<corpus::Token>& tokens) const;

  // Examples whose attribute is outside the model are skipped. For the joint
  // tag-set variant, examples of the same sentence are merged into one item
  // (overlapping spans of later attributes are dropped and counted).
  std::vector<TrainItem> prepare(const std::vector<corpus::LabeledExample>& examples,
                                 std::size_t* dropped_spans = nullptr) const;

  // Non-frozen parameters; restricted to one attribute's stack for the
  // per-attribute variant.
  std::vector<ad::Parameter*> trainable_parameters(
      std::optional<std::size_t> attribute = std::nullopt);

 private:
  std::string encoder_prefix(std::size_t attribute) const;
  std::string table_name(std::size_t attribute) const;

  TrainConfig config_;
  encoder::WordVocab words_;
  corpus::AttributeVocab attributes_;
  ParamStore params_;
  std::optional<tagging::ExpandedTagSet> tag_set_;
};

}  // namespace adatag

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "adatag/corpus.hpp"

namespace adatag {

enum class Variant {
  kAdaTag,           // shared BiLSTM + hypernetwork/MoE decoder, frozen attribute table
  kAdaTagRandomEmb,  // same, with a trainable random attribute table
  kBiLstmMultiCrf,   // shared BiLSTM + one CRF decoder per attribute
  kNTagSets,         // shared BiLSTM + one CRF over 3N+1 joint tags
  kPerAttribute,     // N disjoint BiLSTM-CRF models, trained one after another
  kSharedEmb,        // shared word embeddings + N BiLSTM-CRF stacks
};

std::string to_string(Variant v);
Variant parse_variant(std::string_view name);  // DataError listing the choices

struct TrainConfig {
  Variant variant = Variant::kAdaTag;
  std::size_t d_h = 200;
  std::size_t d_word = 50;
  std::size_t d_r = 0;  // 0: take the width of the attribute table (1536 for random)
  std::size_t k = 3;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 3;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 1;
  corpus::SourceField setting = corpus::SourceField::kTitle;
  std::vector<std::string> attributes;  // empty: all
  bool freeze_attribute_embeddings = true;
  std::size_t threads = 0;  // 0: OpenMP default

  // Used only when counting parameters from a config without data.
  std::size_t vocab_size = 0;
  std::size_t num_attributes = 0;

  // Throws DataError on inconsistent values.
  void validate() const;
};

using KeyValues = std::map<std::string, std::string>;

KeyValues to_key_values(const TrainConfig& config);
// Unknown keys raise DataError; keys absent from `kv` keep `base` values.
TrainConfig from_key_values(const KeyValues& kv, TrainConfig base = {});

// "key = value" lines; '#' starts a comment.
KeyValues parse_key_values(std::string_view text);
std::string format_key_values(const KeyValues& kv);

// Named presets ("adatag_default", ...) or a path to a key/value file.
bool is_preset(std::string_view name);
TrainConfig preset(std::string_view name);
TrainConfig load_config(const std::string& name_or_path);

}  // namespace adatag

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adatag/autodiff.hpp"
#include "adatag/corpus.hpp"
#include "adatag/io.hpp"
#include "adatag/tensor.hpp"

// Word embeddings followed by a bidirectional LSTM. The BiLSTM output width
// d_h is the concatenation of both directions, so each direction has d_h / 2
// units.
//
// LSTM weights for one direction are a single matrix W [4u, d_in + u] and
// bias b [4u] acting on [x; h], with gate blocks in the order
// input, forget, output, candidate.
namespace adatag::encoder {

class WordVocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  WordVocab();
  explicit WordVocab(const std::vector<std::string>& words);  // words[0..1] must be <pad>, <unk>

  std::size_t add(const std::string& word);
  std::optional<std::size_t> find(const std::string& word) const;
  // Exact form, then lower-cased form, then <unk>.
  std::size_t lookup(const std::string& token) const;
  std::vector<std::size_t> lookup(const std::vector<corpus::Token>& tokens) const;

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Every distinct token text of the examples, in first-seen order.
  static WordVocab from_examples(const std::vector<corpus::LabeledExample>& examples);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Rows from static vectors where available (exact, then lower-cased word);
// otherwise uniform(-0.1, 0.1). <pad> is zero. Vector width must equal d_word.
Tensor init_word_embeddings(const WordVocab& vocab, std::size_t d_word,
                            const io::WordVectors* vectors, std::uint64_t seed);

// ---- plain forward (inference and reference) ---------------------------------

struct LstmState {
  Tensor h;
  Tensor c;
};

LstmState lstm_step(const Tensor& x, const LstmState& state, const Tensor& weight,
                    const Tensor& bias);

// X [n, d_in] -> H [n, 2u]; zero initial states in both directions.
Tensor bilstm(const Tensor& inputs, const Tensor& fwd_weight, const Tensor& fwd_bias,
              const Tensor& bwd_weight, const Tensor& bwd_bias);

Tensor embed(const Tensor& table, const std::vector<std::size_t>& rows);

// ---- graph forward (training) ------------------------------------------------

struct LstmVars {
  ad::Var h;
  ad::Var c;
};

LstmVars lstm_step(ad::Var x, LstmVars state, ad::Var weight, ad::Var bias);

ad::Var bilstm(ad::Var inputs, ad::Var fwd_weight, ad::Var fwd_bias, ad::Var bwd_weight,
               ad::Var bwd_bias);

}  // namespace adatag::encoder

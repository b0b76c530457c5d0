#include "adatag/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "adatag/error.hpp"
#include "adatag/kernels.hpp"
#include "adatag/random.hpp"

namespace adatag::encoder {

namespace {

std::string ascii_lower(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t units_of(const Tensor& weight, const Tensor& bias, std::size_t d_in) {
  if (weight.rank() != 2 || weight.dim(0) % 4 != 0) {
    throw ShapeError("lstm: weight shape " + shape_string(weight.shape()));
  }
  const std::size_t u = weight.dim(0) / 4;
  if (weight.dim(1) != d_in + u || bias.size() != 4 * u) {
    throw ShapeError("lstm: weight " + shape_string(weight.shape()) + ", bias " +
                     shape_string(bias.shape()) + " for input width " + std::to_string(d_in));
  }
  return u;
}

}  // namespace

WordVocab::WordVocab() {
  add("<pad>");
  add("<unk>");
}

WordVocab::WordVocab(const std::vector<std::string>& words) {
  if (words.size() < 2 || words[0] != "<pad>" || words[1] != "<unk>") {
    throw DataError("word vocabulary must start with <pad>, <unk>");
  }
  for (const auto& w : words) {
    if (index_.count(w)) throw DataError("word vocabulary: duplicate entry '" + w + "'");
    add(w);
  }
}

std::size_t WordVocab::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  const std::size_t id = words_.size();
  words_.push_back(word);
  index_.emplace(word, id);
  return id;
}

std::optional<std::size_t> WordVocab::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t WordVocab::lookup(const std::string& token) const {
  if (auto id = find(token)) return *id;
  if (auto id = find(ascii_lower(token))) return *id;
  return kUnk;
}

std::vector<std::size_t> WordVocab::lookup(const std::vector<corpus::Token>& tokens) const {
  std::vector<std::size_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(lookup(t.text));
  return out;
}

WordVocab WordVocab::from_examples(const std::vector<corpus::LabeledExample>& examples) {
  WordVocab v;
  for (const auto& ex : examples) {
    for (const auto& t : ex.tokens) v.add(t.text);
  }
  return v;
}

Tensor init_word_embeddings(const WordVocab& vocab, std::size_t d_word,
                            const io::WordVectors* vectors, std::uint64_t seed) {
  if (vectors && vectors->dim != 0 && vectors->dim != d_word) {
    throw DataError("word vectors have width " + std::to_string(vectors->dim) +
                    " but d_word is " + std::to_string(d_word));
  }
  Rng rng(seed);
  Tensor table(Shape{vocab.size(), d_word});
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    auto row = table.row(r);
    // Draw unconditionally so a row's init does not depend on the vectors file.
    for (double& v : row) v = rng.uniform(-0.1, 0.1);
    if (r == WordVocab::kPad) {
      std::fill(row.begin(), row.end(), 0.0);
      continue;
    }
    if (!vectors) continue;
    const std::string& w = vocab.words()[r];
    const auto* vec = vectors->find(w);
    if (!vec) vec = vectors->find(ascii_lower(w));
    if (vec) std::copy(vec->begin(), vec->end(), row.begin());
  }
  return table;
}

// ---- plain ------------------------------------------------------------------

LstmState lstm_step(const Tensor& x, const LstmState& state, const Tensor& weight,
                    const Tensor& bias) {
  const std::size_t d_in = x.size();
  const std::size_t u = units_of(weight, bias, d_in);
  if (state.h.size() != u || state.c.size() != u) {
    throw ShapeError("lstm_step: state width does not match " + std::to_string(u) + " units");
  }
  std::vector<double> xh(d_in + u);
  std::copy(x.data().begin(), x.data().end(), xh.begin());
  std::copy(state.h.data().begin(), state.h.data().end(), xh.begin() + static_cast<std::ptrdiff_t>(d_in));
  std::vector<double> z(4 * u);
  kernels::gemv(weight.data(), 4 * u, d_in + u, xh, z);
  LstmState next{Tensor(Shape{u}), Tensor(Shape{u})};
  for (std::size_t k = 0; k < u; ++k) {
    const double i = sigmoid(z[k] + bias[k]);
    const double f = sigmoid(z[u + k] + bias[u + k]);
    const double o = sigmoid(z[2 * u + k] + bias[2 * u + k]);
    const double g = std::tanh(z[3 * u + k] + bias[3 * u + k]);
    next.c[k] = f * state.c[k] + i * g;
    next.h[k] = o * std::tanh(next.c[k]);
  }
  return next;
}

Tensor bilstm(const Tensor& inputs, const Tensor& fwd_weight, const Tensor& fwd_bias,
              const Tensor& bwd_weight, const Tensor& bwd_bias) {
  if (inputs.rank() != 2 || inputs.dim(0) == 0) {
    throw ShapeError("bilstm: inputs must be [n, d_in] with n >= 1, got " +
                     shape_string(inputs.shape()));
  }
  const std::size_t n = inputs.dim(0), d_in = inputs.dim(1);
  const std::size_t u = units_of(fwd_weight, fwd_bias, d_in);
  if (units_of(bwd_weight, bwd_bias, d_in) != u) {
    throw ShapeError("bilstm: directions have different widths");
  }
  Tensor out(Shape{n, 2 * u});
  auto run = [&](const Tensor& w, const Tensor& b, bool reverse, std::size_t offset) {
    LstmState s{Tensor(Shape{u}), Tensor(Shape{u})};
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t t = reverse ? n - 1 - step : step;
      auto src = inputs.row(t);
      s = lstm_step(Tensor(Shape{d_in}, std::vector<double>(src.begin(), src.end())), s, w, b);
      std::copy(s.h.data().begin(), s.h.data().end(), out.row(t).begin() + static_cast<std::ptrdiff_t>(offset));
    }
  };
  run(fwd_weight, fwd_bias, false, 0);
  run(bwd_weight, bwd_bias, true, u);
  return out;
}

Tensor embed(const Tensor& table, const std::vector<std::size_t>& rows) {
  const std::size_t d = table.cols();
  Tensor out(Shape{rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= table.rows()) throw ShapeError("embed: row out of range");
    std::copy_n(table.row(rows[i]).begin(), d, out.row(i).begin());
  }
  return out;
}

// ---- graph ------------------------------------------------------------------

LstmVars lstm_step(ad::Var x, LstmVars state, ad::Var weight, ad::Var bias) {
  const std::size_t u = units_of(weight.value(), bias.value(), x.value().size());
  ad::Var z = ad::add(ad::matmul(weight, ad::concat({x, state.h})), bias);
  ad::Var i = ad::sigmoid(ad::slice(z, 0, u));
  ad::Var f = ad::sigmoid(ad::slice(z, u, u));
  ad::Var o = ad::sigmoid(ad::slice(z, 2 * u, u));
  ad::Var g = ad::tanh(ad::slice(z, 3 * u, u));
  ad::Var c = ad::add(ad::mul(f, state.c), ad::mul(i, g));
  ad::Var h = ad::mul(o, ad::tanh(c));
  return {h, c};
}

ad::Var bilstm(ad::Var inputs, ad::Var fwd_weight, ad::Var fwd_bias, ad::Var bwd_weight,
               ad::Var bwd_bias) {
  const Tensor& xv = inputs.value();
  if (xv.rank() != 2 || xv.dim(0) == 0) {
    throw ShapeError("bilstm: inputs must be [n, d_in] with n >= 1, got " +
                     shape_string(xv.shape()));
  }
  const std::size_t n = xv.dim(0);
  const std::size_t u = units_of(fwd_weight.value(), fwd_bias.value(), xv.dim(1));
  ad::Graph& g = inputs.graph();
  std::vector<ad::Var> rows(n);
  for (std::size_t t = 0; t < n; ++t) rows[t] = ad::row(inputs, t);

  auto run = [&](ad::Var w, ad::Var b, bool reverse) {
    std::vector<ad::Var> states(n);
    LstmVars s{g.input(Tensor(Shape{u})), g.input(Tensor(Shape{u}))};
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t t = reverse ? n - 1 - step : step;
      s = lstm_step(rows[t], s, w, b);
      states[t] = s.h;
    }
    return states;
  };
  const auto fwd = run(fwd_weight, fwd_bias, false);
  const auto bwd = run(bwd_weight, bwd_bias, true);
  std::vector<ad::Var> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = ad::concat({fwd[t], bwd[t]});
  return ad::stack_rows(out);
}

}  // namespace adatag::encoder

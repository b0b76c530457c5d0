#include <doctest.h>

#include <cmath>

#include "adatag/encoder.hpp"
#include "adatag/error.hpp"
#include "helpers.hpp"

using namespace adatag;
using namespace adatag::encoder;

TEST_CASE("word vocabulary lookups") {
  WordVocab v;
  CHECK(v.size() == 2);
  const auto lav = v.add("lavender");
  CHECK(v.add("lavender") == lav);
  CHECK(v.lookup("lavender") == lav);
  CHECK(v.lookup("Lavender") == lav);
  CHECK(v.lookup("rose") == WordVocab::kUnk);
  CHECK_THROWS_AS(WordVocab(std::vector<std::string>{"a", "b"}), DataError);

  const auto from = WordVocab::from_examples({testing::example("p", "Scent", "Rose soap , rose", {"rose"})});
  CHECK(from.words() == std::vector<std::string>{"<pad>", "<unk>", "Rose", "soap", ",", "rose"});
}

TEST_CASE("word embedding initialization") {
  WordVocab v;
  v.add("Lavender");
  v.add("rose");
  io::WordVectors vec;
  vec.dim = 2;
  vec.table["lavender"] = {0.5, -0.5};
  const Tensor e = init_word_embeddings(v, 2, &vec, 1);
  CHECK(e.at(0, 0) == 0.0);
  CHECK(e.at(0, 1) == 0.0);
  CHECK(e.at(2, 0) == 0.5);  // lower-cased fallback
  CHECK(std::abs(e.at(3, 0)) <= 0.1);
  CHECK_THROWS_AS(init_word_embeddings(v, 3, &vec, 1), DataError);
}

TEST_CASE("lstm step by hand") {
  // u = 1, d_in = 1; gate rows i, f, o, g over [x; h].
  const Tensor W = Tensor::matrix(4, 2, {1, 0, 0, 1, 0.5, 0.5, 2, -1});
  const Tensor b = Tensor::vector({0, 0, 0, 0});
  LstmState s{Tensor::vector({0.5}), Tensor::vector({0.25})};
  const auto next = lstm_step(Tensor::vector({1.0}), s, W, b);
  auto sig = [](double x) { return 1 / (1 + std::exp(-x)); };
  const double i = sig(1), f = sig(0.5), o = sig(0.75), g = std::tanh(1.5);
  const double c = f * 0.25 + i * g;
  CHECK(next.c[0] == doctest::Approx(c).epsilon(1e-14));
  CHECK(next.h[0] == doctest::Approx(o * std::tanh(c)).epsilon(1e-14));
}

TEST_CASE("graph and plain bilstm agree; gradients check") {
  Rng rng(21);
  const std::size_t d_in = 3, u = 2, n = 4;
  ad::Parameter x{"x", "", testing::random_tensor({n, d_in}, rng), false, 0};
  ad::Parameter wf{"wf", "", testing::random_tensor({4 * u, d_in + u}, rng), false, 1};
  ad::Parameter bf{"bf", "", testing::random_tensor({4 * u}, rng), false, 2};
  ad::Parameter wb{"wb", "", testing::random_tensor({4 * u, d_in + u}, rng), false, 3};
  ad::Parameter bb{"bb", "", testing::random_tensor({4 * u}, rng), false, 4};

  const Tensor plain = bilstm(x.value, wf.value, bf.value, wb.value, bb.value);
  CHECK(plain.shape() == Shape{n, 2 * u});
  ad::Graph g;
  const auto graph = bilstm(g.parameter(x), g.parameter(wf), g.parameter(bf), g.parameter(wb),
                            g.parameter(bb));
  CHECK(max_abs_diff(plain, graph.value()) == 0.0);

  // The backward half of the last row sees only the last token; the forward
  // half of the first row sees only the first.
  Tensor x2 = x.value;
  x2.at(0, 0) += 1.0;
  const Tensor moved = bilstm(x2, wf.value, bf.value, wb.value, bb.value);
  for (std::size_t c = u; c < 2 * u; ++c) CHECK(moved.at(n - 1, c) == plain.at(n - 1, c));
  CHECK(moved.at(0, 0) != plain.at(0, 0));

  const Tensor weights = testing::random_tensor({n, 2 * u}, rng);
  const auto report = ad::grad_check(
      [&](ad::Graph& gg) {
        auto h = bilstm(gg.parameter(x), gg.parameter(wf), gg.parameter(bf), gg.parameter(wb),
                        gg.parameter(bb));
        return ad::dot(h, gg.input(weights));
      },
      {&x, &wf, &bf, &wb, &bb});
  CHECK(report.passed);
}

TEST_CASE("embed gathers rows") {
  const Tensor table = Tensor::matrix(3, 2, {0, 0, 1, 2, 3, 4});
  const Tensor e = embed(table, {2, 1, 2});
  CHECK(e.shape() == Shape{3, 2});
  CHECK(e.at(0, 1) == 4);
  CHECK(e.at(1, 0) == 1);
  CHECK_THROWS(embed(table, {3}));
}

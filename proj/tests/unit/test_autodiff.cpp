#include <doctest.h>

#include <cmath>
#include <functional>

#include "adatag/autodiff.hpp"
#include "adatag/error.hpp"
#include "helpers.hpp"

using namespace adatag;
using namespace adatag::ad;

namespace {

Parameter param(const std::string& name, Shape shape, Rng& rng, std::size_t id) {
  Parameter p;
  p.name = name;
  p.value = testing::random_tensor(std::move(shape), rng);
  p.id = id;
  return p;
}

// Weighted sum with fixed random weights so every output element matters.
Var weighted(Var v, std::uint64_t seed) {
  Rng rng(seed);
  return dot(v, v.graph().input(testing::random_tensor(v.shape(), rng)));
}

void check_op(const std::function<Var(Graph&, std::vector<Var>&)>& op, std::vector<Shape> shapes,
              std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Parameter> params;
  for (std::size_t i = 0; i < shapes.size(); ++i) params.push_back(param("p" + std::to_string(i), shapes[i], rng, i));
  std::vector<Parameter*> ptrs;
  for (auto& p : params) ptrs.push_back(&p);
  const auto report = grad_check(
      [&](Graph& g) {
        std::vector<Var> vars;
        for (auto& p : params) vars.push_back(g.parameter(p));
        return weighted(op(g, vars), seed + 100);
      },
      ptrs);
  INFO("worst " << report.worst << " rel " << report.max_rel_error);
  CHECK(report.passed);
  CHECK(report.checked > 0);
}

}  // namespace

TEST_CASE("matmul gradients in all three forms") {
  check_op([](Graph&, std::vector<Var>& v) { return matmul(v[0], v[1]); }, {{3, 4}, {4, 2}});
  check_op([](Graph&, std::vector<Var>& v) { return matmul(v[0], v[1]); }, {{3, 4}, {4}});
  check_op([](Graph&, std::vector<Var>& v) { return matmul(v[0], v[1]); }, {{4}, {4, 5}});
}

TEST_CASE("elementwise gradients") {
  check_op([](Graph&, std::vector<Var>& v) { return add(v[0], v[1]); }, {{2, 3}, {2, 3}});
  check_op([](Graph&, std::vector<Var>& v) { return sub(v[0], v[1]); }, {{5}, {5}});
  check_op([](Graph&, std::vector<Var>& v) { return mul(v[0], v[1]); }, {{2, 3}, {2, 3}});
  check_op([](Graph&, std::vector<Var>& v) { return scale(v[0], -2.5); }, {{4}});
  check_op([](Graph&, std::vector<Var>& v) { return sigmoid(v[0]); }, {{6}});
  check_op([](Graph&, std::vector<Var>& v) { return ad::tanh(v[0]); }, {{2, 2}});
  check_op([](Graph&, std::vector<Var>& v) { return add_column_bias(v[0], v[1]); }, {{3, 4}, {3}});
}

TEST_CASE("reductions and normalizers") {
  check_op([](Graph&, std::vector<Var>& v) { return softmax(v[0]); }, {{5}});
  check_op([](Graph&, std::vector<Var>& v) { return log_sum_exp(v[0]); }, {{3, 3}});
  check_op([](Graph&, std::vector<Var>& v) { return sum(v[0]); }, {{2, 3}});
  check_op([](Graph&, std::vector<Var>& v) { return mean(v[0]); }, {{7}});
  check_op([](Graph&, std::vector<Var>& v) { return dot(v[0], v[1]); }, {{4}, {4}});
}

TEST_CASE("shape op gradients") {
  check_op([](Graph&, std::vector<Var>& v) { return concat({v[0], v[1], v[0]}); }, {{2}, {3}});
  check_op([](Graph&, std::vector<Var>& v) { return stack_rows({v[0], v[1], v[0]}); }, {{3}, {3}});
  check_op([](Graph&, std::vector<Var>& v) { return reshape(v[0], {3, 2}); }, {{6}});
  check_op([](Graph&, std::vector<Var>& v) { return transpose(v[0]); }, {{2, 5}});
  check_op([](Graph&, std::vector<Var>& v) { return slice(v[0], 2, 3); }, {{6}});
  check_op([](Graph&, std::vector<Var>& v) { return row(v[0], 1); }, {{3, 4}});
  check_op([](Graph&, std::vector<Var>& v) { return pick(v[0], 4); }, {{2, 3}});
}

TEST_CASE("softmax sums to one and log_sum_exp is shift-stable") {
  Graph g;
  Var x = g.input(Tensor::vector({1000.0, 1001.0, 999.0}));
  double s = 0;
  for (double v : softmax(x).value().data()) s += v;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
  const double lse = log_sum_exp(x).value().item();
  CHECK(std::isfinite(lse));
  CHECK(lse == doctest::Approx(1001.0 + std::log(1 + std::exp(-1.0) + std::exp(-2.0))));
}

TEST_CASE("gather yields row-sparse gradients that merge") {
  Rng rng(3);
  Parameter table = param("table", {5, 3}, rng, 0);
  Graph g;
  Var a = g.gather(table, {1, 3, 1});
  Var b = g.gather(table, {4});
  Var loss = add(sum(a), scale(sum(b), 2.0));
  g.backward(loss);
  const auto grads = g.parameter_grads();
  REQUIRE(grads.size() == 1);
  Tensor dense(table.value.shape());
  grads[0].add_to(dense);
  CHECK(dense.at(0, 0) == 0.0);
  CHECK(dense.at(1, 2) == 2.0);
  CHECK(dense.at(3, 0) == 1.0);
  CHECK(dense.at(4, 1) == 2.0);

  const auto report = grad_check(
      [&](Graph& gg) { return weighted(gg.gather(table, {2, 0, 2}), 9); }, {&table});
  CHECK(report.passed);
}

TEST_CASE("frozen parameters act as constants") {
  Rng rng(4);
  Parameter w = param("w", {3}, rng, 0);
  Parameter f = param("f", {3}, rng, 1);
  f.frozen = true;
  Graph g;
  g.backward(dot(g.parameter(w), g.parameter(f)));
  const auto grads = g.parameter_grads();
  REQUIRE(grads.size() == 1);
  CHECK(grads[0].param == &w);
  CHECK(max_abs_diff(grads[0].dense, f.value) == 0.0);
}

TEST_CASE("leaf gradients and unreached nodes") {
  Graph g;
  Var x = g.leaf(Tensor::vector({1, 2, 3}));
  Var y = g.leaf(Tensor::vector({4}));
  g.backward(sum(mul(x, x)));
  CHECK(g.grad(x)[2] == 6.0);
  CHECK(g.grad(y)[0] == 0.0);
}

TEST_CASE("backward requires a scalar and shapes are checked") {
  Graph g;
  Var x = g.leaf(Tensor::vector({1, 2}));
  CHECK_THROWS_AS(g.backward(x), ShapeError);
  Var m = g.input(Tensor({2, 3}));
  CHECK_THROWS_AS(matmul(m, x), ShapeError);
  CHECK_THROWS_AS(add(x, g.input(Tensor::vector({1, 2, 3}))), ShapeError);
}

TEST_CASE("grad_check flags a wrong gradient") {
  Rng rng(5);
  Parameter p = param("p", {3}, rng, 0);
  Tensor wrong = p.value;  // d/dp of sum(p^2) is 2p, not p
  const auto report = grad_check(
      [&] {
        double s = 0;
        for (double v : p.value.data()) s += v * v;
        return s;
      },
      {{&p, wrong}});
  CHECK_FALSE(report.passed);
  CHECK(report.max_rel_error > 0.4);
  CHECK(report.worst.rfind("p[", 0) == 0);
}

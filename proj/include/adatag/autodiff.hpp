#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "adatag/tensor.hpp"

// Reverse-mode differentiation over dense Tensors.
//
// A Graph records operations as they are evaluated (define-by-run) and is
// thrown away after one backward pass. Creation order is a topological order,
// so backward() is a single reverse sweep. Parameters are borrowed, never
// copied: the graph keeps a pointer to Parameter::value and hands gradients
// back through parameter_grads(), which leaves accumulation (and any
// cross-thread reduction) to the caller.
namespace adatag::ad {

struct Parameter {
  std::string name;
  std::string group;
  Tensor value;
  bool frozen = false;
  std::size_t id = 0;  // position inside the owning ParamStore
};

class Graph;

class Var {
 public:
  Var() = default;
  Graph& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  friend class Graph;
  Var(Graph* g, int id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  int id_ = -1;
};

// Gradient for one parameter gathered out of a graph. Gather leaves produce
// row-sparse gradients (only the looked-up rows); everything else is dense.
struct ParamGrad {
  const Parameter* param = nullptr;
  bool sparse = false;
  Tensor dense;
  std::vector<std::size_t> rows;
  Tensor row_values;  // rows.size() x cols when sparse

  // Adds this gradient into a dense buffer shaped like the parameter.
  void add_to(Tensor& buffer) const;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // Constant: never receives a gradient.
  Var input(Tensor value);
  // Differentiable leaf owned by the graph; read its gradient with grad().
  Var leaf(Tensor value);
  // Borrowed parameter. Frozen parameters behave as constants.
  Var parameter(const Parameter& p);
  // Rows of an embedding table, shape [rows.size(), cols].
  Var gather(const Parameter& table, std::vector<std::size_t> rows);

  const Tensor& value(Var v) const { return value(v.id()); }
  const Tensor& value(int id) const;
  // Gradient of the last backward() target; zeros if v was not reached.
  Tensor grad(Var v) const;
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }

  // Reverse sweep from a scalar (one-element) node. Gradients from a
  // previous call are discarded first.
  void backward(Var loss);

  // One entry per distinct non-frozen parameter that was reached.
  std::vector<ParamGrad> parameter_grads() const;

  std::size_t size() const { return nodes_.size(); }

  // Op authoring interface. Parents that do not require a gradient are
  // skipped automatically by grad_ref callers checking requires_grad().
  Var record(Tensor value, std::vector<int> parents, BackwardFn backward);
  const std::vector<int>& parents(int id) const { return nodes_[id].parents; }
  const Tensor& grad_of(int id) const { return nodes_[id].grad; }
  // Lazily allocated gradient slot for accumulation.
  Tensor& grad_ref(int id);

 private:
  enum class Kind { kInput, kLeaf, kParameter, kGather, kOp };
  struct Node {
    Kind kind = Kind::kOp;
    Tensor value;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    std::vector<int> parents;
    BackwardFn backward;
    bool requires_grad = false;
    const Parameter* param = nullptr;
    std::vector<std::size_t> rows;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
};

// ---- ops ------------------------------------------------------------------
// Shape mismatches throw ShapeError naming the op and both shapes.

// [m,k]x[k,n] -> [m,n];  [m,k]x[k] -> [m];  [k]x[k,n] -> [n]
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
// M[L,n] + b[L] broadcast along columns.
Var add_column_bias(Var m, Var b);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a);      // 1-D
Var log_sum_exp(Var a);  // any rank -> scalar; max-shifted
Var concat(const std::vector<Var>& parts);  // 1-D parts -> 1-D
Var stack_rows(const std::vector<Var>& rows);  // k x [n] -> [k,n]
Var reshape(Var a, Shape shape);
Var transpose(Var a);  // 2-D
Var slice(Var a, std::size_t start, std::size_t length);  // 1-D
Var row(Var a, std::size_t r);  // 2-D -> 1-D
Var pick(Var a, std::size_t index);  // flat element -> scalar
Var sum(Var a);
Var mean(Var a);
Var dot(Var a, Var b);  // sum(mul(a, b))

// ---- gradient checking ----------------------------------------------------

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor for the relative error |a - n| / max(|a|, |n|, floor),
  // so that entries whose true gradient is ~0 are judged on absolute error.
  double abs_floor = 1e-6;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  std::string worst;  // "<param>[<flat index>]"
  bool passed = false;
};

// Compares supplied analytic gradients with central differences of
// loss_value(), perturbing each parameter element in place.
GradCheckReport grad_check(
    const std::function<double()>& loss_value,
    const std::vector<std::pair<Parameter*, Tensor>>& analytic,
    const GradCheckOptions& options = {});

// Convenience form: `build` records a scalar loss on a fresh graph.
GradCheckReport grad_check(const std::function<Var(Graph&)>& build,
                           const std::vector<Parameter*>& params,
                           const GradCheckOptions& options = {});

}  // namespace adatag::ad

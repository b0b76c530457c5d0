#include "adatag/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adatag/error.hpp"
#include "adatag/kernels.hpp"

namespace adatag::ad {

namespace {

[[noreturn]] void shape_error(const std::string& op, const Shape& a,
                              const Shape& b) {
  throw ShapeError(op + ": incompatible shapes " + shape_string(a) + " and " +
                   shape_string(b));
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

const Tensor& Var::value() const { return graph_->value(id_); }

void ParamGrad::add_to(Tensor& buffer) const {
  if (!sparse) {
    buffer += dense;
    return;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto dst = buffer.row(rows[i]);
    auto src = row_values.row(i);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

// ---- Graph ------------------------------------------------------------------

Var Graph::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Graph::input(Tensor value) {
  Node n;
  n.kind = Kind::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Graph::leaf(Tensor value) {
  Node n;
  n.kind = Kind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = true;
  return push(std::move(n));
}

Var Graph::parameter(const Parameter& p) {
  Node n;
  n.kind = Kind::kParameter;
  n.borrowed = &p.value;
  n.param = &p;
  n.requires_grad = !p.frozen;
  return push(std::move(n));
}

Var Graph::gather(const Parameter& table, std::vector<std::size_t> rows) {
  if (table.value.rank() != 2) {
    throw ShapeError("gather: table '" + table.name + "' has shape " +
                     shape_string(table.value.shape()));
  }
  const std::size_t cols = table.value.cols();
  Tensor out(Shape{rows.size(), cols});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= table.value.rows()) {
      throw ShapeError("gather: row " + std::to_string(rows[i]) +
                       " out of range for '" + table.name + "' " +
                       shape_string(table.value.shape()));
    }
    std::copy_n(table.value.row(rows[i]).begin(), cols, out.row(i).begin());
  }
  Node n;
  n.kind = Kind::kGather;
  n.value = std::move(out);
  n.param = &table;
  n.rows = std::move(rows);
  n.requires_grad = !table.frozen;
  return push(std::move(n));
}

const Tensor& Graph::value(int id) const {
  const Node& n = nodes_[id];
  return n.borrowed ? *n.borrowed : n.value;
}

Tensor Graph::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor(value(v.id()).shape());
  return n.grad;
}

Tensor& Graph::grad_ref(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

Var Graph::record(Tensor value, std::vector<int> parents, BackwardFn backward) {
  Node n;
  n.kind = Kind::kOp;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(), [&](int p) {
    return nodes_[p].requires_grad;
  });
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(backward);
  return push(std::move(n));
}

void Graph::backward(Var loss) {
  if (loss.graph_ != this) throw Error("backward: variable belongs to another graph");
  const Tensor& lv = value(loss.id());
  if (lv.size() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_string(lv.shape()));
  }
  for (Node& n : nodes_) n.grad = Tensor();
  if (!nodes_[loss.id()].requires_grad) return;
  grad_ref(loss.id())[0] = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.requires_grad || !n.backward) continue;
    n.backward(*this, id);
  }
}

std::vector<ParamGrad> Graph::parameter_grads() const {
  std::vector<ParamGrad> out;
  auto slot = [&](const Parameter* p) -> ParamGrad& {
    for (auto& g : out) {
      if (g.param == p) return g;
    }
    out.push_back(ParamGrad{});
    out.back().param = p;
    out.back().sparse = true;
    return out.back();
  };
  auto densify = [](ParamGrad& g) {
    if (!g.sparse) return;
    Tensor d(g.param->value.shape());
    g.add_to(d);
    g.dense = std::move(d);
    g.sparse = false;
    g.rows.clear();
    g.row_values = Tensor();
  };
  for (const Node& n : nodes_) {
    if (n.grad.empty() || !n.requires_grad) continue;
    if (n.kind == Kind::kParameter) {
      ParamGrad& g = slot(n.param);
      densify(g);
      if (g.dense.empty()) {
        g.dense = n.grad;
      } else {
        g.dense += n.grad;
      }
    } else if (n.kind == Kind::kGather) {
      ParamGrad& g = slot(n.param);
      if (!g.sparse) {
        ParamGrad tmp;
        tmp.param = n.param;
        tmp.sparse = true;
        tmp.rows = n.rows;
        tmp.row_values = n.grad;
        tmp.add_to(g.dense);
        continue;
      }
      const std::size_t cols = n.grad.cols();
      const std::size_t old = g.rows.size();
      std::vector<double> merged(g.row_values.values());
      merged.insert(merged.end(), n.grad.values().begin(), n.grad.values().end());
      g.rows.insert(g.rows.end(), n.rows.begin(), n.rows.end());
      g.row_values = Tensor(Shape{old + n.rows.size(), cols}, std::move(merged));
    }
  }
  // A sparse slot created but never filled cannot happen; slots start sparse
  // and are densified on the first dense contribution.
  return out;
}

// ---- ops --------------------------------------------------------------------

Var matmul(Var a, Var b) {
  Graph& g = a.graph();
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const int ia = a.id(), ib = b.id();
  if (av.rank() == 2 && bv.rank() == 2) {
    const std::size_t m = av.dim(0), k = av.dim(1), n = bv.dim(1);
    if (bv.dim(0) != k) shape_error("matmul", av.shape(), bv.shape());
    Tensor out(Shape{m, n});
    kernels::gemm(av.data(), bv.data(), out.data(), m, k, n);
    return g.record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Graph& gr, int self) {
      const Tensor& gout = gr.grad_of(self);
      if (gr.requires_grad(ia)) {
        kernels::gemm_nt_acc(gout.data(), gr.value(ib).data(),
                             gr.grad_ref(ia).data(), m, k, n);
      }
      if (gr.requires_grad(ib)) {
        kernels::gemm_tn_acc(gr.value(ia).data(), gout.data(),
                             gr.grad_ref(ib).data(), m, k, n);
      }
    });
  }
  if (av.rank() == 2 && bv.rank() == 1) {
    const std::size_t m = av.dim(0), k = av.dim(1);
    if (bv.dim(0) != k) shape_error("matmul", av.shape(), bv.shape());
    Tensor out(Shape{m});
    kernels::gemv(av.data(), m, k, bv.data(), out.data());
    return g.record(std::move(out), {ia, ib}, [ia, ib, m, k](Graph& gr, int self) {
      const Tensor& gout = gr.grad_of(self);
      if (gr.requires_grad(ia)) {
        kernels::ger(gr.grad_ref(ia).data(), m, k, gout.data(), gr.value(ib).data());
      }
      if (gr.requires_grad(ib)) {
        kernels::gemv_t_acc(gr.value(ia).data(), m, k, gout.data(),
                            gr.grad_ref(ib).data());
      }
    });
  }
  if (av.rank() == 1 && bv.rank() == 2) {
    const std::size_t k = bv.dim(0), n = bv.dim(1);
    if (av.dim(0) != k) shape_error("matmul", av.shape(), bv.shape());
    Tensor out(Shape{n});
    kernels::gemv_t_acc(bv.data(), k, n, av.data(), out.data());
    return g.record(std::move(out), {ia, ib}, [ia, ib, k, n](Graph& gr, int self) {
      const Tensor& gout = gr.grad_of(self);
      if (gr.requires_grad(ia)) {
        Tensor tmp(Shape{k});
        kernels::gemv(gr.value(ib).data(), k, n, gout.data(), tmp.data());
        gr.grad_ref(ia) += tmp;
      }
      if (gr.requires_grad(ib)) {
        kernels::ger(gr.grad_ref(ib).data(), k, n, gr.value(ia).data(), gout.data());
      }
    });
  }
  shape_error("matmul", av.shape(), bv.shape());
}

namespace {

template <typename Fwd, typename GradA, typename GradB>
Var elementwise(const char* name, Var a, Var b, Fwd fwd, GradA ga, GradB gb) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.shape() != bv.shape()) shape_error(name, av.shape(), bv.shape());
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i], bv[i]);
  const int ia = a.id(), ib = b.id();
  return a.graph().record(std::move(out), {ia, ib}, [=](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    const Tensor& x = gr.value(ia);
    const Tensor& y = gr.value(ib);
    if (gr.requires_grad(ia)) {
      Tensor& d = gr.grad_ref(ia);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += ga(gout[i], x[i], y[i]);
    }
    if (gr.requires_grad(ib)) {
      Tensor& d = gr.grad_ref(ib);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += gb(gout[i], x[i], y[i]);
    }
  });
}

// Unary op whose derivative is expressed through input x and output y.
template <typename Fwd, typename Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  const Tensor& av = a.value();
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const int ia = a.id();
  return a.graph().record(std::move(out), {ia}, [=](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    const Tensor& x = gr.value(ia);
    const Tensor& y = gr.value(self);
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += gout[i] * deriv(x[i], y[i]);
  });
}

}  // namespace

Var add(Var a, Var b) {
  return elementwise(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return g; });
}

Var sub(Var a, Var b) {
  return elementwise(
      "sub", a, b, [](double x, double y) { return x - y; },
      [](double g, double, double) { return g; },
      [](double g, double, double) { return -g; });
}

Var mul(Var a, Var b) {
  return elementwise(
      "mul", a, b, [](double x, double y) { return x * y; },
      [](double g, double, double y) { return g * y; },
      [](double g, double x, double) { return g * x; });
}

Var scale(Var a, double c) {
  return unary(
      a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var add_column_bias(Var m, Var b) {
  const Tensor& mv = m.value();
  const Tensor& bv = b.value();
  if (mv.rank() != 2 || bv.rank() != 1 || bv.dim(0) != mv.dim(0)) {
    shape_error("add_column_bias", mv.shape(), bv.shape());
  }
  const std::size_t rows = mv.dim(0), cols = mv.dim(1);
  Tensor out = mv;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) out.at(i, j) += bv[i];
  }
  const int im = m.id(), ib = b.id();
  return m.graph().record(std::move(out), {im, ib}, [=](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    if (gr.requires_grad(im)) gr.grad_ref(im) += gout;
    if (gr.requires_grad(ib)) {
      Tensor& d = gr.grad_ref(ib);
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) d[i] += gout.at(i, j);
      }
    }
  });
}

Var softmax(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 1) throw ShapeError("softmax: expects 1-D, got " + shape_string(av.shape()));
  const double mx = *std::max_element(av.data().begin(), av.data().end());
  Tensor out(av.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) z += (out[i] = std::exp(av[i] - mx));
  for (std::size_t i = 0; i < av.size(); ++i) out[i] /= z;
  const int ia = a.id();
  return a.graph().record(std::move(out), {ia}, [ia](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    const Tensor& y = gr.value(self);
    double inner = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) inner += gout[i] * y[i];
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < y.size(); ++i) d[i] += y[i] * (gout[i] - inner);
  });
}

Var log_sum_exp(Var a) {
  const Tensor& av = a.value();
  if (av.empty()) throw ShapeError("log_sum_exp: empty input");
  const double mx = *std::max_element(av.data().begin(), av.data().end());
  double result = mx;
  if (std::isfinite(mx)) {
    double s = 0.0;
    for (double v : av.data()) s += std::exp(v - mx);
    result = mx + std::log(s);
  }
  const int ia = a.id();
  return a.graph().record(Tensor::scalar(result), {ia}, [ia](Graph& gr, int self) {
    const double g = gr.grad_of(self)[0];
    const double lse = gr.value(self)[0];
    const Tensor& x = gr.value(ia);
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < x.size(); ++i) d[i] += g * std::exp(x[i] - lse);
  });
}

Var concat(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  std::vector<double> data;
  std::vector<int> ids;
  std::vector<std::size_t> lengths;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    if (v.rank() != 1) throw ShapeError("concat: expects 1-D parts, got " + shape_string(v.shape()));
    data.insert(data.end(), v.data().begin(), v.data().end());
    ids.push_back(p.id());
    lengths.push_back(v.size());
  }
  Tensor out = Tensor::vector(std::move(data));
  return parts.front().graph().record(std::move(out), ids, [ids, lengths](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    std::size_t off = 0;
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (gr.requires_grad(ids[p])) {
        Tensor& d = gr.grad_ref(ids[p]);
        for (std::size_t i = 0; i < lengths[p]; ++i) d[i] += gout[off + i];
      }
      off += lengths[p];
    }
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw ShapeError("stack_rows: no inputs");
  const Shape& first = rows.front().shape();
  if (first.size() != 1) throw ShapeError("stack_rows: expects 1-D rows, got " + shape_string(first));
  std::vector<double> data;
  std::vector<int> ids;
  for (const Var& r : rows) {
    if (r.shape() != first) shape_error("stack_rows", first, r.shape());
    data.insert(data.end(), r.value().data().begin(), r.value().data().end());
    ids.push_back(r.id());
  }
  const std::size_t width = first[0];
  Tensor out(Shape{rows.size(), width}, std::move(data));
  return rows.front().graph().record(std::move(out), ids, [ids, width](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (!gr.requires_grad(ids[r])) continue;
      Tensor& d = gr.grad_ref(ids[r]);
      for (std::size_t j = 0; j < width; ++j) d[j] += gout[r * width + j];
    }
  });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  const int ia = a.id();
  return a.graph().record(std::move(out), {ia}, [ia](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += gout[i];
  });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 2) throw ShapeError("transpose: expects 2-D, got " + shape_string(av.shape()));
  const std::size_t r = av.dim(0), c = av.dim(1);
  Tensor out(Shape{c, r});
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = av.at(i, j);
  }
  const int ia = a.id();
  return a.graph().record(std::move(out), {ia}, [ia, r, c](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) d.at(i, j) += gout.at(j, i);
    }
  });
}

Var slice(Var a, std::size_t start, std::size_t length) {
  const Tensor& av = a.value();
  if (av.rank() != 1 || start + length > av.size()) {
    throw ShapeError("slice: [" + std::to_string(start) + ", " +
                     std::to_string(start + length) + ") out of " +
                     shape_string(av.shape()));
  }
  std::vector<double> data(av.data().begin() + start,
                           av.data().begin() + start + length);
  const int ia = a.id();
  return a.graph().record(Tensor::vector(std::move(data)), {ia},
                          [ia, start, length](Graph& gr, int self) {
                            const Tensor& gout = gr.grad_of(self);
                            Tensor& d = gr.grad_ref(ia);
                            for (std::size_t i = 0; i < length; ++i) d[start + i] += gout[i];
                          });
}

Var row(Var a, std::size_t r) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || r >= av.dim(0)) {
    throw ShapeError("row: index " + std::to_string(r) + " out of " +
                     shape_string(av.shape()));
  }
  auto src = av.row(r);
  const std::size_t width = src.size();
  Tensor out = Tensor::vector(std::vector<double>(src.begin(), src.end()));
  const int ia = a.id();
  return a.graph().record(std::move(out), {ia}, [ia, r, width](Graph& gr, int self) {
    const Tensor& gout = gr.grad_of(self);
    auto dst = gr.grad_ref(ia).row(r);
    for (std::size_t j = 0; j < width; ++j) dst[j] += gout[j];
  });
}

Var pick(Var a, std::size_t index) {
  const Tensor& av = a.value();
  if (index >= av.size()) {
    throw ShapeError("pick: index " + std::to_string(index) + " out of " +
                     shape_string(av.shape()));
  }
  const int ia = a.id();
  return a.graph().record(Tensor::scalar(av[index]), {ia}, [ia, index](Graph& gr, int self) {
    gr.grad_ref(ia)[index] += gr.grad_of(self)[0];
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id();
  return a.graph().record(Tensor::scalar(s), {ia}, [ia](Graph& gr, int self) {
    const double g = gr.grad_of(self)[0];
    Tensor& d = gr.grad_ref(ia);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean: empty input");
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id();
  return a.graph().record(Tensor::scalar(s / static_cast<double>(n)), {ia},
                          [ia, n](Graph& gr, int self) {
                            const double g = gr.grad_of(self)[0] / static_cast<double>(n);
                            Tensor& d = gr.grad_ref(ia);
                            for (std::size_t i = 0; i < d.size(); ++i) d[i] += g;
                          });
}

Var dot(Var a, Var b) { return sum(mul(a, b)); }

// ---- gradient checking ------------------------------------------------------

GradCheckReport grad_check(
    const std::function<double()>& loss_value,
    const std::vector<std::pair<Parameter*, Tensor>>& analytic,
    const GradCheckOptions& options) {
  GradCheckReport report;
  for (const auto& [param, grad] : analytic) {
    Tensor& v = param->value;
    if (grad.size() != v.size()) {
      throw ShapeError("grad_check: gradient for '" + param->name + "' has shape " +
                       shape_string(grad.shape()) + ", parameter " +
                       shape_string(v.shape()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double orig = v[i];
      v[i] = orig + options.step;
      const double fp = loss_value();
      v[i] = orig - options.step;
      const double fm = loss_value();
      v[i] = orig;
      const double numeric = (fp - fm) / (2.0 * options.step);
      const double abs_err = std::abs(numeric - grad[i]);
      const double denom =
          std::max({std::abs(numeric), std::abs(grad[i]), options.abs_floor});
      double rel = abs_err / denom;
      if (!std::isfinite(rel)) rel = std::numeric_limits<double>::infinity();
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (report.checked == 0 || rel > report.max_rel_error) {
        report.worst = param->name + "[" + std::to_string(i) + "]";
        report.max_rel_error = rel;
      }
      ++report.checked;
    }
  }
  report.passed = std::isfinite(report.max_rel_error) &&
                  report.max_rel_error <= options.tolerance;
  return report;
}

GradCheckReport grad_check(const std::function<Var(Graph&)>& build,
                           const std::vector<Parameter*>& params,
                           const GradCheckOptions& options) {
  std::vector<std::pair<Parameter*, Tensor>> analytic;
  {
    Graph g;
    Var loss = build(g);
    g.backward(loss);
    const auto grads = g.parameter_grads();
    for (Parameter* p : params) {
      Tensor buf(p->value.shape());
      for (const auto& pg : grads) {
        if (pg.param == p) pg.add_to(buf);
      }
      analytic.emplace_back(p, std::move(buf));
    }
  }
  auto value = [&build]() {
    Graph g;
    return build(g).value().item();
  };
  return grad_check(value, analytic, options);
}

}  // namespace adatag::ad

#include "adatag/training.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include <json.hpp>
#include <omp.h>

#include "adatag/crf.hpp"
#include "adatag/error.hpp"
#include "adatag/evaluation.hpp"
#include "adatag/io.hpp"
#include "adatag/random.hpp"

namespace adatag::training {

namespace {

double item_nll(const Model& model, const TrainItem& item, const decoder::DecoderInstance& head) {
  const Tensor h = model.encode(item.attribute, item.words);
  return crf::nll(decoder::emissions(h, head.weight, head.bias), head.transitions, item.tags);
}

struct ExampleGrad {
  double loss = 0.0;
  std::vector<ad::ParamGrad> params;
  Tensor d_weight, d_bias, d_transitions;
};

}  // namespace

double batch_loss(const Model& model, std::span<const TrainItem> batch) {
  if (batch.empty()) return 0.0;
  std::vector<std::optional<decoder::DecoderInstance>> heads(model.num_heads());
  double total = 0.0;
  for (const auto& item : batch) {
    auto& head = heads.at(item.head);
    if (!head) head = model.head_instance(item.head);
    total += item_nll(model, item, *head);
  }
  return total / static_cast<double>(batch.size());
}

double batch_loss(const Model& model, const std::vector<corpus::LabeledExample>& batch) {
  for (const auto& ex : batch) model.attribute_index(ex.attribute);
  const auto items = model.prepare(batch);
  return batch_loss(model, items);
}

double batch_gradients(const Model& model, std::span<const TrainItem> batch, GradientBuffer& grads) {
  grads.clear();
  if (batch.empty()) return 0.0;

  // Stage 1: decoder parameters for each head in the batch.
  std::vector<std::size_t> heads;
  for (const auto& item : batch) heads.push_back(item.head);
  std::sort(heads.begin(), heads.end());
  heads.erase(std::unique(heads.begin(), heads.end()), heads.end());
  auto slot_of = [&](std::size_t head) {
    return static_cast<std::size_t>(std::lower_bound(heads.begin(), heads.end(), head) - heads.begin());
  };
  ad::Graph head_graph;
  std::vector<decoder::DecoderVars> head_vars;
  for (std::size_t h : heads) head_vars.push_back(model.head_vars(head_graph, h));

  // Stage 2: per-example graphs with the decoder parameters as leaves.
  std::vector<ExampleGrad> local(batch.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const TrainItem& item = batch[i];
      const auto& hv = head_vars[slot_of(item.head)];
      ad::Graph g;
      ad::Var w = g.leaf(hv.weight.value());
      ad::Var b = g.leaf(hv.bias.value());
      ad::Var t = g.leaf(hv.transitions.value());
      ad::Var h = model.encode(g, item.attribute, item.words);
      ad::Var loss = crf::nll(decoder::emissions(h, w, b), t, item.tags);
      g.backward(loss);
      auto& out = local[i];
      out.loss = loss.value().item();
      out.params = g.parameter_grads();
      out.d_weight = g.grad(w);
      out.d_bias = g.grad(b);
      out.d_transitions = g.grad(t);
    } catch (...) {
#pragma omp critical(adatag_batch_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  double total = 0.0;
  std::vector<ExampleGrad> per_head(heads.size());
  for (std::size_t s = 0; s < heads.size(); ++s) {
    per_head[s].d_weight = Tensor(head_vars[s].weight.shape());
    per_head[s].d_bias = Tensor(head_vars[s].bias.shape());
    per_head[s].d_transitions = Tensor(head_vars[s].transitions.shape());
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto& e = local[i];
    total += e.loss;
    for (const auto& pg : e.params) grads.add(pg);
    auto& acc = per_head[slot_of(batch[i].head)];
    acc.d_weight += e.d_weight;
    acc.d_bias += e.d_bias;
    acc.d_transitions += e.d_transitions;
  }

  // Stage 3: push the decoder gradients back through the head graph.
  ad::Var surrogate;
  for (std::size_t s = 0; s < heads.size(); ++s) {
    const auto& hv = head_vars[s];
    for (auto [var, grad] : {std::pair{hv.weight, &per_head[s].d_weight},
                             std::pair{hv.bias, &per_head[s].d_bias},
                             std::pair{hv.transitions, &per_head[s].d_transitions}}) {
      ad::Var term = ad::dot(var, head_graph.input(*grad));
      surrogate = surrogate.valid() ? ad::add(surrogate, term) : term;
    }
  }
  head_graph.backward(surrogate);
  for (const auto& pg : head_graph.parameter_grads()) grads.add(pg);

  const double inv = 1.0 / static_cast<double>(batch.size());
  grads.scale(inv);
  return total * inv;
}

bool EarlyStopping::update(double score) {
  ++epoch_;
  if (best_epoch_ == 0 || score > best_) {
    best_ = score;
    best_epoch_ = epoch_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

namespace {

using Snapshot = std::vector<Tensor>;

Snapshot capture(const std::vector<ad::Parameter*>& params) {
  Snapshot s;
  for (const auto* p : params) s.push_back(p->value);
  return s;
}

void restore(const std::vector<ad::Parameter*>& params, const Snapshot& s) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = s[i];
}

void round_params(const std::vector<ad::Parameter*>& params) {
  for (auto* p : params) {
    for (double& v : p->value.data()) v = static_cast<double>(static_cast<float>(v));
  }
}

double dev_macro_f1(const Model& model, const std::vector<corpus::LabeledExample>& dev) {
  return eval::score(eval::predict(model, dev)).macro_f1();
}

RunReport run(Model& model, const std::vector<TrainItem>& items,
              const std::vector<corpus::LabeledExample>& dev, const std::vector<ad::Parameter*>& params,
              std::uint64_t seed, const std::string& attribute, const TrainOptions& options) {
  const TrainConfig& config = model.config();
  RunReport report;
  report.attribute = attribute;
  report.train_items = items.size();

  Adam adam({config.learning_rate, config.beta1, config.beta2, config.epsilon});
  GradientBuffer grads;
  Rng rng(seed);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  Snapshot best;
  EarlyStopping stopping(config.patience);
  std::vector<TrainItem> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += config.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(items[order[i]]);
      const double loss = batch_gradients(model, batch, grads);
      if (!std::isfinite(loss)) {
        std::string ids;
        for (const auto& item : batch) ids += (ids.empty() ? "" : ",") + item.source_id;
        throw NumericalError("non-finite loss " + std::to_string(loss) + " at epoch " +
                             std::to_string(epoch) + " batch " + std::to_string(b) +
                             (attribute.empty() ? "" : " (attribute " + attribute + ")") +
                             "; examples: " + ids);
      }
      adam.step(params, grads);
      total += loss * static_cast<double>(batch.size());
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_nll = items.empty() ? 0.0 : total / static_cast<double>(items.size());
    const Snapshot working = capture(params);
    round_params(params);
    log.dev_macro_f1 = dev_macro_f1(model, dev);
    log.improved = stopping.update(log.dev_macro_f1);
    if (log.improved) best = capture(params);
    restore(params, working);
    report.epochs.push_back(log);
    report.stopped_epoch = epoch;
    if (options.on_epoch) options.on_epoch(report, log);
    if (stopping.should_stop()) {
      report.early_stopped = true;
      break;
    }
  }
  if (!best.empty()) restore(params, best);
  report.best_epoch = stopping.best_epoch();
  report.best_dev_macro_f1 = stopping.best();
  return report;
}

std::uint64_t run_seed(std::uint64_t seed, const std::string& attribute) {
  return io::fnv1a("shuffle:" + attribute) ^ (seed * 0x9E3779B97F4A7C15ULL);
}

}  // namespace

TrainReport train(Model& model, const std::vector<corpus::LabeledExample>& train_set,
                  const std::vector<corpus::LabeledExample>& dev_set, const TrainOptions& options) {
  const TrainConfig& config = model.config();
  if (config.threads > 0) omp_set_num_threads(static_cast<int>(config.threads));

  std::vector<corpus::LabeledExample> dev;
  for (const auto& ex : dev_set) {
    if (model.attributes().contains(ex.attribute)) dev.push_back(ex);
  }
  TrainReport report;
  report.variant = config.variant;
  const auto items = model.prepare(train_set, &report.dropped_spans);
  if (items.empty()) throw DataError("no training examples for the model's attributes");
  if (dev.empty()) throw DataError("no dev examples for the model's attributes");

  if (config.variant == Variant::kPerAttribute) {
    for (std::size_t a = 0; a < model.attributes().size(); ++a) {
      const std::string& id = model.attributes().entries()[a].id;
      std::vector<TrainItem> mine;
      for (const auto& item : items) {
        if (item.attribute == a) mine.push_back(item);
      }
      std::vector<corpus::LabeledExample> mine_dev;
      for (const auto& ex : dev) {
        if (ex.attribute == id) mine_dev.push_back(ex);
      }
      if (mine.empty() || mine_dev.empty()) continue;
      report.runs.push_back(run(model, mine, mine_dev, model.trainable_parameters(a),
                                run_seed(config.seed, id), id, options));
    }
  } else {
    report.runs.push_back(
        run(model, items, dev, model.trainable_parameters(), run_seed(config.seed, ""), "", options));
  }
  model.params().round_to_float();
  report.dev_macro_f1 = dev_macro_f1(model, dev);
  return report;
}

std::string TrainReport::to_json() const {
  nlohmann::json j;
  j["variant"] = to_string(variant);
  j["dev_macro_f1"] = dev_macro_f1;
  j["dropped_spans"] = dropped_spans;
  j["checkpoint"] = checkpoint;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json jr;
    jr["attribute"] = r.attribute;
    jr["train_items"] = r.train_items;
    jr["best_epoch"] = r.best_epoch;
    jr["best_dev_macro_f1"] = r.best_dev_macro_f1;
    jr["stopped_epoch"] = r.stopped_epoch;
    jr["early_stopped"] = r.early_stopped;
    jr["epochs"] = nlohmann::json::array();
    for (const auto& e : r.epochs) {
      jr["epochs"].push_back({{"epoch", e.epoch},
                              {"train_nll", e.train_nll},
                              {"dev_macro_f1", e.dev_macro_f1},
                              {"improved", e.improved}});
    }
    j["runs"].push_back(jr);
  }
  return j.dump(2);
}

}  // namespace adatag::training

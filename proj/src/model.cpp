#include "adatag/model.hpp"

#include <algorithm>
#include <cmath>

#include "adatag/crf.hpp"
#include "adatag/error.hpp"
#include "adatag/random.hpp"

namespace adatag {

namespace {

constexpr std::size_t kRandomEmbeddingDim = 1536;

bool is_adaptive(Variant v) {
  return v == Variant::kAdaTag || v == Variant::kAdaTagRandomEmb;
}

bool per_attribute_encoder(Variant v) {
  return v == Variant::kPerAttribute || v == Variant::kSharedEmb;
}

std::uint64_t tensor_seed(std::uint64_t seed, const std::string& name) {
  return io::fnv1a(name) ^ (seed * 0x9E3779B97F4A7C15ULL);
}

std::size_t resolve_d_r(const TrainConfig& config, const attributes::AttributeEmbeddingTable* table) {
  if (config.variant == Variant::kAdaTagRandomEmb) {
    return config.d_r ? config.d_r : kRandomEmbeddingDim;
  }
  if (config.variant != Variant::kAdaTag) return 0;
  if (!table) throw DataError("the adatag variant needs an attribute embedding table");
  if (config.d_r && config.d_r != table->dim()) {
    throw DataError("config d_r = " + std::to_string(config.d_r) +
                    " but the attribute table has width " + std::to_string(table->dim()));
  }
  return table->dim();
}

}  // namespace

// ---- ParamStore -------------------------------------------------------------

ad::Parameter& ParamStore::add(std::string name, std::string group, Tensor value, bool frozen) {
  if (index_.count(name)) throw DataError("duplicate parameter '" + name + "'");
  ad::Parameter p;
  p.name = std::move(name);
  p.group = std::move(group);
  p.value = std::move(value);
  p.frozen = frozen;
  p.id = params_.size();
  index_.emplace(p.name, p.id);
  params_.push_back(std::move(p));
  return params_.back();
}

ad::Parameter& ParamStore::at(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw DataError("no parameter named '" + std::string(name) + "'");
  return params_[it->second];
}

const ad::Parameter& ParamStore::at(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw DataError("no parameter named '" + std::string(name) + "'");
  return params_[it->second];
}

bool ParamStore::contains(std::string_view name) const {
  return index_.count(std::string(name)) > 0;
}

void ParamStore::round_to_float() {
  for (auto& p : params_) {
    for (double& v : p.value.data()) v = static_cast<double>(static_cast<float>(v));
  }
}

// ---- layout -----------------------------------------------------------------

std::vector<ParamSpec> parameter_layout(const TrainConfig& config, const LayoutInputs& in) {
  config.validate();
  if (in.attributes.empty()) throw DataError("model needs at least one attribute");
  const std::size_t u = config.d_h / 2;
  const std::size_t d_in = config.d_word;
  const std::size_t n_attr = in.attributes.size();
  std::vector<ParamSpec> out;
  auto scale = [](std::size_t fan_in) { return 1.0 / std::sqrt(static_cast<double>(fan_in)); };

  auto word_table = [&](const std::string& prefix) {
    out.push_back({prefix + "W_word", "encoder", {in.vocab_size, config.d_word}, false, 0.0});
  };
  auto lstm = [&](const std::string& prefix) {
    const double s = scale(d_in + u);
    for (const char* dir : {"lstm_fwd.", "lstm_bwd."}) {
      out.push_back({prefix + dir + "W", "encoder", {4 * u, d_in + u}, false, s});
      out.push_back({prefix + dir + "b", "encoder", {4 * u}, false, s});
    }
  };
  auto crf_head = [&](const std::string& prefix, std::size_t tags) {
    out.push_back({prefix + "W", "decoder", {tags, config.d_h}, false, scale(config.d_h)});
    out.push_back({prefix + "b", "decoder", {tags}, false, scale(config.d_h)});
    out.push_back({prefix + "T", "decoder", {tags, tags}, false, scale(tags)});
  };

  switch (config.variant) {
    case Variant::kAdaTag:
    case Variant::kAdaTagRandomEmb: {
      if (in.d_r == 0) throw DataError("adaptive decoder needs d_r >= 1");
      const std::size_t d_r = in.d_r;
      constexpr std::size_t L = tagging::kNumTags;
      word_table("encoder.");
      lstm("encoder.");
      out.push_back({"hyper.W_hyper_w", "hyper", {L * config.d_h, d_r}, false, scale(d_r)});
      out.push_back({"hyper.b_hyper_w", "hyper", {L * config.d_h}, false, scale(d_r)});
      out.push_back({"hyper.W_hyper_b", "hyper", {L, d_r}, false, scale(d_r)});
      out.push_back({"hyper.b_hyper_b", "hyper", {L}, false, scale(d_r)});
      out.push_back({"moe.W_moe", "moe", {config.k, d_r}, false, scale(d_r)});
      out.push_back({"moe.b_moe", "moe", {config.k}, false, scale(d_r)});
      out.push_back({"moe.T_experts", "moe", {config.k, L, L}, false, scale(L)});
      const bool frozen = config.variant == Variant::kAdaTag && config.freeze_attribute_embeddings;
      out.push_back({"attribute.W_att", "attribute", {n_attr, d_r}, frozen, 0.0});
      break;
    }
    case Variant::kBiLstmMultiCrf:
      word_table("encoder.");
      lstm("encoder.");
      for (const auto& a : in.attributes) crf_head("crf." + a + ".", tagging::kNumTags);
      break;
    case Variant::kNTagSets:
      word_table("encoder.");
      lstm("encoder.");
      crf_head("crf.", 3 * n_attr + 1);
      break;
    case Variant::kPerAttribute:
      for (const auto& a : in.attributes) {
        word_table("encoder." + a + ".");
        lstm("encoder." + a + ".");
        crf_head("crf." + a + ".", tagging::kNumTags);
      }
      break;
    case Variant::kSharedEmb:
      word_table("encoder.");
      for (const auto& a : in.attributes) {
        lstm("encoder." + a + ".");
        crf_head("crf." + a + ".", tagging::kNumTags);
      }
      break;
  }
  return out;
}

ParamCount param_count(const std::vector<ParamSpec>& layout) {
  ParamCount c;
  for (const auto& spec : layout) {
    const std::size_t n = shape_size(spec.shape);
    c.tensors.push_back({spec.name, spec.group, spec.shape, n, spec.frozen});
    c.groups[spec.group] += n;
    c.total += n;
    if (!spec.frozen) c.trainable += n;
  }
  return c;
}

ParamCount param_count(const ParamStore& store) {
  std::vector<ParamSpec> layout;
  for (const auto& p : store.all()) layout.push_back({p.name, p.group, p.value.shape(), p.frozen, 0.0});
  return param_count(layout);
}

ParamCount param_count(const TrainConfig& config) {
  LayoutInputs in;
  in.vocab_size = config.vocab_size;
  const std::size_t n = config.num_attributes ? config.num_attributes : 1;
  for (std::size_t i = 0; i < n; ++i) in.attributes.push_back("attr" + std::to_string(i));
  in.d_r = config.d_r;
  if (config.variant == Variant::kAdaTagRandomEmb && in.d_r == 0) in.d_r = kRandomEmbeddingDim;
  return param_count(parameter_layout(config, in));
}

// ---- Model ------------------------------------------------------------------

Model Model::build(const TrainConfig& config_in, encoder::WordVocab words,
                   corpus::AttributeVocab attributes,
                   const attributes::AttributeEmbeddingTable* table,
                   const io::WordVectors* word_vectors) {
  TrainConfig config = config_in;
  config.validate();
  if (!config.attributes.empty()) attributes = attributes.subset(config.attributes);
  config.d_r = resolve_d_r(config, table);

  attributes::AttributeEmbeddingTable random;
  if (config.variant == Variant::kAdaTagRandomEmb) {
    random = attributes::random_table(attributes, config.d_r, tensor_seed(config.seed, "attribute.W_att"));
    table = &random;
  }

  LayoutInputs in{words.size(), attributes.ids(), config.d_r};
  ParamStore store;
  for (const auto& spec : parameter_layout(config, in)) {
    Tensor value(spec.shape);
    if (spec.name.ends_with("W_word")) {
      value = encoder::init_word_embeddings(words, config.d_word, word_vectors,
                                            tensor_seed(config.seed, spec.name));
    } else if (spec.group == "attribute") {
      value = table->matrix(attributes);
    } else {
      Rng rng(tensor_seed(config.seed, spec.name));
      for (double& v : value.data()) v = rng.uniform(-spec.init_scale, spec.init_scale);
    }
    store.add(spec.name, spec.group, std::move(value), spec.frozen);
  }
  // Start from float32-representable values so frozen tensors survive a
  // checkpoint round trip bit for bit.
  store.round_to_float();
  return Model(std::move(config), std::move(words), std::move(attributes), std::move(store));
}

Model::Model(TrainConfig config, encoder::WordVocab words, corpus::AttributeVocab attributes,
             ParamStore params)
    : config_(std::move(config)),
      words_(std::move(words)),
      attributes_(std::move(attributes)),
      params_(std::move(params)) {
  if (config_.variant == Variant::kNTagSets) tag_set_.emplace(attributes_.ids());
  const auto layout = parameter_layout(config_, LayoutInputs{words_.size(), attributes_.ids(), config_.d_r});
  if (layout.size() != params_.size()) {
    throw DataError("model has " + std::to_string(params_.size()) + " tensors, variant " +
                    to_string(config_.variant) + " expects " + std::to_string(layout.size()));
  }
  for (const auto& spec : layout) {
    if (!params_.contains(spec.name)) throw DataError("missing parameter '" + spec.name + "'");
    const auto& p = params_.at(spec.name);
    if (p.value.shape() != spec.shape) {
      throw DataError("parameter '" + spec.name + "' has shape " + shape_string(p.value.shape()) +
                      ", expected " + shape_string(spec.shape));
    }
  }
}

std::size_t Model::num_tags() const {
  return tag_set_ ? tag_set_->size() : tagging::kNumTags;
}

std::size_t Model::num_heads() const { return tag_set_ ? 1 : attributes_.size(); }

std::size_t Model::head_of(std::size_t attribute) const {
  if (attribute >= attributes_.size()) throw DataError("attribute index out of range");
  return tag_set_ ? 0 : attribute;
}

std::string Model::encoder_prefix(std::size_t attribute) const {
  if (per_attribute_encoder(config_.variant)) {
    return "encoder." + attributes_.entries()[attribute].id + ".";
  }
  return "encoder.";
}

std::string Model::table_name(std::size_t attribute) const {
  if (config_.variant == Variant::kPerAttribute) {
    return "encoder." + attributes_.entries()[attribute].id + ".W_word";
  }
  return "encoder.W_word";
}

decoder::DecoderVars Model::head_vars(ad::Graph& g, std::size_t head) const {
  auto p = [&](const std::string& name) { return g.parameter(params_.at(name)); };
  if (is_adaptive(config_.variant)) {
    ad::Var r = ad::row(g.gather(params_.at("attribute.W_att"), {head}), 0);
    decoder::HyperVars hyper{p("hyper.W_hyper_w"), p("hyper.b_hyper_w"), p("hyper.W_hyper_b"),
                             p("hyper.b_hyper_b")};
    decoder::MoeVars moe{p("moe.W_moe"), p("moe.b_moe"), p("moe.T_experts")};
    return decoder::generate(r, hyper, moe);
  }
  const std::string prefix = tag_set_ ? "crf." : "crf." + attributes_.entries()[head].id + ".";
  return {p(prefix + "W"), p(prefix + "b"), p(prefix + "T")};
}

ad::Var Model::encode(ad::Graph& g, std::size_t attribute,
                      const std::vector<std::size_t>& words) const {
  const std::string prefix = encoder_prefix(attribute);
  auto p = [&](const std::string& name) { return g.parameter(params_.at(prefix + name)); };
  ad::Var x = g.gather(params_.at(table_name(attribute)), words);
  return encoder::bilstm(x, p("lstm_fwd.W"), p("lstm_fwd.b"), p("lstm_bwd.W"), p("lstm_bwd.b"));
}

decoder::DecoderInstance Model::head_instance(std::size_t head) const {
  auto v = [&](const std::string& name) -> const Tensor& { return params_.at(name).value; };
  if (is_adaptive(config_.variant)) {
    const Tensor& table = v("attribute.W_att");
    auto row = table.row(head);
    const Tensor r = Tensor::vector(std::vector<double>(row.begin(), row.end()));
    return decoder::generate(
        r, {v("hyper.W_hyper_w"), v("hyper.b_hyper_w"), v("hyper.W_hyper_b"), v("hyper.b_hyper_b")},
        {v("moe.W_moe"), v("moe.b_moe"), v("moe.T_experts")});
  }
  const std::string prefix = tag_set_ ? "crf." : "crf." + attributes_.entries()[head].id + ".";
  return {v(prefix + "W"), v(prefix + "b"), v(prefix + "T")};
}

Tensor Model::encode(std::size_t attribute, const std::vector<std::size_t>& words) const {
  const std::string prefix = encoder_prefix(attribute);
  auto v = [&](const std::string& name) -> const Tensor& { return params_.at(prefix + name).value; };
  const Tensor x = encoder::embed(params_.at(table_name(attribute)).value, words);
  return encoder::bilstm(x, v("lstm_fwd.W"), v("lstm_fwd.b"), v("lstm_bwd.W"), v("lstm_bwd.b"));
}

Tensor Model::emissions(std::size_t attribute, const std::vector<corpus::Token>& tokens,
                        const decoder::DecoderInstance& head) const {
  return decoder::emissions(encode(attribute, words_.lookup(tokens)), head.weight, head.bias);
}

tagging::TagSeq Model::predict_tags(std::size_t attribute, const std::vector<corpus::Token>& tokens,
                                    const decoder::DecoderInstance& head) const {
  if (tokens.empty()) return {};
  const auto path = crf::viterbi(emissions(attribute, tokens, head), head.transitions);
  if (tag_set_) return tag_set_->project(path.tags, attribute);
  return tagging::from_indices(path.tags);
}

tagging::TagSeq Model::predict_tags(std::size_t attribute,
                                    const std::vector<corpus::Token>& tokens) const {
  return predict_tags(attribute, tokens, head_instance(head_of(attribute)));
}

std::vector<TrainItem> Model::prepare(const std::vector<corpus::LabeledExample>& examples,
                                      std::size_t* dropped_spans) const {
  std::vector<TrainItem> items;
  if (dropped_spans) *dropped_spans = 0;
  if (!tag_set_) {
    for (const auto& ex : examples) {
      if (!attributes_.contains(ex.attribute) || ex.tokens.empty()) continue;
      TrainItem item;
      item.attribute = attributes_.index(ex.attribute);
      item.head = head_of(item.attribute);
      item.words = words_.lookup(ex.tokens);
      item.tags = tagging::index_sequence(ex.tags);
      item.source_id = ex.id;
      items.push_back(std::move(item));
    }
    return items;
  }
  // One merged sequence per (product, field, text).
  std::vector<std::string> order;
  std::map<std::string, std::vector<const corpus::LabeledExample*>> groups;
  for (const auto& ex : examples) {
    if (!attributes_.contains(ex.attribute) || ex.tokens.empty()) continue;
    const std::string key = ex.id + '\x1f' + corpus::to_string(ex.source) + '\x1f' + ex.text;
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(&ex);
  }
  for (const auto& key : order) {
    auto& group = groups[key];
    std::vector<std::pair<std::size_t, tagging::TagSeq>> per_attr;
    for (const auto* ex : group) per_attr.emplace_back(attributes_.index(ex->attribute), ex->tags);
    std::stable_sort(per_attr.begin(), per_attr.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto merged = tag_set_->merge(per_attr, group.front()->tokens.size());
    if (dropped_spans) *dropped_spans += merged.dropped_spans;
    TrainItem item;
    item.attribute = per_attr.front().first;
    item.head = 0;
    item.words = words_.lookup(group.front()->tokens);
    item.tags = merged.tags;
    item.source_id = group.front()->id;
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<ad::Parameter*> Model::trainable_parameters(std::optional<std::size_t> attribute) {
  std::vector<ad::Parameter*> out;
  std::vector<std::string> prefixes;
  if (attribute && config_.variant == Variant::kPerAttribute) {
    const std::string& id = attributes_.entries().at(*attribute).id;
    prefixes = {"encoder." + id + ".", "crf." + id + "."};
  }
  for (auto& p : params_.all()) {
    if (p.frozen) continue;
    if (!prefixes.empty() &&
        std::none_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& pre) { return p.name.starts_with(pre); })) {
      continue;
    }
    out.push_back(&p);
  }
  return out;
}

}  // namespace adatag

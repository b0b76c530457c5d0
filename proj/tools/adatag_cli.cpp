#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "adatag/attribute_embeddings.hpp"
#include "adatag/checkpoint.hpp"
#include "adatag/config.hpp"
#include "adatag/corpus.hpp"
#include "adatag/error.hpp"
#include "adatag/evaluation.hpp"
#include "adatag/io.hpp"
#include "adatag/model.hpp"
#include "adatag/synth.hpp"
#include "adatag/training.hpp"

namespace fs = std::filesystem;
using namespace adatag;

namespace {

void log(const std::string& msg) { std::cerr << "[adatag] " << msg << '\n'; }

void log_input(const std::string& role, const fs::path& path) {
  log("input " + role + " " + path.string() + " fnv1a=" + io::file_hash(path));
}

void log_config(const TrainConfig& config) {
  std::string line;
  for (const auto& [k, v] : to_key_values(config)) line += " " + k + "=" + v;
  log("config" + line);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<corpus::LabeledExample> only_setting(std::vector<corpus::LabeledExample> examples,
                                                 corpus::SourceField field) {
  std::erase_if(examples, [&](const corpus::LabeledExample& ex) { return ex.source != field; });
  return examples;
}

// ---- label ------------------------------------------------------------------

struct LabelArgs {
  std::string products, vocab, out, report, field = "title";
  bool negatives = false;
};

int run_label(const LabelArgs& a) {
  log_input("products", a.products);
  log_input("vocab", a.vocab);
  const auto vocab = corpus::load_vocab(a.vocab);
  std::ifstream in(a.products);
  if (!in) throw DataError("cannot open " + a.products);
  auto parsed = corpus::parse_products(in);
  corpus::BuildOptions opts;
  opts.field = corpus::parse_source_field(a.field);
  opts.include_negatives = a.negatives;
  auto built = corpus::build_corpus(parsed.products, vocab, opts);
  built.report.malformed_lines = parsed.errors;
  for (const auto& e : parsed.errors) log("skipped line " + std::to_string(e.line) + ": " + e.message);
  io::write_file_atomic(a.out, [&](std::ostream& out) { corpus::write_examples(built.examples, out); });
  const std::string report = built.report.to_json();
  if (a.report.empty()) {
    std::cerr << report << '\n';
  } else {
    io::write_file_atomic(a.report, [&](std::ostream& out) { out << report << '\n'; });
  }
  log("wrote " + std::to_string(built.examples.size()) + " examples to " + a.out);
  return 0;
}

// ---- embed ------------------------------------------------------------------

struct EmbedArgs {
  std::string labeled, splits, vocab, vectors, contextualized, out;
};

int run_embed(const EmbedArgs& a) {
  attributes::AttributeEmbeddingTable table;
  if (!a.contextualized.empty()) {
    log_input("contextualized", a.contextualized);
    table = attributes::ingest_contextualized(fs::path(a.contextualized));
  } else {
    if (a.labeled.empty() || a.vocab.empty() || a.vectors.empty()) {
      throw CLI::ValidationError("embed needs --labeled, --vocab and --vectors (or --contextualized)");
    }
    log_input("labeled", a.labeled);
    log_input("vocab", a.vocab);
    log_input("vectors", a.vectors);
    auto examples = corpus::load_examples(a.labeled);
    if (!a.splits.empty()) {
      log_input("splits", a.splits);
      examples = corpus::apply_splits(examples, corpus::load_splits(a.splits)).train;
    }
    const auto vectors = io::load_word_vectors(fs::path(a.vectors));
    table = attributes::uncontextualized_table(examples, corpus::load_vocab(a.vocab), vectors);
  }
  io::write_file_atomic(a.out, [&](std::ostream& out) { attributes::write_table(table, out); });
  log("wrote " + std::to_string(table.rows().size()) + " attribute embeddings (d_r=" +
      std::to_string(table.dim()) + ") to " + a.out);
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string config = "adatag_default";
  std::string labeled, splits, train, dev, vocab, table, vectors, out, report;
  std::optional<std::string> variant, setting, attributes;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> d_h, d_word, d_r, k, batch_size, patience, max_epochs, threads;
  std::optional<double> lr;
  std::optional<bool> freeze;
};

TrainConfig resolve(const TrainArgs& a) {
  TrainConfig c = load_config(a.config);
  if (a.variant) c.variant = parse_variant(*a.variant);
  if (a.setting) c.setting = corpus::parse_source_field(*a.setting);
  if (a.attributes) c.attributes = split_list(*a.attributes);
  if (a.seed) c.seed = *a.seed;
  if (a.d_h) c.d_h = *a.d_h;
  if (a.d_word) c.d_word = *a.d_word;
  if (a.d_r) c.d_r = *a.d_r;
  if (a.k) c.k = *a.k;
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (a.patience) c.patience = *a.patience;
  if (a.max_epochs) c.max_epochs = *a.max_epochs;
  if (a.threads) c.threads = *a.threads;
  if (a.lr) c.learning_rate = *a.lr;
  if (a.freeze) c.freeze_attribute_embeddings = *a.freeze;
  c.validate();
  return c;
}

int run_train(const TrainArgs& a) {
  const TrainConfig config = resolve(a);
  log_config(config);
  if (config.threads) omp_set_num_threads(static_cast<int>(config.threads));

  std::vector<corpus::LabeledExample> train_set, dev_set;
  if (!a.labeled.empty()) {
    if (a.splits.empty()) throw CLI::ValidationError("--labeled needs --splits");
    log_input("labeled", a.labeled);
    log_input("splits", a.splits);
    auto parts = corpus::apply_splits(corpus::load_examples(a.labeled), corpus::load_splits(a.splits));
    train_set = std::move(parts.train);
    dev_set = std::move(parts.dev);
  } else {
    if (a.train.empty() || a.dev.empty()) {
      throw CLI::ValidationError("train needs --labeled with --splits, or --train and --dev");
    }
    log_input("train", a.train);
    log_input("dev", a.dev);
    train_set = corpus::load_examples(a.train);
    dev_set = corpus::load_examples(a.dev);
  }
  train_set = only_setting(std::move(train_set), config.setting);
  dev_set = only_setting(std::move(dev_set), config.setting);

  log_input("vocab", a.vocab);
  const auto vocab = corpus::load_vocab(a.vocab);
  std::optional<attributes::AttributeEmbeddingTable> table;
  if (!a.table.empty()) {
    log_input("table", a.table);
    table = attributes::load_table(a.table);
  }
  std::optional<io::WordVectors> vectors;
  if (!a.vectors.empty()) {
    log_input("vectors", a.vectors);
    vectors = io::load_word_vectors(fs::path(a.vectors));
  }

  TrainConfig build_config = config;
  if (table && !a.d_r && build_config.d_r != table->dim()) {
    log("d_r taken from the attribute table: " + std::to_string(table->dim()));
    build_config.d_r = table->dim();
  }
  Model model = Model::build(build_config, encoder::WordVocab::from_examples(train_set), vocab,
                             table ? &*table : nullptr, vectors ? &*vectors : nullptr);
  const auto counts = param_count(model.params());
  log("parameters total=" + std::to_string(counts.total) + " trainable=" + std::to_string(counts.trainable));

  training::TrainOptions opts;
  opts.on_epoch = [](const training::RunReport& run, const training::EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%sepoch %zu train_nll=%.6f dev_macro_f1=%.4f%s",
                  run.attribute.empty() ? "" : (run.attribute + " ").c_str(), e.epoch, e.train_nll,
                  e.dev_macro_f1, e.improved ? " *" : "");
    log(buf);
  };
  auto report = training::train(model, train_set, dev_set, opts);
  checkpoint::save(model, a.out);
  report.checkpoint = checkpoint::stem(a.out).string();
  log("checkpoint " + report.checkpoint + " dev_macro_f1=" + std::to_string(report.dev_macro_f1));
  if (a.report.empty()) {
    std::cout << report.to_json() << '\n';
  } else {
    io::write_file_atomic(a.report, [&](std::ostream& out) { out << report.to_json() << '\n'; });
  }
  return 0;
}

// ---- extract ----------------------------------------------------------------

struct ExtractArgs {
  std::string checkpoint, text;
  std::vector<std::string> attrs;
};

int run_extract(const ExtractArgs& a) {
  log_input("checkpoint", checkpoint::stem(a.checkpoint).string() + ".json");
  const Model model = checkpoint::load(a.checkpoint);
  std::vector<std::string> attrs;
  for (const auto& s : a.attrs) {
    for (auto& id : split_list(s)) attrs.push_back(std::move(id));
  }
  if (attrs.empty()) attrs = model.attributes().ids();
  const auto tokens = corpus::tokenize(a.text);
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& id : attrs) {
    const auto values = eval::extract(model, tokens, id);
    out[id] = std::vector<std::string>(values.begin(), values.end());
  }
  std::cout << out.dump() << '\n';
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string checkpoint, labeled, splits, train_labeled, report, predictions, attributes;
  std::optional<std::size_t> stratify;
};

int run_eval(const EvalArgs& a) {
  log_input("checkpoint", checkpoint::stem(a.checkpoint).string() + ".json");
  log_input("labeled", a.labeled);
  const Model model = checkpoint::load(a.checkpoint);
  auto examples = corpus::load_examples(a.labeled);
  std::optional<corpus::SplitExamples> parts;
  if (!a.splits.empty()) {
    log_input("splits", a.splits);
    parts = corpus::apply_splits(examples, corpus::load_splits(a.splits));
    examples = parts->test;
  }
  examples = only_setting(std::move(examples), model.config().setting);
  if (!a.attributes.empty()) {
    const auto keep = split_list(a.attributes);
    std::erase_if(examples, [&](const corpus::LabeledExample& ex) {
      return std::find(keep.begin(), keep.end(), ex.attribute) == keep.end();
    });
  }
  const auto results = eval::predict(model, examples);
  auto report = eval::score(results);
  if (a.stratify) {
    std::vector<corpus::LabeledExample> train;
    if (!a.train_labeled.empty()) {
      log_input("train", a.train_labeled);
      train = corpus::load_examples(a.train_labeled);
    } else if (parts) {
      train = parts->train;
    } else {
      throw CLI::ValidationError("--stratify needs --splits or --train-labeled for training counts");
    }
    eval::stratify(report, eval::example_counts(only_setting(train, model.config().setting)), *a.stratify);
  }
  for (const auto& w : report.warnings) log("warning: " + w);
  std::cout << eval::report_table(report);
  if (!a.report.empty()) {
    io::write_file_atomic(a.report, [&](std::ostream& out) { out << eval::report_json(report) << '\n'; });
  }
  if (!a.predictions.empty()) {
    io::write_file_atomic(a.predictions, [&](std::ostream& out) { eval::write_predictions(results, out); });
  }
  return 0;
}

// ---- param-count ------------------------------------------------------------

struct CountArgs {
  std::string config, checkpoint;
  bool json = false;
};

int run_param_count(const CountArgs& a) {
  ParamCount counts;
  TrainConfig config;
  std::size_t n_attr = 0;
  if (!a.checkpoint.empty()) {
    const Model model = checkpoint::load(a.checkpoint);
    counts = param_count(model.params());
    config = model.config();
    n_attr = model.attributes().size();
  } else {
    config = load_config(a.config.empty() ? "adatag_default" : a.config);
    counts = param_count(config);
    n_attr = config.num_attributes ? config.num_attributes : 1;
  }
  log_config(config);
  if (a.json) {
    nlohmann::ordered_json j;
    j["variant"] = to_string(config.variant);
    for (const auto& t : counts.tensors) {
      j["tensors"].push_back({{"name", t.name}, {"group", t.group}, {"shape", t.shape}, {"count", t.count},
                              {"frozen", t.frozen}});
    }
    j["groups"] = counts.groups;
    j["total"] = counts.total;
    j["trainable"] = counts.trainable;
    if (config.variant == Variant::kNTagSets) j["transition_9N2_approx"] = 9 * n_attr * n_attr;
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  std::size_t width = 6;
  for (const auto& t : counts.tensors) width = std::max(width, t.name.size());
  for (const auto& t : counts.tensors) {
    std::printf("%-*s  %-10s %-18s %14zu%s\n", static_cast<int>(width), t.name.c_str(), t.group.c_str(),
                shape_string(t.shape).c_str(), t.count, t.frozen ? "  (frozen)" : "");
  }
  for (const auto& [g, n] : counts.groups) {
    std::printf("group %-*s %14zu\n", static_cast<int>(width + 23), g.c_str(), n);
  }
  std::printf("total %-*s %14zu\n", static_cast<int>(width + 23), "", counts.total);
  std::printf("trainable %-*s %14zu\n", static_cast<int>(width + 19), "", counts.trainable);
  if (config.variant == Variant::kNTagSets) {
    const std::size_t L = 3 * n_attr + 1;
    std::printf("transition matrix (3N+1)^2 = %zu; 9N^2 approximation = %zu (N=%zu)\n", L * L,
                9 * n_attr * n_attr, n_attr);
  }
  return 0;
}

// ---- synth ------------------------------------------------------------------

struct SynthArgs {
  std::string spec, out;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  log_input("spec", a.spec);
  auto spec = synth::load_spec(a.spec);
  if (a.seed) spec.seed = *a.seed;
  log("seed " + std::to_string(spec.seed));
  const auto data = synth::generate(spec);
  synth::write_dataset(data, a.out);
  log("wrote " + std::to_string(data.products.size()) + " products to " + a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute value extraction with an attribute-conditioned CRF decoder"};
  app.require_subcommand(1);

  LabelArgs label;
  auto* cmd_label = app.add_subcommand("label", "Distant-label products into BIOE examples");
  cmd_label->add_option("--products", label.products, "Product JSONL")->required();
  cmd_label->add_option("--vocab", label.vocab, "Attribute vocabulary JSON")->required();
  cmd_label->add_option("--field", label.field, "title | title_plus_bullets");
  cmd_label->add_flag("--negatives", label.negatives, "Also emit examples with no matched value");
  cmd_label->add_option("--out", label.out, "Labeled examples JSONL")->required();
  cmd_label->add_option("--report", label.report, "Coverage report JSON (default: stderr)");

  EmbedArgs embed;
  auto* cmd_embed = app.add_subcommand("embed", "Build the attribute embedding table");
  cmd_embed->add_option("--labeled", embed.labeled, "Labeled examples JSONL");
  cmd_embed->add_option("--splits", embed.splits, "Split manifest; only train ids are used");
  cmd_embed->add_option("--vocab", embed.vocab, "Attribute vocabulary JSON");
  cmd_embed->add_option("--vectors", embed.vectors, "Static word vectors (text format)");
  cmd_embed->add_option("--contextualized", embed.contextualized, "Pre-computed instance vectors JSONL");
  cmd_embed->add_option("--out", embed.out, "Attribute table JSONL")->required();

  TrainArgs train;
  auto* cmd_train = app.add_subcommand("train", "Train a model and write a checkpoint");
  cmd_train->add_option("--config", train.config, "Preset name or key/value file");
  cmd_train->add_option("--labeled", train.labeled, "Labeled examples JSONL");
  cmd_train->add_option("--splits", train.splits, "Split manifest");
  cmd_train->add_option("--train", train.train, "Training examples JSONL");
  cmd_train->add_option("--dev", train.dev, "Dev examples JSONL");
  cmd_train->add_option("--vocab", train.vocab, "Attribute vocabulary JSON")->required();
  cmd_train->add_option("--table", train.table, "Attribute table JSONL (adatag)");
  cmd_train->add_option("--vectors", train.vectors, "Static word vectors for W_word");
  cmd_train->add_option("--out", train.out, "Checkpoint stem")->required();
  cmd_train->add_option("--report", train.report, "Train report JSON (default: stdout)");
  cmd_train->add_option("--variant", train.variant);
  cmd_train->add_option("--setting", train.setting);
  cmd_train->add_option("--attributes", train.attributes, "Comma-separated attribute subset");
  cmd_train->add_option("--seed", train.seed);
  cmd_train->add_option("--d-h", train.d_h);
  cmd_train->add_option("--d-word", train.d_word);
  cmd_train->add_option("--d-r", train.d_r);
  cmd_train->add_option("--k", train.k);
  cmd_train->add_option("--batch-size", train.batch_size);
  cmd_train->add_option("--lr", train.lr);
  cmd_train->add_option("--patience", train.patience);
  cmd_train->add_option("--max-epochs", train.max_epochs);
  cmd_train->add_option("--threads", train.threads);
  cmd_train->add_option("--freeze-attribute-embeddings", train.freeze);

  ExtractArgs extract;
  auto* cmd_extract = app.add_subcommand("extract", "Extract attribute values from text");
  cmd_extract->add_option("--checkpoint", extract.checkpoint, "Checkpoint stem")->required();
  cmd_extract->add_option("--text", extract.text, "Product text")->required();
  cmd_extract->add_option("--attr", extract.attrs, "Attribute id(s); default all");

  EvalArgs evaluate;
  auto* cmd_eval = app.add_subcommand("eval", "Score a checkpoint on labeled examples");
  cmd_eval->add_option("--checkpoint", evaluate.checkpoint, "Checkpoint stem")->required();
  cmd_eval->add_option("--labeled", evaluate.labeled, "Labeled examples JSONL")->required();
  cmd_eval->add_option("--splits", evaluate.splits, "Split manifest; scores the test ids");
  cmd_eval->add_option("--train-labeled", evaluate.train_labeled, "Training examples for --stratify");
  cmd_eval->add_option("--stratify", evaluate.stratify, "High/low-resource threshold (e.g. 1000)");
  cmd_eval->add_option("--attributes", evaluate.attributes, "Comma-separated attribute subset");
  cmd_eval->add_option("--report", evaluate.report, "Metrics report JSON");
  cmd_eval->add_option("--predictions", evaluate.predictions, "Per-example predictions JSONL");

  CountArgs count;
  auto* cmd_count = app.add_subcommand("param-count", "Count parameters per tensor and group");
  cmd_count->add_option("--config", count.config, "Preset name or key/value file");
  cmd_count->add_option("--checkpoint", count.checkpoint, "Checkpoint stem");
  cmd_count->add_flag("--json", count.json);

  SynthArgs synth_args;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a templated synthetic catalogue");
  cmd_synth->add_option("--spec", synth_args.spec, "Template spec JSON")->required();
  cmd_synth->add_option("--seed", synth_args.seed, "Overrides the spec seed");
  cmd_synth->add_option("--out", synth_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*cmd_label) return run_label(label);
    if (*cmd_embed) return run_embed(embed);
    if (*cmd_train) return run_train(train);
    if (*cmd_extract) return run_extract(extract);
    if (*cmd_eval) return run_eval(evaluate);
    if (*cmd_count) return run_param_count(count);
    if (*cmd_synth) return run_synth(synth_args);
  } catch (const CLI::Error& e) {
    std::cerr << "adatag: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "adatag: numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "adatag: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

#include "adatag/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "adatag/error.hpp"
#include "adatag/io.hpp"

namespace adatag {

namespace {

constexpr std::pair<Variant, std::string_view> kVariants[] = {
    {Variant::kAdaTag, "adatag"},
    {Variant::kAdaTagRandomEmb, "adatag_random_emb"},
    {Variant::kBiLstmMultiCrf, "bilstm_multicrf"},
    {Variant::kNTagSets, "n_tag_sets"},
    {Variant::kPerAttribute, "per_attribute"},
    {Variant::kSharedEmb, "bilstm_crf_shared_emb"},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw DataError("config: '" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw DataError("config: '" + key + "' expects true/false, got '" + value + "'");
}

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string to_string(Variant v) {
  for (const auto& [var, name] : kVariants) {
    if (var == v) return std::string(name);
  }
  return "adatag";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [var, n] : kVariants) {
    if (n == name) return var;
  }
  std::string choices;
  for (const auto& [var, n] : kVariants) {
    if (!choices.empty()) choices += ", ";
    choices += n;
  }
  throw DataError("unsupported variant '" + std::string(name) + "' (choices: " + choices + ")");
}

void TrainConfig::validate() const {
  auto positive = [](const char* key, std::size_t v) {
    if (v == 0) throw DataError(std::string("config: ") + key + " must be positive");
  };
  positive("d_h", d_h);
  positive("d_word", d_word);
  positive("batch_size", batch_size);
  positive("patience", patience);
  positive("max_epochs", max_epochs);
  if (d_h % 2 != 0) throw DataError("config: d_h must be even (each direction gets d_h/2)");
  if (k < 1 || k > 8) throw DataError("config: k must be between 1 and 8");
  if (!(learning_rate > 0.0)) throw DataError("config: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw DataError("config: Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw DataError("config: epsilon must be positive");
}

KeyValues to_key_values(const TrainConfig& c) {
  KeyValues kv;
  kv["variant"] = to_string(c.variant);
  kv["d_h"] = std::to_string(c.d_h);
  kv["d_word"] = std::to_string(c.d_word);
  kv["d_r"] = std::to_string(c.d_r);
  kv["k"] = std::to_string(c.k);
  kv["batch_size"] = std::to_string(c.batch_size);
  kv["learning_rate"] = format_double(c.learning_rate);
  kv["beta1"] = format_double(c.beta1);
  kv["beta2"] = format_double(c.beta2);
  kv["epsilon"] = format_double(c.epsilon);
  kv["patience"] = std::to_string(c.patience);
  kv["max_epochs"] = std::to_string(c.max_epochs);
  kv["seed"] = std::to_string(c.seed);
  kv["setting"] = corpus::to_string(c.setting);
  std::string attrs;
  for (const auto& a : c.attributes) {
    if (!attrs.empty()) attrs += ',';
    attrs += a;
  }
  kv["attributes"] = attrs;
  kv["freeze_attribute_embeddings"] = c.freeze_attribute_embeddings ? "true" : "false";
  kv["threads"] = std::to_string(c.threads);
  kv["vocab_size"] = std::to_string(c.vocab_size);
  kv["num_attributes"] = std::to_string(c.num_attributes);
  return kv;
}

TrainConfig from_key_values(const KeyValues& kv, TrainConfig c) {
  for (const auto& [key, value] : kv) {
    if (key == "variant") c.variant = parse_variant(value);
    else if (key == "d_h") c.d_h = parse_number<std::size_t>(key, value);
    else if (key == "d_word") c.d_word = parse_number<std::size_t>(key, value);
    else if (key == "d_r") c.d_r = parse_number<std::size_t>(key, value);
    else if (key == "k") c.k = parse_number<std::size_t>(key, value);
    else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
    else if (key == "beta1") c.beta1 = parse_number<double>(key, value);
    else if (key == "beta2") c.beta2 = parse_number<double>(key, value);
    else if (key == "epsilon") c.epsilon = parse_number<double>(key, value);
    else if (key == "patience") c.patience = parse_number<std::size_t>(key, value);
    else if (key == "max_epochs") c.max_epochs = parse_number<std::size_t>(key, value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "setting") c.setting = corpus::parse_source_field(value);
    else if (key == "attributes") {
      c.attributes.clear();
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) c.attributes.push_back(item);
      }
    } else if (key == "freeze_attribute_embeddings") {
      c.freeze_attribute_embeddings = parse_bool(key, value);
    } else if (key == "threads") c.threads = parse_number<std::size_t>(key, value);
    else if (key == "vocab_size") c.vocab_size = parse_number<std::size_t>(key, value);
    else if (key == "num_attributes") c.num_attributes = parse_number<std::size_t>(key, value);
    else throw DataError("config: unknown key '" + key + "'");
  }
  return c;
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

bool is_preset(std::string_view name) {
  return name == "adatag_default" || name == "adatag_random_default" ||
         name == "multicrf_default" || name == "n_tag_sets_default" ||
         name == "per_attribute_default" || name == "shared_emb_default";
}

TrainConfig preset(std::string_view name) {
  // Full-scale shapes for accounting: 12 attributes, 1536-d frozen
  // attribute embeddings, a 100k-word vocabulary of 50-d vectors.
  TrainConfig c;
  c.d_r = 1536;
  c.vocab_size = 100000;
  c.num_attributes = 12;
  if (name == "adatag_default") return c;
  if (name == "adatag_random_default") {
    c.variant = Variant::kAdaTagRandomEmb;
    c.freeze_attribute_embeddings = false;
    return c;
  }
  c.d_r = 0;
  if (name == "multicrf_default") c.variant = Variant::kBiLstmMultiCrf;
  else if (name == "n_tag_sets_default") c.variant = Variant::kNTagSets;
  else if (name == "per_attribute_default") c.variant = Variant::kPerAttribute;
  else if (name == "shared_emb_default") c.variant = Variant::kSharedEmb;
  else throw DataError("unknown config preset '" + std::string(name) + "'");
  return c;
}

TrainConfig load_config(const std::string& name_or_path) {
  if (is_preset(name_or_path)) return preset(name_or_path);
  return from_key_values(parse_key_values(io::read_file(name_or_path)));
}

}  // namespace adatag

#include "adatag/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adatag/error.hpp"
#include "adatag/io.hpp"

namespace adatag::checkpoint {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "payload is written in native order");

namespace {

std::string words_hash(const encoder::WordVocab& words) {
  std::string joined;
  for (const auto& w : words.words()) {
    joined += w;
    joined += '\n';
  }
  return io::hex64(io::fnv1a(joined));
}

void check_arch(const TrainConfig& stored, const TrainConfig& expected) {
  auto mismatch = [](const std::string& key, const std::string& have, const std::string& want) {
    throw DataError("checkpoint was trained with " + key + "=" + have + " but the config requests " +
                    key + "=" + want);
  };
  if (stored.variant != expected.variant) {
    mismatch("variant", to_string(stored.variant), to_string(expected.variant));
  }
  if (stored.d_h != expected.d_h) mismatch("d_h", std::to_string(stored.d_h), std::to_string(expected.d_h));
  if (stored.d_word != expected.d_word) {
    mismatch("d_word", std::to_string(stored.d_word), std::to_string(expected.d_word));
  }
  if (stored.k != expected.k) mismatch("k", std::to_string(stored.k), std::to_string(expected.k));
  if (expected.d_r != 0 && stored.d_r != expected.d_r) {
    mismatch("d_r", std::to_string(stored.d_r), std::to_string(expected.d_r));
  }
}

}  // namespace

fs::path stem(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".json" || ext == ".bin") return fs::path(path).replace_extension();
  return path;
}

void save(const Model& model, const fs::path& path) {
  const fs::path base = stem(path);
  const fs::path manifest_path = fs::path(base).concat(".json");
  const fs::path payload_path = fs::path(base).concat(".bin");
  if (base.has_parent_path()) fs::create_directories(base.parent_path());

  std::string payload;
  json tensors = json::array();
  for (const auto& p : model.params().all()) {
    json t;
    t["name"] = p.name;
    t["group"] = p.group;
    t["shape"] = p.value.shape();
    t["byte_offset"] = payload.size();
    t["frozen"] = p.frozen;
    tensors.push_back(t);
    for (double v : p.value.data()) {
      const float f = static_cast<float>(v);
      char bytes[sizeof f];
      std::memcpy(bytes, &f, sizeof f);
      payload.append(bytes, sizeof f);
    }
  }

  json m;
  m["format_version"] = kFormatVersion;
  m["variant"] = to_string(model.config().variant);
  m["config"] = to_key_values(model.config());
  m["vocab_hashes"] = {{"words", words_hash(model.words())},
                       {"attributes", io::hex64(io::fnv1a(corpus::vocab_json(model.attributes())))}};
  m["words"] = model.words().words();
  m["attributes"] = json::parse(corpus::vocab_json(model.attributes()));
  m["tensors"] = tensors;
  m["payload"] = payload_path.filename().string();
  m["payload_bytes"] = payload.size();
  m["payload_hash"] = io::hex64(io::fnv1a(payload));

  io::write_file_atomic(payload_path, [&](std::ostream& out) { out.write(payload.data(), payload.size()); },
                        true);
  io::write_file_atomic(manifest_path, [&](std::ostream& out) { out << m.dump(2) << '\n'; });
}

Model load(const fs::path& path, const TrainConfig* expected) {
  const fs::path base = stem(path);
  const fs::path manifest_path = fs::path(base).concat(".json");
  json m;
  try {
    m = json::parse(io::read_file(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": bad manifest: " + e.what());
  }
  try {
    const int version = m.at("format_version").get<int>();
    if (version != kFormatVersion) {
      throw DataError(manifest_path.string() + ": format_version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kFormatVersion) + ")");
    }
    const TrainConfig config = from_key_values(m.at("config").get<KeyValues>());
    if (expected) check_arch(config, *expected);

    const encoder::WordVocab words(m.at("words").get<std::vector<std::string>>());
    const corpus::AttributeVocab attributes = corpus::parse_vocab(m.at("attributes").dump());
    if (words_hash(words) != m.at("vocab_hashes").at("words").get<std::string>()) {
      throw DataError(manifest_path.string() + ": word vocabulary hash mismatch");
    }

    const fs::path payload_path = manifest_path.parent_path() / m.at("payload").get<std::string>();
    const std::string payload = io::read_file(payload_path);
    const auto expected_bytes = m.at("payload_bytes").get<std::size_t>();
    if (payload.size() != expected_bytes) {
      throw DataError(payload_path.string() + ": payload has " + std::to_string(payload.size()) +
                      " bytes, manifest says " + std::to_string(expected_bytes) + " (truncated?)");
    }
    if (io::hex64(io::fnv1a(payload)) != m.at("payload_hash").get<std::string>()) {
      throw DataError(payload_path.string() + ": payload hash mismatch");
    }

    ParamStore store;
    for (const auto& t : m.at("tensors")) {
      const auto name = t.at("name").get<std::string>();
      const auto shape = t.at("shape").get<Shape>();
      const auto offset = t.at("byte_offset").get<std::size_t>();
      const std::size_t n = shape_size(shape);
      if (offset + n * sizeof(float) > payload.size()) {
        throw DataError(payload_path.string() + ": tensor " + name + " extends past the payload end");
      }
      Tensor value(shape);
      auto dst = value.data();
      for (std::size_t i = 0; i < n; ++i) {
        float f;
        std::memcpy(&f, payload.data() + offset + i * sizeof f, sizeof f);
        dst[i] = f;
      }
      store.add(name, t.at("group").get<std::string>(), std::move(value), t.at("frozen").get<bool>());
    }
    return Model(config, words, attributes, std::move(store));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
}

}  // namespace adatag::checkpoint

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "adatag/corpus.hpp"
#include "adatag/random.hpp"
#include "adatag/tensor.hpp"

namespace testing {

inline adatag::Tensor random_tensor(adatag::Shape shape, adatag::Rng& rng, double scale = 1.0) {
  adatag::Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

inline adatag::corpus::LabeledExample example(const std::string& id, const std::string& attribute,
                                              const std::string& text,
                                              const std::vector<std::string>& values) {
  adatag::corpus::LabeledExample ex;
  ex.id = id;
  ex.attribute = attribute;
  ex.text = text;
  ex.tokens = adatag::corpus::tokenize(text);
  ex.tags = adatag::corpus::distant_label(ex.tokens, values);
  return ex;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("adatag_test_" + name);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace testing

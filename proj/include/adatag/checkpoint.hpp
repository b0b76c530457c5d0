#pragma once

#include <filesystem>
#include <string>

#include "adatag/config.hpp"
#include "adatag/model.hpp"

// A checkpoint is a pair of files sharing a stem: <stem>.json (manifest with
// config, vocabularies and tensor table) and <stem>.bin (contiguous
// little-endian float32 payload).
namespace adatag::checkpoint {

constexpr int kFormatVersion = 1;

// Accepts "dir/model", "dir/model.json" or "dir/model.bin".
std::filesystem::path stem(const std::filesystem::path& path);

void save(const Model& model, const std::filesystem::path& path);

// Throws DataError on a version, hash, size or shape problem. When `expected`
// is given, its architecture keys (variant, d_h, d_word, k, and d_r if
// non-zero) must match the stored config.
Model load(const std::filesystem::path& path, const TrainConfig* expected = nullptr);

}  // namespace adatag::checkpoint

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace adatag::io {

std::string read_file(const std::filesystem::path& path);

// Writes through a temporary sibling and renames, so a failed write never
// leaves a partial file at `path`.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);
std::string file_hash(const std::filesystem::path& path);

// Static word vectors in GloVe text format: "<word> <v1> ... <vd>" per line.
struct WordVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> table;

  const std::vector<double>* find(const std::string& word) const;
};

// A leading "<count> <dim>" header line (word2vec text style) is skipped.
// Rows whose width differs from the first row raise DataError with the line.
WordVectors load_word_vectors(std::istream& in);
WordVectors load_word_vectors(const std::filesystem::path& path);
void save_word_vectors(const WordVectors& vectors, std::ostream& out);

}  // namespace adatag::io

#include "adatag/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "adatag/error.hpp"

namespace adatag::io {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer,
                       bool binary) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  try {
    {
      std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
      if (!out) throw DataError("cannot write " + tmp.string());
      writer(out);
      out.flush();
      if (!out) throw DataError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string file_hash(const std::filesystem::path& path) {
  return hex64(fnv1a(read_file(path)));
}

const std::vector<double>* WordVectors::find(const std::string& word) const {
  auto it = table.find(word);
  return it == table.end() ? nullptr : &it->second;
}

WordVectors load_word_vectors(std::istream& in) {
  WordVectors wv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string word;
    is >> word;
    std::vector<double> vec;
    std::string field;
    while (is >> field) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw DataError("word vectors line " + std::to_string(lineno) +
                        ": bad number '" + field + "'");
      }
      vec.push_back(v);
    }
    if (lineno == 1 && vec.size() == 1 &&
        std::all_of(word.begin(), word.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      continue;  // "<count> <dim>" header
    }
    if (vec.empty()) {
      throw DataError("word vectors line " + std::to_string(lineno) + ": no values");
    }
    if (wv.dim == 0) wv.dim = vec.size();
    if (vec.size() != wv.dim) {
      throw DataError("word vectors line " + std::to_string(lineno) + ": width " +
                      std::to_string(vec.size()) + ", expected " + std::to_string(wv.dim));
    }
    wv.table.emplace(std::move(word), std::move(vec));
  }
  return wv;
}

WordVectors load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word vectors " + path.string());
  return load_word_vectors(in);
}

void save_word_vectors(const WordVectors& vectors, std::ostream& out) {
  std::vector<const std::string*> words;
  for (const auto& kv : vectors.table) words.push_back(&kv.first);
  std::sort(words.begin(), words.end(), [](auto* a, auto* b) { return *a < *b; });
  out << std::setprecision(17);
  for (const std::string* w : words) {
    out << *w;
    for (double v : vectors.table.at(*w)) out << ' ' << v;
    out << '\n';
  }
}

}  // namespace adatag::io

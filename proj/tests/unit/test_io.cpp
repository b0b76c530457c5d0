#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "adatag/error.hpp"
#include "adatag/io.hpp"
#include "helpers.hpp"

using namespace adatag;

TEST_CASE("word vectors: header skipped, widths checked") {
  std::istringstream in("2 3\nrose 0.1 0.2 0.3\nLily -1 0 1e-2\n");
  const auto v = io::load_word_vectors(in);
  CHECK(v.dim == 3);
  CHECK(v.find("Lily")->at(2) == 0.01);
  CHECK(v.find("lily") == nullptr);

  std::istringstream bad("rose 0.1 0.2\nlily 1 2 3\n");
  try {
    io::load_word_vectors(bad);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  std::istringstream nan_text("rose 0.1 x\n");
  CHECK_THROWS_AS(io::load_word_vectors(nan_text), DataError);
}

TEST_CASE("word vectors save and reload exactly") {
  io::WordVectors v;
  v.dim = 2;
  v.table["b"] = {0.1, 1.0 / 3.0};
  v.table["a"] = {-2.5e-7, 4};
  std::stringstream buf;
  io::save_word_vectors(v, buf);
  CHECK(buf.str().rfind("a ", 0) == 0);
  const auto back = io::load_word_vectors(buf);
  CHECK(back.table == v.table);
}

TEST_CASE("atomic writes leave nothing behind on failure") {
  testing::TempDir dir("io");
  const auto path = dir.path / "out.txt";
  io::write_file_atomic(path, [](std::ostream& out) { out << "hello"; });
  CHECK(io::read_file(path) == "hello");
  CHECK_THROWS(io::write_file_atomic(path, [](std::ostream& out) {
    out << "partial";
    throw DataError("boom");
  }));
  CHECK(io::read_file(path) == "hello");
  CHECK_FALSE(std::filesystem::exists(dir.path / "out.txt.tmp"));
  CHECK_THROWS_AS(io::read_file(dir.path / "missing"), Error);
}

TEST_CASE("hashing is stable") {
  CHECK(io::fnv1a("") == 14695981039346656037ULL);
  CHECK(io::hex64(io::fnv1a("a")) == "af63dc4c8601ec8c");
}

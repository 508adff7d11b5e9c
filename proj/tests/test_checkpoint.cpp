#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "bqlab/checkpoint.hpp"
#include "bqlab/errors.hpp"
#include "oracles.hpp"

using namespace bqlab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / "bqlab_ckpt_test";
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

FieldState random_state(unsigned seed) {
  auto g = make_grid(20.0, 64);
  FieldState s = FieldState::zero(g, 3.25);
  s.u1 = oracle::random_smooth_field(*g, seed);
  s.u2 = oracle::random_smooth_field(*g, seed + 1);
  return s;
}

}  // namespace

TEST_CASE("save and load reproduce arrays bitwise") {
  TempDir tmp;
  FieldState s = random_state(77);
  const std::string path = tmp.file("state.bqck");
  save_state(path, s);
  FieldState r = load_state(path);
  CHECK(r.time == s.time);
  CHECK(r.grid->n_points() == 64);
  CHECK(r.grid->half_length() == 20.0);
  CHECK(std::memcmp(r.u1.data(), s.u1.data(), sizeof(double) * 64) == 0);
  CHECK(std::memcmp(r.u2.data(), s.u2.data(), sizeof(double) * 64) == 0);

  // re-saving the loaded state yields identical bytes
  const std::string path2 = tmp.file("state2.bqck");
  save_state(path2, r);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(b1 == b2);
}

TEST_CASE("trajectory files hold several records in order") {
  TempDir tmp;
  std::vector<FieldState> states{random_state(1), random_state(2), random_state(3)};
  states[0].time = 0.0;
  states[1].time = 0.5;
  states[2].time = 1.0;
  const std::string path = tmp.file("traj.bqck");
  save_states(path, states);
  auto loaded = load_states(path);
  REQUIRE(loaded.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(loaded[i].time == states[i].time);
    CHECK(std::memcmp(loaded[i].u1.data(), states[i].u1.data(),
                      sizeof(double) * 64) == 0);
  }
}

TEST_CASE("truncated files are rejected without partial state") {
  TempDir tmp;
  FieldState s = random_state(5);
  const std::string path = tmp.file("trunc.bqck");
  save_state(path, s);
  const auto full = fs::file_size(path);
  fs::resize_file(path, full - 24);
  CHECK_THROWS_AS(load_state(path), CorruptionError);

  fs::resize_file(path, 12);  // inside the header
  CHECK_THROWS_AS(load_state(path), CorruptionError);
}

TEST_CASE("wrong magic is a format error") {
  TempDir tmp;
  const std::string path = tmp.file("magic.bqck");
  save_state(path, random_state(6));
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("NOTBQLAB", 8);
  }
  CHECK_THROWS_AS(load_state(path), FormatError);
}

TEST_CASE("version mismatch names both versions") {
  TempDir tmp;
  const std::string path = tmp.file("version.bqck");
  save_state(path, random_state(7));
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const std::uint32_t other = 9;
    f.write(reinterpret_cast<const char*>(&other), 4);
  }
  try {
    load_state(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("9") != std::string::npos);
    CHECK(msg.find("1") != std::string::npos);
  }
}

TEST_CASE("empty and missing files") {
  TempDir tmp;
  CHECK_THROWS_AS(load_state(tmp.file("missing.bqck")), Error);
  const std::string path = tmp.file("header_only.bqck");
  save_states(path, {random_state(8)});
  fs::resize_file(path, 16);  // header only, no records
  CHECK_THROWS_AS(load_state(path), CorruptionError);
}

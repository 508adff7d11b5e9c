#include "bqlab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>

#include "bqlab/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");
static_assert(sizeof(double) == 8);

namespace bqlab {

namespace {

constexpr char kMagic[8] = {'B', 'Q', 'L', 'A', 'B', 'C', 'K', '\0'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_all(std::FILE* f, const void* data, size_t bytes,
               const std::string& path) {
  if (std::fwrite(data, 1, bytes, f) != bytes)
    throw Error("checkpoint: short write to " + path);
}

}  // namespace

void save_states(const std::string& path, const std::vector<FieldState>& states) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error("checkpoint: cannot open " + path + " for writing");
  write_all(f.get(), kMagic, sizeof(kMagic), path);
  const std::uint32_t version = kCheckpointVersion, reserved = 0;
  write_all(f.get(), &version, 4, path);
  write_all(f.get(), &reserved, 4, path);
  for (const auto& s : states) {
    const double head[3] = {s.time, static_cast<double>(s.grid->n_points()),
                            s.grid->half_length()};
    write_all(f.get(), head, sizeof(head), path);
    write_all(f.get(), s.u1.data(), sizeof(double) * s.u1.size(), path);
    write_all(f.get(), s.u2.data(), sizeof(double) * s.u2.size(), path);
  }
  if (std::fflush(f.get()) != 0) throw Error("checkpoint: flush failed: " + path);
}

void save_state(const std::string& path, const FieldState& state) {
  save_states(path, {state});
}

std::vector<FieldState> load_states(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error("checkpoint: cannot open " + path);

  char magic[8];
  std::uint32_t version = 0, reserved = 0;
  if (std::fread(magic, 1, 8, f.get()) != 8 ||
      std::fread(&version, 1, 4, f.get()) != 4 ||
      std::fread(&reserved, 1, 4, f.get()) != 4)
    throw CorruptionError("checkpoint: " + path + " shorter than its header");
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("checkpoint: " + path + " has wrong magic bytes");
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: " + path + " is version " +
                      std::to_string(version) + ", this build reads version " +
                      std::to_string(kCheckpointVersion));

  std::vector<FieldState> states;
  for (;;) {
    double head[3];
    const size_t got = std::fread(head, sizeof(double), 3, f.get());
    if (got == 0) break;  // clean end of file
    if (got != 3)
      throw CorruptionError("checkpoint: " + path + " truncated mid-record");
    const double n_real = head[1];
    const int n = static_cast<int>(n_real);
    if (n_real != n || n < 16 || n % 2 != 0 || !(head[2] > 0))
      throw CorruptionError("checkpoint: " + path + " has an invalid record");
    FieldState s;
    s.time = head[0];
    s.grid = make_grid(head[2], n);
    s.u1.resize(n);
    s.u2.resize(n);
    if (std::fread(s.u1.data(), sizeof(double), n, f.get()) !=
            static_cast<size_t>(n) ||
        std::fread(s.u2.data(), sizeof(double), n, f.get()) !=
            static_cast<size_t>(n))
      throw CorruptionError("checkpoint: " + path + " truncated mid-record");
    states.push_back(std::move(s));
  }
  if (states.empty())
    throw CorruptionError("checkpoint: " + path + " holds no records");
  return states;
}

FieldState load_state(const std::string& path) {
  return load_states(path).front();
}

}  // namespace bqlab

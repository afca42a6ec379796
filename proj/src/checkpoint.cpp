#include "limix/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "limix/errors.hpp"

namespace limix {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void put_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& f, const std::string& path) {
  std::uint32_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), 4))
    throw MissingArtifactError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

void write_tensor_file(const std::string& path, const std::vector<const ParamSet*>& sets) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw MissingArtifactError("cannot open for write: " + path);
  f.write("LIMX", 4);
  put_u32(f, kCheckpointVersion);
  std::uint32_t count = 0;
  for (const auto* s : sets) count += static_cast<std::uint32_t>(s->tensors.size());
  put_u32(f, count);
  for (const auto* s : sets) {
    for (const auto& t : s->tensors) {
      put_u32(f, static_cast<std::uint32_t>(t.name.size()));
      f.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
      put_u32(f, static_cast<std::uint32_t>(t.shape.size()));
      for (int d : t.shape) put_u32(f, static_cast<std::uint32_t>(d));
      f.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    }
  }
  if (!f) throw MissingArtifactError("write failed: " + path);
}

ParamSet read_tensor_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifactError("checkpoint not found: " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "LIMX", 4) != 0)
    throw MissingArtifactError("bad magic in checkpoint: " + path);
  const std::uint32_t version = get_u32(f, path);
  if (version != kCheckpointVersion)
    throw MissingArtifactError("unsupported checkpoint version in " + path);
  const std::uint32_t count = get_u32(f, path);
  ParamSet out;
  out.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(f, path);
    std::string name(name_len, '\0');
    if (!f.read(name.data(), name_len))
      throw MissingArtifactError("truncated checkpoint: " + path);
    const std::uint32_t rank = get_u32(f, path);
    std::vector<int> shape(rank);
    std::size_t n = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(get_u32(f, path));
      n *= static_cast<std::size_t>(shape[r]);
    }
    Tensor t;
    t.name = std::move(name);
    t.shape = std::move(shape);
    t.data.resize(n);
    if (!f.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(n * sizeof(double))))
      throw MissingArtifactError("truncated checkpoint: " + path);
    out.tensors.push_back(std::move(t));
  }
  return out;
}

}  // namespace limix

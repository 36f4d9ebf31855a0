#include "vitcolor/container.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace vitcolor {
namespace {

constexpr char kMagic[4] = {'V', 'C', 'P', 'C'};

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_raw(std::FILE* f, const void* p, std::size_t n) {
  if (std::fwrite(p, 1, n, f) != n) throw std::runtime_error("container: write failed");
}

void read_raw(std::FILE* f, void* p, std::size_t n) {
  if (std::fread(p, 1, n, f) != n) throw std::runtime_error("container: truncated file");
}

template <typename T>
void write_pod(std::FILE* f, T v) {
  write_raw(f, &v, sizeof v);
}

template <typename T>
T read_pod(std::FILE* f) {
  T v;
  read_raw(f, &v, sizeof v);
  return v;
}

}  // namespace

void write_entries(const std::string& path, const std::vector<RawEntry>& entries) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw std::runtime_error("container: cannot open for write: " + path);
  write_raw(f.get(), kMagic, sizeof kMagic);
  write_pod<std::uint32_t>(f.get(), kContainerVersion);
  write_pod<std::uint64_t>(f.get(), entries.size());
  for (const auto& e : entries) {
    write_pod<std::uint32_t>(f.get(), static_cast<std::uint32_t>(e.name.size()));
    write_raw(f.get(), e.name.data(), e.name.size());
    write_pod<std::uint8_t>(f.get(), e.dtype);
    write_pod<std::uint32_t>(f.get(), static_cast<std::uint32_t>(e.shape.size()));
    for (auto d : e.shape) write_pod<std::int64_t>(f.get(), d);
    write_pod<std::uint64_t>(f.get(), e.data.size());
    write_raw(f.get(), e.data.data(), e.data.size());
  }
  if (std::fflush(f.get()) != 0) throw std::runtime_error("container: flush failed: " + path);
}

std::vector<RawEntry> read_entries(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("container: cannot open: " + path);
  char magic[4];
  read_raw(f.get(), magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("container: bad magic in " + path);
  const auto version = read_pod<std::uint32_t>(f.get());
  if (version != kContainerVersion)
    throw std::runtime_error("container: unsupported version " + std::to_string(version) +
                             " in " + path);
  const auto count = read_pod<std::uint64_t>(f.get());
  std::vector<RawEntry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    RawEntry e;
    const auto name_len = read_pod<std::uint32_t>(f.get());
    e.name.resize(name_len);
    read_raw(f.get(), e.name.data(), name_len);
    e.dtype = read_pod<std::uint8_t>(f.get());
    const auto rank = read_pod<std::uint32_t>(f.get());
    e.shape.resize(rank);
    for (auto& d : e.shape) d = read_pod<std::int64_t>(f.get());
    const auto bytes = read_pod<std::uint64_t>(f.get());
    e.data.resize(bytes);
    read_raw(f.get(), e.data.data(), bytes);
    entries.push_back(std::move(e));
  }
  return entries;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a64_file(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw std::runtime_error("hash: cannot open: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  unsigned char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f.get())) > 0)
    for (std::size_t i = 0; i < n; ++i) {
      h ^= buf[i];
      h *= 0x100000001b3ULL;
    }
  return h;
}

}  // namespace vitcolor

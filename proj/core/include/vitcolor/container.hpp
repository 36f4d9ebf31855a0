#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "vitcolor/params.hpp"
#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// On-disk tensor container: magic "VCPC", a version header, then named
/// tensors (little-endian payloads). Loads are strict: unknown versions,
/// name or shape mismatches, and truncated files all throw.
struct RawEntry {
  std::string name;
  std::uint8_t dtype = 0;  // 0 = f32, 1 = f64
  Shape shape;
  std::vector<unsigned char> data;
};

inline constexpr std::uint32_t kContainerVersion = 1;

void write_entries(const std::string& path, const std::vector<RawEntry>& entries);
std::vector<RawEntry> read_entries(const std::string& path);

/// FNV-1a 64-bit hash; used to fingerprint weight files in manifests.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);

namespace detail {

template <typename T>
constexpr std::uint8_t dtype_code();
template <>
constexpr std::uint8_t dtype_code<float>() { return 0; }
template <>
constexpr std::uint8_t dtype_code<double>() { return 1; }

}  // namespace detail

template <typename T>
RawEntry to_entry(const std::string& name, const Tensor<T>& t) {
  RawEntry e;
  e.name = name;
  e.dtype = detail::dtype_code<T>();
  e.shape = t.shape();
  e.data.resize(static_cast<std::size_t>(t.numel()) * sizeof(T));
  std::memcpy(e.data.data(), t.data(), e.data.size());
  return e;
}

template <typename T>
Tensor<T> from_entry(const RawEntry& e) {
  if (e.dtype != detail::dtype_code<T>())
    throw std::runtime_error("container: dtype mismatch for " + e.name);
  Tensor<T> t(e.shape);
  if (e.data.size() != static_cast<std::size_t>(t.numel()) * sizeof(T))
    throw std::runtime_error("container: payload size mismatch for " + e.name);
  std::memcpy(t.data(), e.data.data(), e.data.size());
  return t;
}

/// Serializes every parameter and buffer of a store.
template <typename T>
void save_params(const std::string& path, const ParamStore<T>& store) {
  std::vector<RawEntry> entries;
  for (const auto& [name, v] : store.params()) entries.push_back(to_entry(name, v->value));
  for (const auto& [name, t] : store.buffers()) entries.push_back(to_entry(name, *t));
  write_entries(path, entries);
}

/// Restores a store in place. The file must contain exactly the store's
/// names with matching shapes and dtype; anything else throws.
template <typename T>
void load_params(const std::string& path, ParamStore<T>& store) {
  const auto entries = read_entries(path);
  const std::size_t expected = store.params().size() + store.buffers().size();
  if (entries.size() != expected)
    throw std::runtime_error("container: " + path + " has " + std::to_string(entries.size()) +
                             " entries, model expects " + std::to_string(expected));
  auto find = [&entries](const std::string& name) -> const RawEntry& {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw std::runtime_error("container: missing entry " + name);
  };
  for (const auto& [name, v] : store.params()) {
    Tensor<T> t = from_entry<T>(find(name));
    if (!t.same_shape(v->value))
      throw std::runtime_error("container: shape mismatch for " + name + ": file " +
                               shape_str(t.shape()) + " vs model " + shape_str(v->value.shape()));
    v->value = std::move(t);
  }
  for (const auto& [name, buf] : store.buffers()) {
    Tensor<T> t = from_entry<T>(find(name));
    if (!t.same_shape(*buf))
      throw std::runtime_error("container: shape mismatch for " + name);
    *buf = std::move(t);
  }
}

}  // namespace vitcolor

// Copyright 2026 The dgfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "core/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "core/error.hpp"

namespace dgf {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'F', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string path) : bytes_(std::move(bytes)), path_(std::move(path)) {}

  template <typename T>
  T get() {
    T v;
    need(sizeof(T));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void read(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw SchemaError("checkpoint " + path_ + ": truncated");
  }
  std::vector<char> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put(os, kCheckpointVersion);
  put(os, static_cast<std::uint64_t>(entries.size()));
  for (const auto& e : entries) {
    put(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put(os, static_cast<std::uint32_t>(e.tensor.ndim()));
    for (auto d : e.tensor.shape()) put(os, static_cast<std::int64_t>(d));
    auto v = e.tensor.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!os) throw IoError("failed writing checkpoint: " + path);
}

std::vector<NamedTensor> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("checkpoint not found: " + path);
  Reader r(std::vector<char>(std::istreambuf_iterator<char>(is), {}), path);
  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw SchemaError("checkpoint " + path + ": bad magic");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw SchemaError("checkpoint " + path + ": unsupported format version " + std::to_string(version));
  }
  const auto count = r.get<std::uint64_t>();
  std::vector<NamedTensor> entries;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>();
    std::string name(name_len, '\0');
    r.read(name.data(), name_len);
    const auto rank = r.get<std::uint32_t>();
    if (rank > 16) throw SchemaError("checkpoint " + path + ": entry " + name + " has absurd rank");
    Shape shape(rank);
    for (auto& d : shape) {
      d = r.get<std::int64_t>();
      if (d < 0) throw SchemaError("checkpoint " + path + ": entry " + name + " has negative extent");
    }
    std::vector<double> values(static_cast<std::size_t>(numel_of(shape)));
    r.read(values.data(), values.size() * sizeof(double));
    entries.push_back({std::move(name), Tensor::from(std::move(shape), std::move(values))});
  }
  if (!r.done()) throw SchemaError("checkpoint " + path + ": trailing bytes");
  return entries;
}

const NamedTensor* find_entry(const std::vector<NamedTensor>& entries, const std::string& name) {
  auto it = std::find_if(entries.begin(), entries.end(), [&](const NamedTensor& e) { return e.name == name; });
  return it == entries.end() ? nullptr : &*it;
}

void restore_parameters(ParamStore& store, const std::vector<NamedTensor>& entries) {
  for (const auto& p : store.parameters()) {
    const NamedTensor* e = find_entry(entries, p.name);
    if (!e) throw SchemaError("checkpoint is missing parameter " + p.name);
    if (e->tensor.shape() != p.tensor.shape()) {
      throw SchemaError("checkpoint parameter " + p.name + " has shape " + shape_str(e->tensor.shape()) +
                        ", model expects " + shape_str(p.tensor.shape()));
    }
    Tensor t = p.tensor;
    std::copy(e->tensor.values().begin(), e->tensor.values().end(), t.mutable_values().begin());
  }
}

}  // namespace dgf

// Copyright 2026 The prefiqa Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "prefiqa/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "prefiqa/error.hpp"

namespace prefiqa::nn {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  void U32(uint32_t v) { Raw(&v, sizeof v); }
  void I32(int32_t v) { Raw(&v, sizeof v); }
  void Bytes(const std::string& s) {
    U32(static_cast<uint32_t>(s.size()));
    Raw(s.data(), s.size());
  }
  void Raw(const void* p, size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& buffer() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(std::vector<char> buf, std::string name) : buf_(std::move(buf)), name_(std::move(name)) {}
  uint32_t U32() {
    uint32_t v;
    Raw(&v, sizeof v);
    return v;
  }
  int32_t I32() {
    int32_t v;
    Raw(&v, sizeof v);
    return v;
  }
  std::string Bytes() {
    const uint32_t n = U32();
    Need(n);
    std::string s(buf_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  void Raw(void* p, size_t n) {
    Need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == buf_.size(); }
  [[noreturn]] void Fail(const std::string& what) const {
    throw Error(ErrorCode::kMalformedCheckpoint, name_ + ": " + what);
  }

 private:
  void Need(size_t n) const {
    if (buf_.size() - pos_ < n) Fail("unexpected end of file");
  }
  std::vector<char> buf_;
  std::string name_;
  size_t pos_ = 0;
};

}  // namespace

void WriteCheckpoint(const std::filesystem::path& path, const std::string& metadata,
                     std::span<const Parameter* const> params) {
  Writer w;
  w.Raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.U32(kCheckpointVersion);
  w.Bytes(metadata);
  w.U32(static_cast<uint32_t>(params.size()));
  for (const Parameter* p : params) {
    w.Bytes(p->id);
    w.U32(static_cast<uint32_t>(p->value.rank()));
    for (int d : p->value.shape()) w.I32(d);
    const auto data = p->value.data();
    w.Raw(data.data(), data.size() * sizeof(float));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());
  char magic[sizeof kCheckpointMagic];
  r.Raw(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) r.Fail("bad magic");
  const uint32_t version = r.U32();
  if (version != kCheckpointVersion) r.Fail("unsupported version " + std::to_string(version));
  Checkpoint ck;
  ck.metadata = r.Bytes();
  const uint32_t count = r.U32();
  for (uint32_t i = 0; i < count; ++i) {
    std::string id = r.Bytes();
    const uint32_t rank = r.U32();
    if (rank == 0 || rank > 8) r.Fail("tensor '" + id + "' has invalid rank");
    Shape shape(rank);
    for (auto& d : shape) {
      d = r.I32();
      if (d <= 0) r.Fail("tensor '" + id + "' has a non-positive dimension");
    }
    std::vector<float> data(NumElements(shape));
    r.Raw(data.data(), data.size() * sizeof(float));
    ck.tensors.emplace_back(std::move(id), Tensor(std::move(shape), std::move(data)));
  }
  if (!r.AtEnd()) r.Fail("trailing bytes after last tensor");
  return ck;
}

void RestoreParameters(const Checkpoint& checkpoint, std::span<Parameter* const> params) {
  std::map<std::string, const Tensor*> by_id;
  for (const auto& [id, t] : checkpoint.tensors) {
    if (!by_id.emplace(id, &t).second) {
      throw Error(ErrorCode::kMalformedCheckpoint, "duplicate tensor '" + id + "'");
    }
  }
  if (by_id.size() != params.size()) {
    throw Error(ErrorCode::kMalformedCheckpoint,
                "checkpoint holds " + std::to_string(by_id.size()) +
                    " tensors, model expects " + std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    auto it = by_id.find(p->id);
    if (it == by_id.end()) {
      throw Error(ErrorCode::kMalformedCheckpoint, "missing tensor '" + p->id + "'");
    }
    if (it->second->shape() != p->value.shape()) {
      throw Error(ErrorCode::kMalformedCheckpoint,
                  "tensor '" + p->id + "' has shape " + ShapeString(it->second->shape()) +
                      ", model expects " + ShapeString(p->value.shape()));
    }
  }
  for (Parameter* p : params) {
    const Tensor& src = *by_id.at(p->id);
    std::copy(src.data().begin(), src.data().end(), p->value.data().begin());
  }
}

}  // namespace prefiqa::nn

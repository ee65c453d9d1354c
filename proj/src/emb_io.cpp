// Copyright 2026 The imthresh Authors.
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

#include "imthresh/emb_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <unordered_set>

#include "imthresh/errors.hpp"

namespace imthresh {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t offset() const { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("truncated .emb file while reading ") +
                            what,
                        pos_);
    }
  }

  template <typename T>
  T get_le(const char* what) {
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(bytes_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix) {
  if (matrix.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("embedding dimension does not fit in u32");
  }
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(matrix.dim()));
  put_le<std::uint64_t>(out, matrix.count());
  for (const auto& id : matrix.ids()) {
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("embedding id longer than 65535 bytes");
    }
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
    out.insert(out.end(), id.begin(), id.end());
  }
  out.reserve(out.size() + matrix.data().size() * 4);
  for (float x : matrix.data()) {
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(x));
  }
  return out;
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("bad .emb magic, expected \"EMB1\"", 0);
  }
  const std::uint64_t dim_offset = in.offset();
  const auto dim = in.get_le<std::uint32_t>("dim");
  if (dim == 0) throw FormatError("embedding dimension must be positive", dim_offset);
  const auto count = in.get_le<std::uint64_t>("count");

  // Each row needs at least 2 id-length bytes plus its payload; reject absurd
  // counts before allocating.
  const std::uint64_t remaining = bytes.size() - in.offset();
  if (count > remaining / (2 + 4ULL * dim)) {
    throw FormatError("row count " + std::to_string(count) +
                          " exceeds file size",
                      in.offset());
  }

  std::vector<std::string> ids;
  ids.reserve(count);
  std::unordered_set<std::string> seen;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t id_offset = in.offset();
    const auto len = in.get_le<std::uint16_t>("id length");
    const auto raw = in.take(len, "id bytes");
    ids.emplace_back(reinterpret_cast<const char*>(raw.data()), raw.size());
    if (!seen.insert(ids.back()).second) {
      throw FormatError("duplicate embedding id '" + ids.back() + "'",
                        id_offset);
    }
  }

  std::vector<float> data(count * dim);
  in.need(data.size() * 4, "payload");
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::uint64_t row_offset = in.offset();
    double sq = 0.0;
    for (std::uint32_t c = 0; c < dim; ++c) {
      const float x = std::bit_cast<float>(in.get_le<std::uint32_t>("payload"));
      if (!std::isfinite(x)) {
        throw FormatError("non-finite value in row '" + ids[r] + "'",
                          row_offset);
      }
      sq += static_cast<double>(x) * x;
      data[r * dim + c] = x;
    }
    if (!(sq > 0.0)) {
      throw FormatError("zero-norm row '" + ids[r] + "'", row_offset);
    }
  }
  if (!in.at_end()) {
    throw FormatError("trailing bytes after .emb payload", in.offset());
  }
  return EmbeddingMatrix(dim, std::move(data), std::move(ids));
}

EmbeddingMatrix read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open embedding file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_embeddings(bytes);
  } catch (const FormatError& e) {
    throw e.with_context(path.string() + ": ");
  }
}

void write_embedding_file(const EmbeddingMatrix& matrix,
                          const std::filesystem::path& path) {
  const auto bytes = encode_embeddings(matrix);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

}  // namespace imthresh

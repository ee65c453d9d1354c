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

#ifndef IMTHRESH_EMB_IO_HPP_
#define IMTHRESH_EMB_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "imthresh/embeddings.hpp"

namespace imthresh {

// Binary ".emb" layout, all integers little-endian:
//
//   "EMB1"                         4 bytes magic
//   dim                            u32
//   count                          u64
//   count x (u16 len, len bytes)   UTF-8 row ids
//   count x dim float32            row-major payload
//
// Readers reject bad magic, truncation, trailing bytes, duplicate ids and
// non-finite / zero-norm rows with a FormatError carrying the byte offset.

std::vector<std::uint8_t> encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);

EmbeddingMatrix read_embedding_file(const std::filesystem::path& path);
// Creates missing parent directories.
void write_embedding_file(const EmbeddingMatrix& matrix,
                          const std::filesystem::path& path);

}  // namespace imthresh

#endif  // IMTHRESH_EMB_IO_HPP_

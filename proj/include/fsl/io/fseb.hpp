#pragma once

// FSEB v1, the embedding store exchanged with the exporter:
//
//   "FSEB"  u16 version=1  u32 count  u32 dim
//   u32 provenance_len  provenance (UTF-8)
//   count x { u32 id_len  id (UTF-8)  dim x f32 }
//
// All integers and floats little-endian.

#include <string>
#include <vector>

#include "fsl/embedding_store.hpp"

namespace fsl::io {

inline constexpr std::uint16_t kFsebVersion = 1;

std::vector<unsigned char> encode_embedding_store(const FrozenEmbeddingStore& store);
FrozenEmbeddingStore decode_embedding_store(const std::vector<unsigned char>& bytes);

void write_embedding_store(const std::string& path, const FrozenEmbeddingStore& store);
FrozenEmbeddingStore read_embedding_store(const std::string& path);

}  // namespace fsl::io

#pragma once

// FSCK v1 model checkpoint, little-endian:
//
//   "FSCK"  u16 version=1  u8 scalar_bytes (4 | 8)
//   encoder spec: u8 kind  u8 init  u32 rank  rank x u64 dims  u64 embedding_dim
//                 u32 n_hidden  n_hidden x u64  u64 seed
//   str model_id  str metadata (JSON text)
//   u32 n_params, then per parameter: str name  u32 rank  rank x u64 dims  data
//   adam: u64 step  f64 lr  f64 beta1  f64 beta2  f64 epsilon
//         first moments (data only, parameter order), then second moments
//
// str = u32 byte length + UTF-8. Tensor data uses the scalar width.

#include <string>
#include <variant>
#include <vector>

#include "fsl/trainer.hpp"

namespace fsl::io {

inline constexpr std::uint16_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
    ProtoModel<T> model;
    std::string metadata;
};

using AnyCheckpoint = std::variant<Checkpoint<float>, Checkpoint<double>>;

template <typename T>
std::vector<unsigned char> encode_checkpoint(const ProtoModel<T>& model, const std::string& metadata);
AnyCheckpoint decode_checkpoint(const std::vector<unsigned char>& bytes);

template <typename T>
void write_checkpoint(const std::string& path, const ProtoModel<T>& model, const std::string& metadata);
AnyCheckpoint read_checkpoint(const std::string& path);

}  // namespace fsl::io

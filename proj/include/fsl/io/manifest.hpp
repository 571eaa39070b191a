#pragma once

// Dataset manifest (JSON) and the FSRT raw tensor payload it points at.
//
// Manifest, schema_version 1:
//   {
//     "schema_version": 1,
//     "classes": ["name", ...],
//     "sample_shape": [d0, ...],
//     "normalized": false,
//     "payload": {"format": "FSRT" | "FSEB", "path": "<relative to manifest>"},
//     "samples": [{"id": "...", "class": 0, "offset": 0, "length": 16}, ...]
//   }
// For an FSEB payload, samples are looked up by id in the embedding store and
// offset/length are ignored.
//
// FSRT v1: "FSRT"  u16 version=1  u64 count  count x f32, little-endian.

#include <string>
#include <vector>

#include "fsl/dataset.hpp"

namespace fsl::io {

inline constexpr int kManifestSchema = 1;
inline constexpr std::uint16_t kFsrtVersion = 1;

enum class PayloadFormat { Fsrt, Fseb };

struct DatasetManifest {
    int schema_version = kManifestSchema;
    std::vector<std::string> class_names;
    Shape sample_shape;
    bool normalized = false;
    PayloadFormat payload_format = PayloadFormat::Fsrt;
    std::string payload_path;
    std::vector<SampleRecord> samples;

    bool operator==(const DatasetManifest&) const = default;
};

std::string manifest_to_string(const DatasetManifest& manifest);
DatasetManifest manifest_from_string(const std::string& text);

void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::string& path);

std::vector<unsigned char> encode_raw_tensor(const std::vector<float>& values);
std::vector<float> decode_raw_tensor(const std::vector<unsigned char>& bytes);

// Writes the manifest at manifest_path and the FSRT payload beside it
// (same stem, .fsrt extension).
void save_dataset(const std::string& manifest_path, const Dataset& data);
// Resolves the payload relative to the manifest and validates the result.
Dataset load_dataset(const std::string& manifest_path);

}  // namespace fsl::io

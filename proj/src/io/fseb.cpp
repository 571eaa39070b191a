#include "fsl/io/fseb.hpp"

#include <cstring>
#include <limits>

#include "fsl/io/binary.hpp"

namespace fsl::io {

std::vector<unsigned char> encode_embedding_store(const FrozenEmbeddingStore& store) {
    if (store.size() > std::numeric_limits<std::uint32_t>::max() ||
        store.source_dim() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("embedding store too large for FSEB v1");
    }
    ByteWriter w;
    w.magic("FSEB");
    w.u16(kFsebVersion);
    w.u32(static_cast<std::uint32_t>(store.size()));
    w.u32(static_cast<std::uint32_t>(store.source_dim()));
    w.str(store.provenance());
    for (std::size_t i = 0; i < store.size(); ++i) {
        w.str(store.ids()[i]);
        for (float v : store.vector_at(i)) w.f32(v);
    }
    return w.buffer();
}

namespace {

// Walks the records assuming vectors of `dim` floats, skipping payloads.
// True when exactly `count` records consume the rest of the buffer.
bool records_fit(const std::vector<unsigned char>& bytes, std::size_t start, std::uint32_t count, std::size_t dim) {
    std::size_t pos = start;
    for (std::uint32_t i = 0; i < count; ++i) {
        if (bytes.size() - pos < 4) return false;
        std::uint32_t id_len;
        std::memcpy(&id_len, bytes.data() + pos, 4);
        pos += 4;
        const std::size_t need = static_cast<std::size_t>(id_len) + dim * 4;
        if (bytes.size() - pos < need) return false;
        pos += need;
    }
    return pos == bytes.size();
}

// On a failed parse, distinguishes a wrong header dim from a cut-off file by
// searching for another vector length under which the records fit exactly.
[[noreturn]] void diagnose(const std::vector<unsigned char>& bytes, std::size_t records_start, std::uint32_t count,
                           std::uint32_t dim, FormatError original) {
    if (count > 0) {
        const std::size_t max_dim = (bytes.size() - records_start) / (4 * static_cast<std::size_t>(count));
        for (std::size_t d = 1; d <= max_dim; ++d) {
            if (d != dim && records_fit(bytes, records_start, count, d)) {
                throw FormatError(FormatErrorKind::DimensionMismatch,
                                  "dimension mismatch: header dim " + std::to_string(dim) +
                                      " but records hold vectors of length " + std::to_string(d));
            }
        }
    }
    throw original;
}

}  // namespace

FrozenEmbeddingStore decode_embedding_store(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes);
    r.expect_magic("FSEB", "an FSEB embedding store");
    const std::uint16_t version = r.u16();
    if (version != kFsebVersion) {
        throw FormatError(FormatErrorKind::UnsupportedVersion,
                          "unsupported version " + std::to_string(version) + " (reader supports 1)");
    }
    const std::uint32_t count = r.u32();
    const std::uint32_t dim = r.u32();
    FrozenEmbeddingStore store(dim, r.str());
    const std::size_t records_start = r.position();
    std::vector<std::pair<std::string, std::vector<float>>> records;
    try {
        for (std::uint32_t i = 0; i < count; ++i) {
            std::string id = r.str();
            if (r.remaining() < static_cast<std::size_t>(dim) * 4) {
                throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload in record " + std::to_string(i));
            }
            std::vector<float> v(dim);
            r.bytes(v.data(), static_cast<std::size_t>(dim) * 4);
            records.emplace_back(std::move(id), std::move(v));
        }
        if (r.remaining() != 0) {
            throw FormatError(FormatErrorKind::Malformed,
                              std::to_string(r.remaining()) + " trailing bytes after the last record");
        }
    } catch (const FormatError& e) {
        diagnose(bytes, records_start, count, dim, e);
    }
    for (auto& [id, v] : records) {
        if (store.find(id) != nullptr) {
            throw FormatError(FormatErrorKind::Malformed, "duplicate sample id '" + id + "'");
        }
        store.insert(std::move(id), std::move(v));
    }
    return store;
}

void write_embedding_store(const std::string& path, const FrozenEmbeddingStore& store) {
    write_file(path, encode_embedding_store(store));
}

FrozenEmbeddingStore read_embedding_store(const std::string& path) {
    return decode_embedding_store(read_file(path));
}

}  // namespace fsl::io

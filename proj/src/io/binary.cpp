#include "fsl/io/binary.hpp"

#include <fstream>
#include <iterator>
#include <limits>

namespace fsl::io {

void ByteWriter::str(std::string_view s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidArgument("string too long to serialize");
    }
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void ByteReader::bytes(void* out, std::size_t n) {
    if (n > remaining()) {
        throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload at byte " + std::to_string(pos_) +
                                                          " (need " + std::to_string(n) + ", have " +
                                                          std::to_string(remaining()) + ")");
    }
    if (n > 0) std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
}

void ByteReader::expect_magic(std::string_view m, const char* format) {
    std::string got(m.size(), '\0');
    if (remaining() < m.size()) {
        throw FormatError(FormatErrorKind::BadMagic, std::string("bad magic: file too short to be ") + format);
    }
    bytes(got.data(), got.size());
    if (got != m) {
        throw FormatError(FormatErrorKind::BadMagic,
                          std::string("bad magic: expected \"") + std::string(m) + "\" for " + format);
    }
}

std::string ByteReader::str() {
    const std::uint32_t n = u32();
    if (n > remaining()) {
        throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload: string of " + std::to_string(n) +
                                                          " bytes at byte " + std::to_string(pos_));
    }
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
}

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for reading");
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<unsigned char>& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw FormatError(FormatErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace fsl::io

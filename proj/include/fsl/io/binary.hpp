#pragma once

// Little-endian primitives shared by the binary file formats.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "fsl/error.hpp"

namespace fsl::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

class ByteWriter {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    void magic(std::string_view m) { bytes(m.data(), m.size()); }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { bytes(&v, 2); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void u64(std::uint64_t v) { bytes(&v, 8); }
    void f32(float v) { bytes(&v, 4); }
    void f64(double v) { bytes(&v, 8); }
    // u32 length prefix, then the raw UTF-8 bytes.
    void str(std::string_view s);

    const std::vector<unsigned char>& buffer() const noexcept { return buf_; }

private:
    std::vector<unsigned char> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<unsigned char>& buf) : buf_(buf) {}

    // Throws FormatError(BadMagic) when the leading bytes differ.
    void expect_magic(std::string_view m, const char* format);
    std::uint8_t u8() { return pod<std::uint8_t>(); }
    std::uint16_t u16() { return pod<std::uint16_t>(); }
    std::uint32_t u32() { return pod<std::uint32_t>(); }
    std::uint64_t u64() { return pod<std::uint64_t>(); }
    float f32() { return pod<float>(); }
    double f64() { return pod<double>(); }
    std::string str();
    void bytes(void* out, std::size_t n);

    std::size_t remaining() const noexcept { return buf_.size() - pos_; }
    std::size_t position() const noexcept { return pos_; }

private:
    template <typename P>
    P pod() {
        P v;
        bytes(&v, sizeof v);
        return v;
    }

    const std::vector<unsigned char>& buf_;
    std::size_t pos_ = 0;
};

std::vector<unsigned char> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<unsigned char>& data);

}  // namespace fsl::io

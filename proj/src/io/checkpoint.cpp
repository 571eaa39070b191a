#include "fsl/io/checkpoint.hpp"

#include "fsl/io/binary.hpp"

namespace fsl::io {

namespace {

void write_shape(ByteWriter& w, const Shape& shape) {
    w.u32(static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) w.u64(d);
}

Shape read_shape(ByteReader& r) {
    const std::uint32_t rank = r.u32();
    if (rank > 16) throw FormatError(FormatErrorKind::Malformed, "implausible tensor rank " + std::to_string(rank));
    Shape s(rank);
    for (auto& d : s) d = r.u64();
    return s;
}

template <typename T>
void write_data(ByteWriter& w, const Tensor<T>& t) {
    w.bytes(t.data().data(), t.size() * sizeof(T));
}

template <typename T>
Tensor<T> read_data(ByteReader& r, const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw FormatError(FormatErrorKind::Malformed, "zero tensor dimension");
        if (n > r.remaining() / d) throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload");
        n *= d;
    }
    if (n > r.remaining() / sizeof(T)) throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload");
    std::vector<T> data(n);
    r.bytes(data.data(), n * sizeof(T));
    return Tensor<T>(shape, std::move(data));
}

template <typename T>
Checkpoint<T> decode_body(ByteReader& r) {
    EncoderSpec spec;
    const std::uint8_t kind = r.u8();
    const std::uint8_t init = r.u8();
    if (kind > 2 || init > 1) throw FormatError(FormatErrorKind::Malformed, "unknown encoder kind/init code");
    spec.kind = static_cast<EncoderKind>(kind);
    spec.init = static_cast<InitScheme>(init);
    spec.input_shape = read_shape(r);
    spec.embedding_dim = r.u64();
    const std::uint32_t n_hidden = r.u32();
    if (n_hidden > r.remaining() / 8) throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload");
    spec.hidden.resize(n_hidden);
    for (auto& h : spec.hidden) h = r.u64();
    spec.seed = r.u64();
    std::string id = r.str();
    std::string metadata = r.str();

    ParameterStore<T> params;
    const std::uint32_t n_params = r.u32();
    for (std::uint32_t i = 0; i < n_params; ++i) {
        std::string name = r.str();
        const Shape shape = read_shape(r);
        params.add(std::move(name), read_data<T>(r, shape));
    }
    AdamState<T> adam;
    adam.step = r.u64();
    adam.learning_rate = r.f64();
    adam.beta1 = r.f64();
    adam.beta2 = r.f64();
    adam.epsilon = r.f64();
    for (std::uint32_t i = 0; i < n_params; ++i) adam.first_moment.push_back(read_data<T>(r, params.value(i).shape()));
    for (std::uint32_t i = 0; i < n_params; ++i) adam.second_moment.push_back(read_data<T>(r, params.value(i).shape()));
    if (r.remaining() != 0) throw FormatError(FormatErrorKind::Malformed, "trailing bytes after checkpoint");

    try {
        Encoder<T> encoder(std::move(spec), std::move(params));
        return Checkpoint<T>{ProtoModel<T>(std::move(id), std::move(encoder), std::move(adam)), std::move(metadata)};
    } catch (const Error& e) {
        throw FormatError(FormatErrorKind::Malformed, std::string("checkpoint does not describe a valid encoder: ") +
                                                          e.what());
    }
}

}  // namespace

template <typename T>
std::vector<unsigned char> encode_checkpoint(const ProtoModel<T>& model, const std::string& metadata) {
    ByteWriter w;
    w.magic("FSCK");
    w.u16(kCheckpointVersion);
    w.u8(static_cast<std::uint8_t>(sizeof(T)));
    const EncoderSpec& spec = model.encoder.spec();
    w.u8(static_cast<std::uint8_t>(spec.kind));
    w.u8(static_cast<std::uint8_t>(spec.init));
    write_shape(w, spec.input_shape);
    w.u64(spec.embedding_dim);
    w.u32(static_cast<std::uint32_t>(spec.hidden.size()));
    for (std::size_t h : spec.hidden) w.u64(h);
    w.u64(spec.seed);
    w.str(model.id);
    w.str(metadata);

    const ParameterStore<T>& params = model.encoder.params();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params.entries()) {
        w.str(p.name);
        write_shape(w, p.value.shape());
        write_data(w, p.value);
    }
    const AdamState<T>& adam = model.optimizer;
    if (adam.first_moment.size() != params.size() || adam.second_moment.size() != params.size()) {
        throw ShapeError("optimizer state does not match the parameters");
    }
    w.u64(adam.step);
    w.f64(adam.learning_rate);
    w.f64(adam.beta1);
    w.f64(adam.beta2);
    w.f64(adam.epsilon);
    for (const auto& m : adam.first_moment) write_data(w, m);
    for (const auto& v : adam.second_moment) write_data(w, v);
    return w.buffer();
}

AnyCheckpoint decode_checkpoint(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes);
    r.expect_magic("FSCK", "an FSCK checkpoint");
    const std::uint16_t version = r.u16();
    if (version != kCheckpointVersion) {
        throw FormatError(FormatErrorKind::UnsupportedVersion,
                          "unsupported version " + std::to_string(version) + " of checkpoint");
    }
    switch (r.u8()) {
        case 4: return decode_body<float>(r);
        case 8: return decode_body<double>(r);
        default: throw FormatError(FormatErrorKind::Malformed, "checkpoint scalar width must be 4 or 8");
    }
}

template <typename T>
void write_checkpoint(const std::string& path, const ProtoModel<T>& model, const std::string& metadata) {
    write_file(path, encode_checkpoint(model, metadata));
}

AnyCheckpoint read_checkpoint(const std::string& path) {
    return decode_checkpoint(read_file(path));
}

template std::vector<unsigned char> encode_checkpoint(const ProtoModel<float>&, const std::string&);
template std::vector<unsigned char> encode_checkpoint(const ProtoModel<double>&, const std::string&);
template void write_checkpoint(const std::string&, const ProtoModel<float>&, const std::string&);
template void write_checkpoint(const std::string&, const ProtoModel<double>&, const std::string&);

}  // namespace fsl::io

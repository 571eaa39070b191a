#include "fsl/io/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fsl/io/binary.hpp"
#include "fsl/io/fseb.hpp"
#include "json.hpp"

namespace fsl::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw FormatError(FormatErrorKind::Malformed, "manifest: " + what);
}

}  // namespace

std::string manifest_to_string(const DatasetManifest& m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["classes"] = m.class_names;
    j["sample_shape"] = m.sample_shape;
    j["normalized"] = m.normalized;
    j["payload"] = {{"format", m.payload_format == PayloadFormat::Fsrt ? "FSRT" : "FSEB"}, {"path", m.payload_path}};
    json samples = json::array();
    for (const SampleRecord& s : m.samples) {
        samples.push_back({{"id", s.id}, {"class", s.class_id}, {"offset", s.offset}, {"length", s.length}});
    }
    j["samples"] = std::move(samples);
    return j.dump(1);
}

DatasetManifest manifest_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        malformed(std::string("invalid JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        m.schema_version = j.at("schema_version").get<int>();
        if (m.schema_version != kManifestSchema) {
            throw FormatError(FormatErrorKind::UnsupportedVersion,
                              "unsupported version " + std::to_string(m.schema_version) + " of dataset manifest");
        }
        m.class_names = j.at("classes").get<std::vector<std::string>>();
        m.sample_shape = j.at("sample_shape").get<Shape>();
        m.normalized = j.value("normalized", false);
        const std::string format = j.at("payload").at("format").get<std::string>();
        if (format == "FSRT") {
            m.payload_format = PayloadFormat::Fsrt;
        } else if (format == "FSEB") {
            m.payload_format = PayloadFormat::Fseb;
        } else {
            malformed("unknown payload format '" + format + "'");
        }
        m.payload_path = j.at("payload").at("path").get<std::string>();
        for (const json& s : j.at("samples")) {
            m.samples.push_back({s.at("id").get<std::string>(), s.at("class").get<std::size_t>(),
                                 s.value("offset", std::size_t{0}), s.value("length", std::size_t{0})});
        }
    } catch (const json::exception& e) {
        malformed(e.what());
    }
    return m;
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for writing");
    out << manifest_to_string(manifest) << '\n';
    if (!out) throw FormatError(FormatErrorKind::Io, "write to '" + path + "' failed");
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(FormatErrorKind::Io, "cannot open '" + path + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    return manifest_from_string(ss.str());
}

std::vector<unsigned char> encode_raw_tensor(const std::vector<float>& values) {
    ByteWriter w;
    w.magic("FSRT");
    w.u16(kFsrtVersion);
    w.u64(values.size());
    w.bytes(values.data(), values.size() * sizeof(float));
    return w.buffer();
}

std::vector<float> decode_raw_tensor(const std::vector<unsigned char>& bytes) {
    ByteReader r(bytes);
    r.expect_magic("FSRT", "an FSRT tensor payload");
    const std::uint16_t version = r.u16();
    if (version != kFsrtVersion) {
        throw FormatError(FormatErrorKind::UnsupportedVersion, "unsupported version " + std::to_string(version));
    }
    const std::uint64_t count = r.u64();
    if (count > r.remaining() / sizeof(float)) {
        throw FormatError(FormatErrorKind::Truncated, "unexpected end of payload: header announces " +
                                                          std::to_string(count) + " floats");
    }
    std::vector<float> values(count);
    r.bytes(values.data(), count * sizeof(float));
    if (r.remaining() != 0) throw FormatError(FormatErrorKind::Malformed, "trailing bytes after FSRT payload");
    return values;
}

void save_dataset(const std::string& manifest_path, const Dataset& data) {
    data.validate();
    const fs::path mp(manifest_path);
    if (mp.has_parent_path()) fs::create_directories(mp.parent_path());
    fs::path payload = mp;
    payload.replace_extension(".fsrt");
    write_file(payload.string(), encode_raw_tensor(*data.payload));

    DatasetManifest m;
    m.class_names = data.index.class_names();
    m.sample_shape = data.sample_shape;
    m.normalized = data.normalized;
    m.payload_format = PayloadFormat::Fsrt;
    m.payload_path = payload.filename().string();
    m.samples = data.index.samples();
    write_manifest(manifest_path, m);
}

Dataset load_dataset(const std::string& manifest_path) {
    DatasetManifest m = read_manifest(manifest_path);
    const fs::path payload_path = fs::path(manifest_path).parent_path() / m.payload_path;
    Dataset data;
    data.normalized = m.normalized;
    if (m.payload_format == PayloadFormat::Fsrt) {
        data.sample_shape = m.sample_shape;
        data.payload = std::make_shared<const std::vector<float>>(decode_raw_tensor(read_file(payload_path.string())));
    } else {
        const FrozenEmbeddingStore store = read_embedding_store(payload_path.string());
        if (shape_numel(m.sample_shape) != store.source_dim()) {
            throw FormatError(FormatErrorKind::DimensionMismatch,
                              "dimension mismatch: manifest sample shape " + shape_str(m.sample_shape) +
                                  " vs store dim " + std::to_string(store.source_dim()));
        }
        data.sample_shape = Shape{store.source_dim()};
        auto values = std::make_shared<std::vector<float>>();
        for (SampleRecord& s : m.samples) {
            const std::vector<float>* v = store.find(s.id);
            if (v == nullptr) throw InvalidArgument("unknown sample id '" + s.id + "' in embedding store");
            s.offset = values->size();
            s.length = v->size();
            values->insert(values->end(), v->begin(), v->end());
        }
        data.payload = std::move(values);
    }
    data.index = DatasetIndex(m.class_names, m.samples);
    data.validate();
    return data;
}

}  // namespace fsl::io

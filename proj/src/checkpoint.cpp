#include "djsr/checkpoint.hpp"

#include "djsr/binary_io.hpp"
#include "djsr/config_json.hpp"

namespace djsr {

namespace {

constexpr char kMagic[4] = {'D', 'J', 'S', 'R'};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& model) {
    ByteWriter w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.u32(model.finetuned ? 1u : 0u);
    w.u64(model.source_hash);
    w.u64(model.corpus_hash);
    w.i32(model.epochs_seen);
    w.str(nlohmann::json(model.config).dump());
    w.u32(static_cast<std::uint32_t>(model.layers.size()));
    for (const ConvLayer& layer : model.layers) {
        const Shape4& s = layer.weights.shape();
        w.u32(static_cast<std::uint32_t>(s.batch));
        w.u32(static_cast<std::uint32_t>(s.channels));
        w.u32(static_cast<std::uint32_t>(s.rows));
        w.u32(static_cast<std::uint32_t>(s.cols));
        w.u8(layer.zero_bias ? 1 : 0);
        w.u8(layer.rectify ? 1 : 0);
        for (float v : layer.weights.storage()) w.f32(v);
        for (float v : layer.bias) w.f32(v);
        for (float v : layer.momentum.storage()) w.f32(v);
        for (float v : layer.bias_momentum) w.f32(v);
    }
    return w.buffer();
}

ModelParams decode_checkpoint(std::vector<std::uint8_t> bytes, const std::string& source) {
    ByteReader r(std::move(bytes), source);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::format, source + ": not a DJSR checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        fail(ErrorKind::format, source + ": unsupported checkpoint version " + std::to_string(version));
    ModelParams model;
    model.finetuned = (r.u32() & 1u) != 0;
    model.source_hash = r.u64();
    model.corpus_hash = r.u64();
    model.epochs_seen = r.i32();
    try {
        model.config = nlohmann::json::parse(r.str()).get<SdcaeConfig>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, source + ": bad config block: " + e.what());
    }
    const std::uint32_t n_layers = r.u32();
    std::size_t prev_out = 1;
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::size_t out = r.u32(), in = r.u32(), kh = r.u32(), kw = r.u32();
        if (in != prev_out || out == 0 || kh * kw * in * out > (1u << 28))
            fail(ErrorKind::format, source + ": layer " + std::to_string(l) + " shape does not chain");
        const bool zero_bias = r.u8() != 0;
        const bool rectify = r.u8() != 0;
        ConvLayer layer(out, in, kh, kw, zero_bias, rectify);
        for (float& v : layer.weights.storage()) v = r.f32();
        for (float& v : layer.bias) v = r.f32();
        for (float& v : layer.momentum.storage()) v = r.f32();
        for (float& v : layer.bias_momentum) v = r.f32();
        model.layers.push_back(std::move(layer));
        prev_out = out;
    }
    if (!r.at_end()) fail(ErrorKind::format, source + ": trailing bytes after checkpoint");
    if (model.layers.size() != model.config.layers.size())
        fail(ErrorKind::format, source + ": layer count disagrees with config block");
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& model) {
    ByteWriter w;
    const auto bytes = encode_checkpoint(model);
    w.bytes(bytes.data(), bytes.size());
    w.save(path);
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(read_file(path), path.string());
}

}  // namespace djsr

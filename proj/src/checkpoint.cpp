#include "triage/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "triage/errors.hpp"

namespace triage {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'I', 'A', 'G', 'E', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t value) {
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_u64(std::ostream& out, std::uint64_t value) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<unsigned char>(value >> (8 * i));
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

void write_string(std::ostream& out, const std::string& value) {
    write_u32(out, static_cast<std::uint32_t>(value.size()));
    out.write(value.data(), static_cast<std::streamsize>(value.size()));
}

void write_f64_array(std::ostream& out, const double* data, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits;
        std::memcpy(&bits, &data[i], sizeof(bits));
        write_u64(out, bits);
    }
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw ValidationError("truncated checkpoint: " + path);
    }
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
        value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return value;
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw ValidationError("truncated checkpoint: " + path);
    }
    std::uint64_t value = 0;
    for (int i = 0; i < 8; ++i) {
        value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return value;
}

std::string read_string(std::istream& in, const std::string& path) {
    const std::uint32_t length = read_u32(in, path);
    std::string value(length, '\0');
    if (length > 0 && !in.read(value.data(), length)) {
        throw ValidationError("truncated checkpoint: " + path);
    }
    return value;
}

} // namespace

void save_checkpoint(const ModelParams& params, const Vocab& vocab, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open checkpoint for writing: " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    write_u32(out, kVersion);

    const auto& config = params.config;
    write_u32(out, static_cast<std::uint32_t>(config.d_model));
    write_u32(out, static_cast<std::uint32_t>(config.n_layers));
    write_u32(out, static_cast<std::uint32_t>(config.n_heads));
    write_u32(out, static_cast<std::uint32_t>(config.d_ff));
    write_u32(out, static_cast<std::uint32_t>(config.vocab_size));
    write_u32(out, static_cast<std::uint32_t>(config.max_len));
    write_u32(out, static_cast<std::uint32_t>(config.n_types));

    write_u32(out, static_cast<std::uint32_t>(vocab.tokens.size()));
    for (const auto& token : vocab.tokens) {
        write_string(out, token);
    }

    auto refs = named_tensors(const_cast<ModelParams&>(params));
    write_u32(out, static_cast<std::uint32_t>(refs.size()));
    for (const auto& ref : refs) {
        write_string(out, ref.name);
        write_u32(out, static_cast<std::uint32_t>(ref.shape.size()));
        for (std::size_t dim : ref.shape) {
            write_u32(out, static_cast<std::uint32_t>(dim));
        }
        write_f64_array(out, ref.data, ref.size);
    }
    if (!out.flush()) {
        throw ValidationError("write failed: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open checkpoint: " + path);
    }
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ValidationError("not a checkpoint file: " + path);
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != kVersion) {
        throw ValidationError("unsupported checkpoint version " + std::to_string(version) +
                              ": " + path);
    }

    ModelConfig config;
    config.d_model = read_u32(in, path);
    config.n_layers = read_u32(in, path);
    config.n_heads = read_u32(in, path);
    config.d_ff = read_u32(in, path);
    config.vocab_size = read_u32(in, path);
    config.max_len = read_u32(in, path);
    config.n_types = read_u32(in, path);
    config.validate();

    Checkpoint checkpoint;
    const std::uint32_t vocab_size = read_u32(in, path);
    if (vocab_size != config.vocab_size) {
        throw ValidationError("vocabulary size does not match configuration: " + path);
    }
    checkpoint.vocab.tokens.reserve(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i) {
        checkpoint.vocab.tokens.push_back(read_string(in, path));
        checkpoint.vocab.ids.emplace(checkpoint.vocab.tokens.back(), static_cast<int>(i));
    }
    if (vocab_size < 4 || checkpoint.vocab.tokens[0] != "[PAD]" ||
        checkpoint.vocab.tokens[1] != "[UNK]" || checkpoint.vocab.tokens[2] != "[CLS]" ||
        checkpoint.vocab.tokens[3] != "[SEP]") {
        throw ValidationError("checkpoint vocabulary lacks the reserved tokens: " + path);
    }

    checkpoint.params = init_params(config, 0);
    auto refs = named_tensors(checkpoint.params);
    const std::uint32_t tensor_count = read_u32(in, path);
    if (tensor_count != refs.size()) {
        throw ValidationError("checkpoint tensor count does not match configuration: " + path);
    }
    for (auto& ref : refs) {
        const std::string name = read_string(in, path);
        if (name != ref.name) {
            throw ValidationError("unexpected tensor '" + name + "' (wanted '" + ref.name +
                                  "'): " + path);
        }
        const std::uint32_t ndims = read_u32(in, path);
        if (ndims != ref.shape.size()) {
            throw ValidationError("tensor '" + name + "' rank mismatch: " + path);
        }
        for (std::size_t d = 0; d < ndims; ++d) {
            if (read_u32(in, path) != ref.shape[d]) {
                throw ValidationError("tensor '" + name + "' shape mismatch: " + path);
            }
        }
        for (std::size_t i = 0; i < ref.size; ++i) {
            const std::uint64_t bits = read_u64(in, path);
            std::memcpy(&ref.data[i], &bits, sizeof(bits));
        }
    }
    return checkpoint;
}

} // namespace triage

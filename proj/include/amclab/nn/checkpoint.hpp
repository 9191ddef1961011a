// Versioned parameter checkpoints.
//
// Container layout: 8-byte magic, u32 format version, u64 JSON header length,
// JSON header (names, shapes, caller metadata), then raw little-endian double
// payloads in header order. Raw bit copies make save/load round trips exact.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "amclab/nn/stack.hpp"

namespace amclab::nn {

constexpr char kCheckpointMagic[8] = {'A', 'M', 'C', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointTensor {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double> values;
};

struct Checkpoint {
    nlohmann::json meta;
    std::vector<CheckpointTensor> tensors;

    const CheckpointTensor& find(const std::string& name) const {
        for (const auto& t : tensors)
            if (t.name == name) return t;
        throw std::out_of_range("checkpoint: missing tensor " + name);
    }
};

namespace detail {
inline void write_u32(std::ostream& os, std::uint32_t v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    os.write(buf, 4);
}
inline void write_u64(std::ostream& os, std::uint64_t v) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    os.write(buf, 8);
}
inline std::uint32_t read_u32(std::istream& is) {
    char buf[4];
    is.read(buf, 4);
    std::uint32_t v;
    std::memcpy(&v, buf, 4);
    return v;
}
inline std::uint64_t read_u64(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    std::uint64_t v;
    std::memcpy(&v, buf, 8);
    return v;
}
}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta,
                            const std::vector<StateRef>& tensors) {
    nlohmann::json header;
    header["format_version"] = kCheckpointVersion;
    header["meta"] = meta;
    header["tensors"] = nlohmann::json::array();
    for (const auto& t : tensors)
        header["tensors"].push_back({{"name", t.name}, {"dims", t.dims}});
    const std::string header_text = header.dump();

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path.string());
    os.write(kCheckpointMagic, 8);
    detail::write_u32(os, kCheckpointVersion);
    detail::write_u64(os, header_text.size());
    os.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& t : tensors)
        os.write(reinterpret_cast<const char*>(t.value->data()),
                 static_cast<std::streamsize>(t.value->size() * sizeof(double)));
    if (!os) throw std::runtime_error("checkpoint: write failed: " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open: " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path.string());
    const std::uint32_t version = detail::read_u32(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported format version " +
                                 std::to_string(version));
    const std::uint64_t hlen = detail::read_u64(is);
    std::string header_text(hlen, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw std::runtime_error("checkpoint: truncated header in " + path.string());
    const nlohmann::json header = nlohmann::json::parse(header_text);

    Checkpoint ck;
    ck.meta = header.value("meta", nlohmann::json::object());
    for (const auto& tj : header.at("tensors")) {
        CheckpointTensor t;
        t.name = tj.at("name").get<std::string>();
        t.dims = tj.at("dims").get<std::vector<std::size_t>>();
        std::size_t n = 1;
        for (auto d : t.dims) n *= d;
        t.values.resize(n);
        is.read(reinterpret_cast<char*>(t.values.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: truncated payload in " + path.string());
        ck.tensors.push_back(std::move(t));
    }
    return ck;
}

inline void save_stack(const std::filesystem::path& path, LayerStack& stack,
                       nlohmann::json meta = nlohmann::json::object()) {
    meta["stack"] = stack.descriptor();
    save_checkpoint(path, meta, stack.state());
}

// Loads tensors into an already-built stack; the architecture descriptor in
// the file must match the stack exactly.
inline nlohmann::json load_stack(const std::filesystem::path& path, LayerStack& stack) {
    Checkpoint ck = load_checkpoint(path);
    if (ck.meta.value("stack", nlohmann::json()) != stack.descriptor())
        throw std::runtime_error("checkpoint: architecture descriptor mismatch in " +
                                 path.string());
    for (auto& ref : stack.state()) {
        const auto& t = ck.find(ref.name);
        if (t.values.size() != ref.value->size())
            throw std::runtime_error("checkpoint: tensor size mismatch for " + ref.name);
        *ref.value = t.values;
    }
    return ck.meta;
}

}  // namespace amclab::nn

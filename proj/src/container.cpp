#include "mmer/container.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

static_assert(std::endian::native == std::endian::little,
              "MTC1 I/O assumes a little-endian host");

namespace mmer {

namespace {

using json = nlohmann::json;

std::uint64_t align8(std::uint64_t n) { return (n + 7) & ~std::uint64_t{7}; }

void write_u64_le(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(buf, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_container(const Checkpoint& ckpt, std::ostream& out) {
    json header = json::object();
    if (!ckpt.meta.empty()) {
        header[kMetaKey] = ckpt.meta;
    }

    std::uint64_t offset = 0;
    for (const auto& [name, t] : ckpt.tensors) {
        if (name == kMetaKey) {
            throw ValidationError(std::string("tensor name '") + kMetaKey + "' is reserved");
        }
        validate_tensor(t, false);
        const auto n = static_cast<std::uint64_t>(t.numel());
        if (n > kMaxTensorElements) {
            throw ValidationError("tensor '" + name + "' exceeds the v1 element limit (" +
                                  std::to_string(n) + " > 2^32-1)");
        }
        const std::uint64_t nbytes = 4 * n;
        header[name] = {{"dtype", "f32"},
                        {"shape", t.shape},
                        {"offset", offset},
                        {"nbytes", nbytes}};
        offset = align8(offset + nbytes);
    }

    std::string header_text = header.dump();
    // Pad so the payload begins on an 8-byte file offset (magic + u64 = 12).
    while ((12 + header_text.size()) % 8 != 0) header_text.push_back(' ');

    out.write(kContainerMagic, 4);
    write_u64_le(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));

    std::uint64_t written = 0;
    static const char zeros[8] = {0};
    for (const auto& [name, t] : ckpt.tensors) {
        const std::uint64_t nbytes = 4 * static_cast<std::uint64_t>(t.numel());
        out.write(reinterpret_cast<const char*>(t.data.data()),
                  static_cast<std::streamsize>(nbytes));
        written += nbytes;
        const std::uint64_t pad = align8(written) - written;
        out.write(zeros, static_cast<std::streamsize>(pad));
        written += pad;
    }
    if (!out) {
        throw IoError("container write failed");
    }
}

void write_container(const Checkpoint& ckpt, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    write_container(ckpt, f);
    f.flush();
    if (!f) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

Checkpoint read_container(std::istream& in, const std::string& origin) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kContainerMagic, 4) != 0) {
        throw IoError(origin + ": bad magic (not an MTC1 container)");
    }
    const std::uint64_t header_len = read_u64_le(in);
    if (!in || header_len > (1ULL << 31)) {
        throw IoError(origin + ": header length " + std::to_string(header_len) + " not parseable");
    }
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!in) {
        throw IoError(origin + ": truncated header");
    }

    json header = json::parse(header_text, nullptr, false);
    if (header.is_discarded() || !header.is_object()) {
        throw IoError(origin + ": header is not a valid JSON object");
    }

    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::uint64_t payload_size = payload.size();

    Checkpoint ckpt;
    std::uint64_t prev_end = 0;
    bool first = true;
    std::uint64_t prev_offset = 0;
    for (const auto& [name, entry] : header.items()) {
        if (name == kMetaKey) {
            if (!entry.is_object()) {
                throw IoError(origin + ": __meta__ is not an object");
            }
            for (const auto& [k, v] : entry.items()) {
                if (!v.is_string()) {
                    throw IoError(origin + ": __meta__ value for '" + k + "' is not a string");
                }
                ckpt.meta[k] = v.get<std::string>();
            }
            continue;
        }
        if (!entry.is_object() || !entry.contains("dtype") || !entry.contains("shape") ||
            !entry.contains("offset") || !entry.contains("nbytes")) {
            throw IoError(origin + ": tensor entry '" + name + "' is malformed");
        }
        if (entry["dtype"] != "f32") {
            throw IoError(origin + ": tensor '" + name + "' has unsupported dtype");
        }
        Tensor t;
        t.name = name;
        for (const auto& d : entry["shape"]) {
            if (!d.is_number_integer()) {
                throw IoError(origin + ": tensor '" + name + "' has a non-integer dimension");
            }
            t.shape.push_back(d.get<std::int64_t>());
        }
        if (t.shape.empty()) {
            throw IoError(origin + ": tensor '" + name + "' has empty shape");
        }
        for (const auto d : t.shape) {
            if (d < 1) {
                throw IoError(origin + ": tensor '" + name + "' has non-positive dimension");
            }
        }
        const auto offset = entry["offset"].get<std::uint64_t>();
        const auto nbytes = entry["nbytes"].get<std::uint64_t>();
        if (nbytes != 4 * static_cast<std::uint64_t>(t.numel())) {
            throw IoError(origin + ": tensor '" + name + "' nbytes " + std::to_string(nbytes) +
                          " does not match shape " + shape_to_string(t.shape));
        }
        // json.items() iterates sorted keys, which is the canonical tensor
        // order; offsets must strictly increase without overlap in it.
        if (!first && offset <= prev_offset) {
            throw IoError(origin + ": tensor '" + name + "' offset not strictly increasing");
        }
        if (offset < prev_end) {
            throw IoError(origin + ": tensor '" + name + "' overlaps the previous tensor");
        }
        if (offset + nbytes > payload_size) {
            throw IoError(origin + ": tensor '" + name + "' extends past the payload");
        }
        t.data.resize(static_cast<std::size_t>(t.numel()));
        std::memcpy(t.data.data(), payload.data() + offset, nbytes);
        for (const float v : t.data) {
            if (std::isnan(v)) {
                throw IoError(origin + ": tensor '" + name + "' contains NaN (corrupt data)");
            }
        }
        prev_offset = offset;
        prev_end = offset + nbytes;
        first = false;
        ckpt.tensors.emplace(name, std::move(t));
    }
    return ckpt;
}

Checkpoint read_container(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return read_container(f, path.string());
}

}  // namespace mmer

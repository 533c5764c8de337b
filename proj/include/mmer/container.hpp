#pragma once

#include <filesystem>
#include <iosfwd>

#include "mmer/tensor.hpp"

namespace mmer {

// MTC1 container layout:
//
//   magic       4 bytes  "MTC1"
//   header_len  u64 little-endian
//   header      UTF-8 canonical JSON, padded with trailing spaces so the
//               payload starts on an 8-byte file offset
//   payload     tensor buffers in lexicographic name order, f32
//               little-endian, each 8-byte aligned within the payload
//
// Header keys are tensor names mapping to {dtype, shape, offset, nbytes};
// the reserved key "__meta__" carries the checkpoint's string metadata.
// Offsets are relative to the payload start.  Serialization is canonical
// (sorted keys, no insignificant whitespace), so writing the same
// checkpoint twice yields byte-identical files.

inline constexpr char kContainerMagic[4] = {'M', 'T', 'C', '1'};
inline constexpr const char* kMetaKey = "__meta__";

// Format v1 caps a single tensor at 2^32-1 elements.
inline constexpr std::uint64_t kMaxTensorElements = 0xFFFFFFFFULL;

void write_container(const Checkpoint& ckpt, std::ostream& out);
void write_container(const Checkpoint& ckpt, const std::filesystem::path& path);

Checkpoint read_container(std::istream& in, const std::string& origin);
Checkpoint read_container(const std::filesystem::path& path);

}  // namespace mmer

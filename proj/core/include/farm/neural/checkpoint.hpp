#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "farm/neural/param.hpp"

namespace farm::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

/// Little-endian layout:
///   "FDCK" | u32 version | u64 spec hash | u32 param count
///   per param: u32 name length | name bytes | u32 rows | u32 cols | rows*cols f64 (row-major)
///   u64 FNV-1a checksum of everything before it
/// A text manifest with shapes is written next to it as `<path>.manifest`.
void save_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     std::uint64_t spec_hash);

/// Throws CheckpointError on a bad header, hash mismatch, corrupted payload,
/// or when names/shapes disagree with `params`.
void load_checkpoint(const std::filesystem::path& path, const ParamList& params,
                     std::uint64_t spec_hash);

std::uint64_t read_checkpoint_hash(const std::filesystem::path& path);

}  // namespace farm::nn

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>

#include "safecontact/policy.hpp"

namespace safecontact {

// Checkpoint layout, all integers and floats little-endian:
//   8 bytes   magic "SCPOLICY"
//   u32       format version
//   u32       number of layer sizes N, then N x u32 sizes
//   u32       hidden activation tag
//   f64       action scale
//   u64       parameter count P, then P x f32 parameters
//   u64       FNV-1a 64 checksum over every preceding byte
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class VersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class ArchitectureMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class FormatError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

void save_policy(const PolicyParams& params, const std::filesystem::path& path);

/// Throws ChecksumError for truncated or corrupted files, VersionError,
/// FormatError for a bad magic, and ArchitectureMismatchError when the
/// header is inconsistent.
PolicyParams load_policy(const std::filesystem::path& path);

/// As above, additionally requiring the stored architecture to equal `expected`.
PolicyParams load_policy(const std::filesystem::path& path, const nn::Architecture& expected);

}  // namespace safecontact
